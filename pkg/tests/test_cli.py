import csv
import hashlib
import io

import pytest

from egorec.cli import main


@pytest.fixture(scope="module")
def synth_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    social, likes = root / "social.tsv", root / "likes.tsv"
    assert main(["synth", "--social", str(social), "--likes", str(likes), "--cores", "30", "--fringe", "370",
                 "--items", "800", "--friends", "25", "--alpha", "0.8", "--seed", "1", "--out", str(root / "s.csv")]) == 0
    return social, likes


def _records(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def _run(tmp_path, name, *args):
    out = tmp_path / f"{name}.csv"
    assert main([*args, "--out", str(out)]) == 0
    return out


def test_synth_writes_module_formats(synth_files):
    social, likes = synth_files
    lines = social.read_text().splitlines()
    assert len(lines) == 30 * 25
    assert all(len(line.split("\t")) == 2 for line in lines + likes.read_text().splitlines())


def test_stats_records_and_cdf(tmp_path, synth_files):
    social, likes = synth_files
    out = _run(tmp_path, "stats", "stats", "--social", str(social), "--likes", str(likes), "--cdf", "10,100")
    rows = {r["statistic"]: r["value"] for r in _records(out)}
    assert rows["total_users"] == "400" and rows["total_core_users"] == "30"
    assert float(rows["popularity_cdf_p100"]) == 1.0
    assert 0 < float(rows["popularity_cdf_p10"]) < 1


def test_similarity_report(tmp_path, synth_files):
    social, likes = synth_files
    out = _run(tmp_path, "sim", "similarity", "--social", str(social), "--likes", str(likes), "--k", "1,10")
    metrics = [(r["metric"], r["k"]) for r in _records(out)]
    assert ("topk_friends", "10") in metrics and ("topk_non_friends", "1") in metrics
    assert ("random_similarity", "all") in metrics


def test_evaluate_report_schema(tmp_path, synth_files):
    social, likes = synth_files
    out = _run(tmp_path, "eval", "evaluate", "--social", str(social), "--likes", str(likes), "--k", "5,20",
               "--splits", "3", "--pool", "friends,random")
    rows = _records(out)
    assert list(rows[0]) == ["condition", "k", "split", "n_users", "n_skipped", "mean_ndcg", "std_ndcg"]
    assert len(rows) == 2 * 2 * (3 + 1)
    assert {r["condition"] for r in rows} == {"friends", "random_full_network"}


def test_locality_null_choices(tmp_path, synth_files):
    social, likes = synth_files
    out = _run(tmp_path, "loc", "locality", "--social", str(social), "--likes", str(likes), "--replicates", "2",
               "--null", "uniform,degree-preserving")
    rows = _records(out)
    nulls = {(r["metric"], r["null_model"]) for r in rows}
    assert ("random_item_ego", "item_uniform") in nulls
    assert ("random_item_ego", "item_degree_preserving") in nulls
    assert ("random_friend_ego", "friend_rewire") in nulls


def test_table_format_and_timestamp(tmp_path, synth_files, capsys):
    social, likes = synth_files
    assert main(["stats", "--social", str(social), "--likes", str(likes), "--format", "table", "--timestamp"]) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[0].startswith("# generated ")
    assert lines[1].split() == ["statistic", "value"]
    assert set(lines[2]) <= {"-", " "}
    assert "egorec stats:" in captured.err


def test_same_config_same_bytes(tmp_path, synth_files):
    social, likes = synth_files
    args = ["evaluate", "--social", str(social), "--likes", str(likes), "--k", "10", "--splits", "2", "--seed", "7"]
    a = _run(tmp_path, "a", *args).read_bytes()
    b = _run(tmp_path, "b", *args).read_bytes()
    assert a == b


def test_inputs_untouched(tmp_path, synth_files):
    social, likes = synth_files
    digest = [hashlib.sha256(p.read_bytes()).hexdigest() for p in synth_files]
    _run(tmp_path, "l", "locality", "--social", str(social), "--likes", str(likes), "--replicates", "1")
    assert digest == [hashlib.sha256(p.read_bytes()).hexdigest() for p in synth_files]


def test_bad_flag_prints_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--social", "x", "--likes", "y", "--k", "ten"])
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "extra, message",
    [(["--pool", "enemies"], "unknown pool"), (["--ratio", "1.5"], "--ratio"), (["--workers", "0"], "--workers")],
)
def test_invalid_values_fail_before_work(synth_files, capsys, extra, message):
    social, likes = synth_files
    assert main(["evaluate", "--social", str(social), "--likes", str(likes), *extra]) == 1
    assert message in capsys.readouterr().err


def test_missing_file_and_parse_errors(tmp_path, synth_files, capsys):
    social, likes = synth_files
    assert main(["stats", "--social", str(tmp_path / "nope.tsv"), "--likes", str(likes)]) == 1
    assert "nope.tsv" in capsys.readouterr().err
    broken = tmp_path / "broken.tsv"
    broken.write_text("a\tb\nonly-one-field\n")
    assert main(["stats", "--social", str(broken), "--likes", str(likes)]) == 1
    assert "broken.tsv:2" in capsys.readouterr().err

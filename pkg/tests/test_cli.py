import json
import subprocess
import sys

import pytest

from gcdisc.cli import cli


def run_cli(*argv):
    return cli(list(argv))


@pytest.fixture
def small_files(tmp_path):
    e = tmp_path / "data.gcde"
    m = tmp_path / "data.csv"
    code = run_cli(
        "gen",
        "--out-embeddings", str(e),
        "--out-metadata", str(m),
        "--n-old-classes", "2", "--n-new-classes", "2",
        "--sources-per-class", "2", "--clips-per-source", "3",
        "--dim", "6", "--seed", "5",
    )
    assert code == 0
    return e, m


TINY_TRAIN = ["--epochs", "3", "--n-neg", "6", "--n-pos", "2",
              "--hidden-dim", "8", "--n-blocks", "1"]


def test_gen_writes_files(small_files):
    e, m = small_files
    assert e.exists() and m.exists()


def test_gen_deterministic(tmp_path, small_files):
    e, m = small_files
    e2, m2 = tmp_path / "r.gcde", tmp_path / "r.csv"
    run_cli("gen", "--out-embeddings", str(e2), "--out-metadata", str(m2),
            "--n-old-classes", "2", "--n-new-classes", "2",
            "--sources-per-class", "2", "--clips-per-source", "3",
            "--dim", "6", "--seed", "5")
    assert e.read_bytes() == e2.read_bytes()
    assert m.read_bytes() == m2.read_bytes()


def test_full_flow_stagewise(tmp_path, small_files, capsys):
    e, m = small_files
    ckpt = tmp_path / "enc.ckpt"
    refined = tmp_path / "refined.gcde"
    manifest = tmp_path / "manifest.json"
    log = tmp_path / "train.log"
    assert run_cli("train", "--embeddings", str(e), "--metadata", str(m),
                   "--out-checkpoint", str(ckpt),
                   "--out-embeddings", str(refined),
                   "--out-manifest", str(manifest),
                   "--log", str(log), "--seed", "1", *TINY_TRAIN) == 0
    assert ckpt.exists() and refined.exists()
    assert len(log.read_text().splitlines()) == 3

    assignment = tmp_path / "assign.json"
    assert run_cli("cluster", "--embeddings", str(refined),
                   "--method", "kmeans", "--k", "4", "--seed", "1",
                   "--out-assignment", str(assignment)) == 0
    assert "clusters: 4" in capsys.readouterr().out

    report = tmp_path / "report.json"
    assert run_cli("eval", "--assignment", str(assignment),
                   "--metadata", str(m), "--embeddings", str(refined),
                   "--manifest", str(manifest),
                   "--out-report", str(report)) == 0
    payload = json.loads(report.read_text())
    assert set(payload["subsets"]) == {"all", "old", "new"}
    for subset in payload["subsets"].values():
        assert {"acc", "nmi", "ari", "silhouette"} <= set(subset)
    assert payload["provenance"]["config"]["epochs"] == 3


def test_pipeline_deterministic_reports(tmp_path, small_files):
    e, m = small_files
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    argv = ["pipeline", "--embeddings", str(e), "--metadata", str(m),
            "--k", "4", "--seed", "1", *TINY_TRAIN]
    assert run_cli(*argv, "--out-report", str(r1)) == 0
    assert run_cli(*argv, "--out-report", str(r2)) == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_pipeline_equals_stagewise_composition(tmp_path, small_files):
    e, m = small_files
    lam_flags = ["--lambda", "1", "--seed", "2", *TINY_TRAIN]

    piped = tmp_path / "piped.json"
    assert run_cli("pipeline", "--embeddings", str(e), "--metadata", str(m),
                   "--k", "4", "--out-report", str(piped), *lam_flags) == 0

    refined = tmp_path / "z.gcde"
    manifest = tmp_path / "man.json"
    assignment = tmp_path / "a.json"
    composed = tmp_path / "composed.json"
    assert run_cli("train", "--embeddings", str(e), "--metadata", str(m),
                   "--out-checkpoint", str(tmp_path / "c.ckpt"),
                   "--out-embeddings", str(refined),
                   "--out-manifest", str(manifest),
                   "--log", str(tmp_path / "t.log"), *lam_flags) == 0
    assert run_cli("cluster", "--embeddings", str(refined), "--k", "4",
                   "--seed", "2", "--out-assignment", str(assignment)) == 0
    assert run_cli("eval", "--assignment", str(assignment), "--metadata", str(m),
                   "--embeddings", str(refined), "--manifest", str(manifest),
                   "--out-report", str(composed)) == 0
    assert piped.read_bytes() == composed.read_bytes()


def test_threshold_above_one_reports_singletons(tmp_path, small_files, capsys):
    e, m = small_files
    out = tmp_path / "a.json"
    assert run_cli("cluster", "--embeddings", str(e), "--method", "threshold",
                   "--delta", "1.5", "--out-assignment", str(out)) == 0
    assert "clusters: 24" in capsys.readouterr().out  # 24 samples, all singletons


def test_unknown_flag_is_usage_error(capsys):
    assert run_cli("gen", "--no-such-flag") == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and "\n" not in err.strip("\n")


def test_missing_file_is_usage_error(tmp_path, capsys):
    assert run_cli("cluster", "--embeddings", str(tmp_path / "nope.gcde"),
                   "--k", "2", "--out-assignment", str(tmp_path / "a.json")) == 1
    assert "missing file" in capsys.readouterr().err


def test_invalid_range_is_usage_error(small_files, tmp_path):
    e, m = small_files
    assert run_cli("pipeline", "--embeddings", str(e), "--metadata", str(m),
                   "--k", "4", "--tau", "0",
                   "--out-report", str(tmp_path / "r.json")) == 1


def test_kmeans_without_k_is_usage_error(small_files, tmp_path):
    e, _ = small_files
    assert run_cli("cluster", "--embeddings", str(e),
                   "--out-assignment", str(tmp_path / "a.json")) == 1


def test_corrupt_file_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.gcde"
    bad.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNK")
    assert run_cli("cluster", "--embeddings", str(bad), "--k", "2",
                   "--out-assignment", str(tmp_path / "a.json")) == 2
    assert capsys.readouterr().err.startswith("error: data:")


def test_numeric_failure_exit_code(small_files, tmp_path):
    import numpy as np

    e, m = small_files
    with np.errstate(over="ignore", invalid="ignore"):
        code = run_cli("pipeline", "--embeddings", str(e), "--metadata", str(m),
                       "--k", "4", "--lr", "1e308", "--epochs", "3",
                       "--n-neg", "6", "--hidden-dim", "8", "--n-blocks", "1",
                       "--out-report", str(tmp_path / "r.json"))
    assert code == 3


def test_console_entry_point_runs():
    out = subprocess.run(
        [sys.executable, "-m", "gcdisc.cli", "--version"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert out.stdout.startswith("gcdisc ")

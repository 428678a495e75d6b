import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from slnp import ProjectionModel
from slnp import cli
from slnp.cli import emit_similarity_evolution, run_cli
from slnp.errors import NoWatchedSample, NotPositiveDefinite
from slnp.types import TrainTrace

from fixtures_io import digit_like_idx


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def idx_root(tmp_path, monkeypatch):
    root = tmp_path / "data"
    digit_like_idx(root / "digits")
    monkeypatch.setenv("SLNP_DATA_DIR", str(root))
    return root


def test_compare_all_methods(idx_root, tmp_path):
    out = tmp_path / "out"
    code = run_cli(["compare", "--dataset", "idx:digits", "--methods", "slnp,lda,lfda,lpp,pca",
                    "--n-per-class", "5", "--seeds", "5", "--k", "3", "--d-pca", "10",
                    "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "compare.csv")
    assert [r["method"] for r in rows] == ["slnp", "lda", "lfda", "lpp", "pca"]
    assert all(r["seed_count"] == "5" for r in rows)
    assert float(rows[0]["mean_rate"]) > 50


def test_outputs_byte_identical(idx_root, tmp_path):
    args = ["compare", "--dataset", "idx:digits", "--methods", "slnp,pca", "--n-per-class", "4",
            "--seeds", "0,3", "--k", "2", "--format", "both"]
    assert run_cli(args + ["--out", str(tmp_path / "a")]) == 0
    assert run_cli(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("compare.csv", "compare.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_timing_flag_fills_seconds(tmp_path):
    assert run_cli(["toy", "--seeds", "2", "--d", "1", "--k", "2", "--timing",
                    "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "toy.csv")
    assert all(float(r["seconds"]) >= 0 for r in rows)


def test_toy_command(tmp_path):
    assert run_cli(["toy", "--seeds", "3", "--d", "1", "--k", "2", "--out", str(tmp_path)]) == 0
    rows = {r["method"]: r for r in read_csv(tmp_path / "toy.csv")}
    assert float(rows["slnp"]["mean_rate"]) == 100.0
    assert rows["slnp"]["seconds"] == ""


def test_trace_command(tmp_path):
    code = run_cli(["trace", "--dataset", "toy", "--k", "2", "--d", "1", "--watch-class", "0",
                    "--watch-sample", "0", "--n-per-class", "10", "--out", str(tmp_path)])
    assert code == 0
    trace = read_csv(tmp_path / "trace.csv")
    assert list(trace[0]) == ["iter", "J", "embed_term", "penalty_term", "gamma_mean",
                              "gamma_min", "gamma_max", "seconds"]
    evo = read_csv(tmp_path / "similarity.csv")
    iters = sorted({int(r["iter"]) for r in evo})
    assert iters == list(range(len(trace) + 1))
    for p in iters:
        vals = [float(r["similarity"]) for r in evo if int(r["iter"]) == p]
        assert len(vals) == 10
        if p == 0:
            assert vals == [0.1] * 10
    heat = read_csv(tmp_path / "similarity_heat.csv")
    assert len(heat) == 10 and float(heat[0]["heat_similarity"]) == 1.0


def test_emit_similarity_evolution(tmp_path):
    tr = TrainTrace(watch=(0, 1), snapshots=[np.full(4, 0.25), np.array([0.0, 0.0, 0.6, 0.4])],
                    watch_heat=np.array([0.5, 1.0, 0.2, 0.1]))
    p, h = emit_similarity_evolution(tr, tmp_path / "evo.csv")
    assert h.name == "evo_heat.csv"
    assert len(read_csv(p)) == 8
    with pytest.raises(NoWatchedSample):
        emit_similarity_evolution(TrainTrace(), tmp_path / "x.csv")


def test_train_writes_model(tmp_path):
    assert run_cli(["train", "--k", "2", "--d", "1", "--n-per-class", "8", "--format", "json",
                    "--out", str(tmp_path)]) == 0
    m = ProjectionModel.load(tmp_path / "model.npz")
    assert m.method == "slnp" and m.w.shape == (2, 1)
    assert json.loads((tmp_path / "trace.json").read_text())["rows"]


def test_train_baseline(tmp_path):
    assert run_cli(["train", "--methods", "lda", "--d", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "model.npz").exists() and not (tmp_path / "trace.csv").exists()


def test_sweep_command(tmp_path):
    assert run_cli(["sweep", "--sweep-axis", "K", "--values", "2,3,4", "--d", "1",
                    "--n-per-class", "8", "--seeds", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [r["K"] for r in rows] == ["2", "3", "4"]


def test_csv_dataset(tmp_path):
    rng = np.random.default_rng(0)
    lines = ["a,b,c,label"] + [f"{x[0]},{x[1]},{x[2]},{c}" for c in range(2)
                               for x in rng.normal(c * 3, 1, (6, 3))]
    (tmp_path / "d.csv").write_text("\n".join(lines) + "\n")
    assert run_cli(["compare", "--dataset", f"csv:{tmp_path / 'd.csv'}", "--methods", "slnp,lda",
                    "--n-per-class", "4", "--k", "2", "--d", "1", "--out", str(tmp_path)]) == 0


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": 2, "d": 1, "seeds": "2", "n-per-class": 8,
                               "methods": "slnp,pca", "format": "json"}))
    assert run_cli(["compare", "--config", str(cfg), "--methods", "pca", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "compare.json").read_text())
    assert [r["method"] for r in data] == ["pca"]
    assert data[0]["seeds"] == [0, 1] and data[0]["config"]["K"] == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run_cli(["compare", "--config", str(cfg)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert run_cli(["compare", "--no-such-flag"]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "--no-such-flag" in err


def test_usage_errors(tmp_path):
    assert run_cli([]) == 1
    assert run_cli(["compare", "--out", str(tmp_path)]) == 1  # no --n-per-class
    assert run_cli(["trace", "--methods", "lda", "--out", str(tmp_path)]) == 1
    assert run_cli(["compare", "--methods", "xyz", "--n-per-class", "3"]) == 1
    assert run_cli(["compare", "--dataset", "ftp:x", "--n-per-class", "3"]) == 1


def test_config_error_exit(tmp_path):
    assert run_cli(["compare", "--k", "30", "--n-per-class", "5", "--out", str(tmp_path)]) == 1
    assert not any(tmp_path.iterdir())


def test_data_error_exit(tmp_path, capsys):
    assert run_cli(["compare", "--dataset", f"csv:{tmp_path / 'none.csv'}",
                    "--n-per-class", "3"]) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("slnp: data error") and "\n" not in err
    assert run_cli(["compare", "--n-per-class", "500", "--out", str(tmp_path)]) == 2


def test_numerical_error_exit(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NotPositiveDefinite("B is not positive definite")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert run_cli(["compare", "--n-per-class", "3", "--out", str(tmp_path / "o")]) == 3
    assert not (tmp_path / "o").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "slnp", "toy", "--seeds", "1", "--d", "1",
                        "--k", "2", "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "toy.csv").exists()

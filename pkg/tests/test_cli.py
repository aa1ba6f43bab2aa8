"""CLI subcommands driven in-process through main(argv)."""

import json

import numpy as np
import pytest

from iklogit import load_model
from iklogit.cli import main

from conftest import separated_dataset, write_csv


@pytest.fixture
def clusters_csv(rng, tmp_path):
    data = separated_dataset(rng, n=16)
    return write_csv(tmp_path / "clusters.csv", data.features, data.labels)


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def train_config(tmp_path, data_path, **model_overrides):
    model = {"variant": "l1-riklr", "lambda": 0.5, "lambda1": 0.05}
    model.update(model_overrides)
    return write_config(
        tmp_path,
        {
            "data": {"path": str(data_path)},
            "model": model,
            "output": {"model": str(tmp_path / "model.json")},
        },
    )


class TestTrain:
    def test_success_writes_model_and_trace(self, clusters_csv, tmp_path, capsys):
        trace_path = tmp_path / "trace.json"
        cfg = train_config(tmp_path, clusters_csv)
        rc = main(["train", "--config", cfg, "--trace", str(trace_path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "status: converged" in out
        assert "selected_count:" in out
        assert "final_objective:" in out
        model = load_model(str(tmp_path / "model.json"))
        assert model.variant == "l1-riklr"
        trace = json.loads(trace_path.read_text())
        assert trace["status"] == "converged"
        assert trace["records"][0]["iteration"] == 1

    def test_missing_data_path_exits_one(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"model": {"variant": "klr", "lambda": 1.0}}
        )
        rc = main(["train", "--config", cfg])
        assert rc == 1
        assert "data.path is required" in capsys.readouterr().err

    def test_unreadable_data_file_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        cfg = train_config(tmp_path, missing)
        rc = main(["train", "--config", cfg])
        assert rc == 1
        assert str(missing) in capsys.readouterr().err

    def test_iteration_cap_exits_two_but_writes_model(
        self, clusters_csv, tmp_path, capsys
    ):
        cfg = train_config(tmp_path, clusters_csv, variant="iklr", lambda1=0.0)
        rc = main(["train", "--config", cfg, "--set", "solver.max_outer=1"])
        assert rc == 2
        assert "status: max_iterations" in capsys.readouterr().out
        assert (tmp_path / "model.json").exists()

    def test_set_overrides_reach_the_model(self, clusters_csv, tmp_path, capsys):
        cfg = train_config(tmp_path, clusters_csv)
        rc = main(["train", "--config", cfg, "--set", "model.lambda=0.25"])
        assert rc == 0
        model = load_model(str(tmp_path / "model.json"))
        assert model.lam == 0.25

    def test_explicit_kernel_section(self, clusters_csv, tmp_path, capsys):
        # Small sigma keeps the Gram well conditioned on tight clusters.
        cfg = train_config(
            tmp_path, clusters_csv, kernel={"kind": "rbf", "sigma": 0.1}
        )
        rc = main(["train", "--config", cfg])
        assert rc == 0
        model = load_model(str(tmp_path / "model.json"))
        assert model.kernel.kind == "rbf"
        assert model.kernel.sigma == 0.1

    def test_idempotent_model_files(self, clusters_csv, tmp_path, capsys):
        cfg = train_config(tmp_path, clusters_csv)
        assert main(["train", "--config", cfg]) == 0
        first = (tmp_path / "model.json").read_bytes()
        assert main(["train", "--config", cfg]) == 0
        assert (tmp_path / "model.json").read_bytes() == first

    def test_malformed_override_exits_one(self, clusters_csv, tmp_path, capsys):
        cfg = train_config(tmp_path, clusters_csv)
        rc = main(["train", "--config", cfg, "--set", "no-equals-sign"])
        assert rc == 1
        assert "key=value" in capsys.readouterr().err

    def test_unknown_model_key_exits_one(self, clusters_csv, tmp_path, capsys):
        cfg = train_config(tmp_path, clusters_csv, bogus=1)
        rc = main(["train", "--config", cfg])
        assert rc == 1
        assert "unknown model keys" in capsys.readouterr().err

    def test_invalid_config_json_exits_one(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        rc = main(["train", "--config", str(path)])
        assert rc == 1
        assert "not valid JSON" in capsys.readouterr().err

    def test_non_object_config_exits_one(self, tmp_path, capsys):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        rc = main(["train", "--config", str(path)])
        assert rc == 1
        assert "JSON object" in capsys.readouterr().err

    def test_missing_config_file_exits_one(self, tmp_path, capsys):
        rc = main(["train", "--config", str(tmp_path / "absent.json")])
        assert rc == 1
        assert "cannot read config" in capsys.readouterr().err


class TestKernelStats:
    def test_two_far_points_hand_eigensystem(self, tmp_path, capsys):
        # d=2 resolves eta to 1.4; L1 distance 20 truncates the off-diagonal
        # to zero, so the Gram is 1.4 * I with a double eigenvalue.
        path = tmp_path / "pair.csv"
        path.write_text("0,0,0\n10,10,1\n")
        rc = main(["kernel-stats", "--data", str(path)])
        assert rc == 0
        record = json.loads(capsys.readouterr().out)
        assert record["n"] == 2
        assert record["d"] == 2
        assert record["eig_min"] == pytest.approx(1.4, abs=1e-12)
        assert record["eig_max"] == pytest.approx(1.4, abs=1e-12)
        assert record["kernel"]["kind"] == "tl1"
        assert record["kernel"]["eta"] == pytest.approx(1.4)

    def test_rbf_spectrum_nonnegative(self, clusters_csv, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "data": {"path": str(clusters_csv)},
                "kernel": {"kind": "rbf", "sigma": 1.0},
            },
        )
        rc = main(["kernel-stats", "--config", cfg])
        assert rc == 0
        record = json.loads(capsys.readouterr().out)
        assert record["eig_min"] >= -1e-10
        assert record["eig_max"] > 0

    def test_stats_file_output(self, clusters_csv, tmp_path, capsys):
        out = tmp_path / "stats.json"
        rc = main(["kernel-stats", "--data", str(clusters_csv), "--output", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["n"] == 16


class TestPredictAndEval:
    @pytest.fixture
    def trained(self, clusters_csv, tmp_path, capsys):
        cfg = train_config(tmp_path, clusters_csv)
        assert main(["train", "--config", cfg]) == 0
        capsys.readouterr()
        return str(tmp_path / "model.json")

    def test_predict_stdout(self, trained, rng, tmp_path, capsys):
        features = rng.normal(2.0, 0.1, size=(4, 2))
        feat_path = tmp_path / "feat.csv"
        feat_path.write_text(
            "\n".join(",".join(repr(float(v)) for v in row) for row in features) + "\n"
        )
        rc = main(["predict", "--model", trained, "--data", str(feat_path)])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "index,probability,label"
        assert len(lines) == 5
        for i, line in enumerate(lines[1:]):
            idx, prob, label = line.split(",")
            assert int(idx) == i
            assert 0.0 < float(prob) < 1.0
            assert label in ("0", "1")

    def test_predict_labeled_file_with_config(self, trained, clusters_csv, tmp_path, capsys):
        out_path = tmp_path / "preds.csv"
        cfg = write_config(
            tmp_path,
            {"data": {"path": str(clusters_csv), "label_column": -1}},
            name="pred.json",
        )
        rc = main(
            ["predict", "--config", cfg, "--model", trained, "--output", str(out_path)]
        )
        assert rc == 0
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 17  # header + 16 rows
        labels = [int(line.split(",")[2]) for line in lines[1:]]
        # Separated clusters, first half class 0: the model must get most right.
        assert np.mean(np.array(labels[:8]) == 0) >= 0.75
        assert np.mean(np.array(labels[8:]) == 1) >= 0.75

    def test_predict_without_model_exits_one(self, clusters_csv, capsys):
        rc = main(["predict", "--data", str(clusters_csv)])
        assert rc == 1
        assert "model" in capsys.readouterr().err

    def test_eval_metrics(self, trained, clusters_csv, tmp_path, capsys):
        metrics_path = tmp_path / "metrics.json"
        rc = main(
            [
                "eval",
                "--model",
                trained,
                "--data",
                str(clusters_csv),
                "--output",
                str(metrics_path),
            ]
        )
        assert rc == 0
        record = json.loads(capsys.readouterr().out)
        assert record["n"] == 16
        assert record["accuracy"] >= 0.9
        assert record["error_rate"] == pytest.approx(1.0 - record["accuracy"])
        assert json.loads(metrics_path.read_text()) == record


class TestBench:
    def test_single_cell_report(self, clusters_csv, tmp_path, capsys):
        report_dir = tmp_path / "reports"
        cfg = write_config(
            tmp_path,
            {
                "data": {"path": str(clusters_csv)},
                "variants": ["iklr"],
                "grid": [0.1],
                "repeats": 1,
                "cv_folds": 2,
                "output": {"directory": str(report_dir)},
            },
        )
        rc = main(["bench", "--config", cfg])
        out = capsys.readouterr().out
        assert rc == 0
        records = json.loads((report_dir / "report.json").read_text())
        assert len(records) == 1
        assert records[0]["variant"] == "iklr"
        assert records[0]["dataset"] == "clusters"
        text = (report_dir / "report.txt").read_text()
        assert "eig_min" in text
        assert "iklr" in text
        assert out == text

    def test_empty_grid_exits_one(self, clusters_csv, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"data": {"path": str(clusters_csv)}, "grid": [], "repeats": 1},
        )
        rc = main(["bench", "--config", cfg])
        assert rc == 1
        assert "grid" in capsys.readouterr().err

    def test_unknown_top_level_key_exits_one(self, clusters_csv, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"data": {"path": str(clusters_csv)}, "surprise": True},
        )
        rc = main(["bench", "--config", cfg])
        assert rc == 1
        assert "unknown bench config keys" in capsys.readouterr().err

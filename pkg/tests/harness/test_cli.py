import json

import pytest

from sasshalab.harness.artifacts import load_checkpoint
from sasshalab.harness.cli import EXIT_DIVERGED, EXIT_INVALID, EXIT_OK, main

TRAIN = """\
problem.kind = quadratic
problem.dim = 4
optimizer.method = sassha
optimizer.lr = 0.05
optimizer.rho = 0.05
run.steps = 20
run.seeds = 1, 2
"""

TOY = """\
optimizer.method = sassha
optimizer.lr = 0.1
optimizer.rho = 0.05
toy.grid = 2
toy.steps = 10
"""

STABILITY = """\
ensemble.kind = diagonals
ensemble.diagonals = 1; 3
ensemble.eta = 0.1
ensemble.eps = 1.0
ensemble.steps = 5
ensemble.n_traj = 10
"""


@pytest.fixture
def config(tmp_path):
    def _write(text: str, name: str = "exp.cfg") -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


class TestTrain:

    def test_writes_seed_records(self, tmp_path, config):
        out = tmp_path / "runs"
        assert main(["train", "--config", config(TRAIN), "--out", str(out)]) == EXIT_OK
        for seed in ("1", "2"):
            header = (out / seed / "record.csv").read_text().splitlines()[0]
            assert header.startswith("step,loss,lr,rho,update_norm,gc_count,hvp_count")
            x, _ = load_checkpoint(out / seed / "params.ckpt")
            assert x.size == 4
        assert (out / "manifest.json").is_file()

    def test_reproducible_bytes(self, tmp_path, config):
        path = config(TRAIN)
        main(["train", "--config", path, "--out", str(tmp_path / "a")])
        main(["train", "--config", path, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "1" / "record.csv").read_bytes() == (tmp_path / "b" / "1" / "record.csv").read_bytes()

    def test_seed_override_and_json(self, tmp_path, config):
        out = tmp_path / "runs"
        argv = ["train", "--config", config(TRAIN), "--out", str(out), "--seed-override", "9", "--format", "json"]
        assert main(argv) == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == ["9", "cost.json", "manifest.json"]
        assert (out / "9" / "record.json").is_file()

    def test_measured_cost(self, tmp_path, config):
        out = tmp_path / "runs"
        main(["train", "--config", config(TRAIN), "--out", str(out)])
        rows = [line.split(",") for line in (out / "cost.csv").read_text().splitlines()]
        assert rows[0] == ["seed", "method", "k", "gc_per_step", "hvp_per_step", "gc_equivalents"]
        assert [row[0] for row in rows[1:]] == ["1", "2"]
        assert all(float(row[3]) == 2.0 and float(row[4]) == pytest.approx(0.1) for row in rows[1:])

    def test_learning_rate_grid(self, tmp_path, config):
        out = tmp_path / "runs"
        assert main(["train", "--config", config(TRAIN + "run.lr_grid = 0.01, 0.05\n"), "--out", str(out)]) == EXIT_OK
        grid = json.loads((out / "grid.json").read_text())
        assert grid["best_lr"] in (0.01, 0.05)

    def test_all_diverged(self, tmp_path, config):
        text = TRAIN.replace("sassha", "sgdm").replace("optimizer.lr = 0.05", "optimizer.lr = 1e10")
        text = text.replace("optimizer.rho = 0.05\n", "").replace("run.steps = 20", "run.steps = 60")
        assert main(["train", "--config", config(text), "--out", str(tmp_path / "runs")]) == EXIT_DIVERGED

    def test_summary(self, tmp_path, config, capsys):
        out = tmp_path / "runs"
        main(["train", "--config", config(TRAIN), "--out", str(out)])
        capsys.readouterr()
        assert main(["summary", str(out)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "dir,metric,mean,std,n,n_diverged,failed"
        assert any(",val_loss," in line and line.endswith(",2,0,False") for line in lines)


class TestOtherCommands:

    def test_sharpness_of_checkpoint(self, tmp_path, config, capsys):
        path = config(TRAIN + "metrics.n_mc = 5\nmetrics.trace_samples = 3\n")
        out = tmp_path / "runs"
        main(["train", "--config", path, "--out", str(out)])
        capsys.readouterr()
        assert main(["sharpness", "--config", path, "--checkpoint", str(out / "1" / "params.ckpt")]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["lambda_max"] > 0.0
        assert report["n_mc"] == 5

    def test_toy_csv(self, config, capsys):
        assert main(["toy", "--config", config(TOY)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "init_x,init_y,variant,final_x,final_y,basin,trace,status"
        assert len(lines) == 1 + 8

    def test_stability_json(self, config, capsys):
        assert main(["stability", "--config", config(STABILITY)]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["a"] == pytest.approx(2.0)
        assert report["stable"] is True
        assert report["conditions"][2] is None
        assert report["commuting"] is True

    def test_stability_to_file(self, tmp_path, config):
        assert main(["stability", "--config", config(STABILITY), "--out", str(tmp_path / "st")]) == EXIT_OK
        assert "lambda_max_M" in json.loads((tmp_path / "st" / "stability.json").read_text())

    def test_stability_trajectory(self, tmp_path, config):
        out = tmp_path / "st"
        assert main(["stability", "--config", config(STABILITY), "--out", str(out)]) == EXIT_OK
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "step,mean_sq_norm"
        assert len(lines) == 1 + 6
        assert lines[1] == "0,1.0"
        report = json.loads((out / "stability.json").read_text())
        assert len(report["mean_sq_norm"]) == 6

    def test_stability_csv(self, config, capsys):
        assert main(["stability", "--config", config(STABILITY), "--format", "csv"]) == EXIT_OK
        header, values = capsys.readouterr().out.splitlines()
        row = dict(zip(header.split(","), values.split(",")))
        assert float(row["a"]) == pytest.approx(2.0)
        assert row["conditions_3"] == ""
        assert row["stable"] == "True"
        assert "mean_sq_norm" not in row

    def test_stability_format_from_config(self, tmp_path, config):
        out = tmp_path / "st"
        assert main(["stability", "--config", config(STABILITY + "output.format = csv\n"), "--out", str(out)]) == EXIT_OK
        assert (out / "stability.csv").is_file()
        assert not (out / "stability.json").exists()

    def test_sharpness_csv(self, tmp_path, config):
        path = config(TRAIN + "metrics.n_mc = 5\nmetrics.trace_samples = 3\n")
        runs = tmp_path / "runs"
        main(["train", "--config", path, "--out", str(runs)])
        argv = ["sharpness", "--config", path, "--checkpoint", str(runs / "1" / "params.ckpt"),
                "--out", str(tmp_path / "sh"), "--format", "csv"]
        assert main(argv) == EXIT_OK
        header, values = (tmp_path / "sh" / "sharpness.csv").read_text().splitlines()
        row = dict(zip(header.split(","), values.split(",")))
        assert row["n_mc"] == "5"
        assert float(row["lambda_max"]) > 0.0
        assert "flags" in row

    def test_cost_table(self, capsys):
        assert main(["cost"]) == EXIT_OK
        rows = [line.split(",") for line in capsys.readouterr().out.splitlines()]
        assert rows[0] == ["method", "k", "gc_per_step", "hvp_per_step", "gc_equivalents"]
        by_method = {row[0]: float(row[-1]) for row in rows[1:]}
        assert by_method["sassha"] == pytest.approx(2.3)
        assert by_method["msassha"] == pytest.approx(1.3)


class TestErrors:

    def test_unknown_subcommand(self, capsys):
        assert main(["bogus"]) == EXIT_INVALID
        assert "sasshalab:" in capsys.readouterr().err

    def test_missing_config(self):
        assert main(["train"]) == EXIT_INVALID

    def test_config_error_names_key(self, config, capsys):
        assert main(["train", "--config", config(TRAIN + "optimizer.lion = 1\n")]) == EXIT_INVALID
        err = capsys.readouterr().err
        assert "optimizer.lion" in err
        assert "line 8" in err

    def test_summary_of_empty_directory(self, tmp_path):
        assert main(["summary", str(tmp_path)]) == EXIT_INVALID

import csv
import shlex

import numpy as np
import pytest

from varsmooth import cli
from varsmooth.experiments import data, imageio


def test_deblur_example_parses():
    cfg = cli.parse_args(shlex.split(
        "deblur --image cam.pgm --a 1e-1 --lambda 2e-5 --iters 100 --noise-std 1e-3 --seed 7 --out runs/"))
    assert cfg.command == "deblur" and cfg.image == "cam.pgm"
    assert cfg.a == (0.1,) and cfg.lam == 2e-5 and cfg.noise_std == 1e-3
    assert (cfg.iters, cfg.seed, cfg.out) == (100, 7, "runs/")


def test_svm_example_parses():
    cfg = cli.parse_args(shlex.split(
        "svm --data blobs.csv --C 100 --sigma 0.5 --a 1e-3 --folds 10 --iters 10000"))
    assert (cfg.data, cfg.C, cfg.sigma, cfg.a, cfg.folds, cfg.iters) == ("blobs.csv", 100.0, 0.5, (1e-3,), 10, 10000)


def test_no_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.parse_args([])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv,flag", [
    (["deblur", "--a", "0.1"], "--image"),
    (["deblur", "--phantom"], "--a"),
    (["svm", "--a", "1"], "--data"),
    (["solve", "--schedule", "variable"], "--config"),
])
def test_missing_input_names_field(argv, flag, capsys):
    with pytest.raises(SystemExit) as info:
        cli.parse_args(argv)
    assert info.value.code == 2
    err = capsys.readouterr().err
    assert "missing required input" in err and flag in err


@pytest.mark.parametrize("argv", [["deblur", "--phantom", "--a", "-1"], ["svm", "--data", "x", "--a", "1", "--iters", "0"],
                                  ["solve", "--schedule", "fast"], ["bogus"]])
def test_invalid_values_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        cli.parse_args(argv)
    assert info.value.code == 2


def test_config_defaults_and_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[deblur]\nnoise_std = 0.01\nlambda = 1e-4\na = 0.1 1\nphantom = yes\n")
    cfg = cli.parse_args(["deblur", "--config", str(ini), "--lambda", "3e-5"])
    assert cfg.noise_std == 0.01 and cfg.lam == 3e-5 and cfg.a == (0.1, 1.0) and cfg.phantom
    ini.write_text("[deblur]\nfoo = 1\n")
    with pytest.raises(SystemExit) as info:
        cli.parse_args(["deblur", "--config", str(ini), "--phantom", "--a", "1"])
    assert info.value.code == 2


def test_out_from_environment(monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, "/tmp/somewhere")
    assert cli.parse_args(["deblur", "--phantom", "--a", "1"]).out == "/tmp/somewhere"


def _read_summary(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_deblur_outputs_and_round_trip(tmp_path):
    out = tmp_path / "run"
    argv = ["deblur", "--phantom", "--a", "0.1", "--iters", "25", "--log-every", "10", "--out", str(out)]
    assert cli.main(argv) == 0
    for name in ("iters.csv", "summary.csv", "restored.pgm", "objective.dat", "isnr.dat"):
        assert (out / name).is_file(), name
    rows = (out / "iters.csv").read_text().splitlines()
    assert len(rows) - 1 == 3
    assert imageio.read_pgm(out / "restored.pgm").shape == (128, 128)
    summary = _read_summary(out / "summary.csv")[0]
    assert float(summary["a"]) == 0.1 and int(summary["iters"]) == 25
    # the recorded flags reproduce the configuration
    cfg = cli.parse_args(shlex.split(summary["flags"]))
    assert cfg == cli.parse_args(argv)
    assert len((out / "objective.dat").read_text().splitlines()) == 3


def test_deblur_sweep_layout(tmp_path):
    assert cli.main(["deblur", "--phantom", "--a", "0.1", "1", "--iters", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "a_1e-01" / "iters.csv").is_file()
    assert (tmp_path / "a_1e+00" / "restored.pgm").is_file()
    assert len(_read_summary(tmp_path / "summary.csv")) == 2


def test_svm_command(tmp_path):
    ds = data.make_blobs(10, 2, 2.0, 0.3, seed=0)
    imageio.write_dataset_csv(tmp_path / "blobs.csv", ds.points, ds.labels)
    argv = ["svm", "--data", str(tmp_path / "blobs.csv"), "--a", "1e-3", "--folds", "4", "--iters", "100",
            "--out", str(tmp_path / "o")]
    assert cli.main(argv) == 0
    row = _read_summary(tmp_path / "o" / "summary.csv")[0]
    assert float(row["cv_error"]) == 0.0
    assert (tmp_path / "o" / "cv_error.dat").read_text().startswith("0.001 0.0")


def test_solve_command(tmp_path):
    ini = tmp_path / "p.ini"
    ini.write_text("[problem]\ndim = 1\nf = zero_prox\nx0 = 2\n\n[term1]\ng = l1\nop = identity\n")
    out = tmp_path / "o"
    argv = ["solve", "--config", str(ini), "--schedule", "variable", "--a", "1", "--b", "1",
            "--iters", "200", "--out", str(out)]
    assert cli.main(argv) == 0
    assert float(_read_summary(out / "summary.csv")[0]["final_objective"]) < 0.05
    assert np.loadtxt(out / "solution.csv", delimiter=",").size == 1


def test_solve_reads_defaults_from_problem_file(tmp_path):
    ini = tmp_path / "p.ini"
    ini.write_text("[solve]\nschedule = accuracy\neps = 0.01\n\n[problem]\ndim = 1\nf = zero\nx0 = 2\n\n"
                   "[term1]\ng = l1\n")
    cfg = cli.parse_args(["solve", "--config", str(ini)])
    assert cfg.schedule == "accuracy" and cfg.eps == 0.01


def test_io_error_exit_1(tmp_path, capsys):
    missing = tmp_path / "nope.pgm"
    assert cli.main(["deblur", "--image", str(missing), "--a", "1", "--out", str(tmp_path)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_runtime_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "small.csv"
    imageio.write_csv_image(bad, np.zeros((10, 10)))
    assert cli.main(["deblur", "--image", str(bad), "--a", "1", "--out", str(tmp_path)]) == 1
    assert "divisible" in capsys.readouterr().err

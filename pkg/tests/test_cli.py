from __future__ import annotations

import json

import numpy as np
import numpy.testing as npt
import pytest

import discfrac.continuous
from discfrac.cli import EXIT_BAND, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, h_sequence, main, read_config


def _csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_h_sequence():
    assert h_sequence("0.2:0.0125") == [0.2, 0.1, 0.05, 0.025, 0.0125]
    assert h_sequence("0.3,0.1") == [0.3, 0.1]


def test_read_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nalpha = 0.25\nmax-error=1e-6  # trailing\n\n")
    assert read_config(str(cfg)) == {"alpha": "0.25", "max_error": "1e-6"}


def test_coeffs_values_and_sidecar(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["coeffs", "--alpha", "0.5", "--M", "4", "--out", str(out)]) == EXIT_OK
    rows = _csv(out)
    npt.assert_array_equal(rows[:, 0], np.arange(5))
    npt.assert_allclose(rows[:, 1], [1, -0.5, -0.125, -0.0625, -0.0390625], rtol=1e-15)
    side = json.loads((tmp_path / "c.csv.config.json").read_text())
    assert side["alpha"] == 0.5 and side["M"] == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--alpha", "1.5"],
        ["coeffs", "--alpha", "0.5", "--M", "0"],
        ["converge", "--f", "nope", "--alpha", "0.5"],
        ["converge", "--f", "abs_sin_0.5", "--alpha", "0.7"],
        ["extension", "--gamma", "1.2"],
        ["harmonic", "--op", "nope"],
    ],
)
def test_validation_exit(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["coeffs"])
    assert exc.value.code == 2


def test_apply_geometric_eigenvalue(tmp_path):
    out = tmp_path / "a.csv"
    argv = ["apply", "--alpha", "0.3", "--f", "geometric", "--r", "0.5", "--window", "0:3", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows = _csv(out)
    npt.assert_allclose(rows[:, 1], 0.5**0.3 * 0.5 ** rows[:, 0], rtol=1e-10)
    assert np.all(rows[:, 2] == 0.0)


@pytest.mark.parametrize("fixture", ["eigen", "random"])
def test_dirichlet(tmp_path, fixture):
    out = tmp_path / "d.csv"
    assert main(["dirichlet", "--alpha", "0.4", "--fixture", fixture, "--out", str(out)]) == EXIT_OK
    assert out.exists()


def test_extension_writes_neumann(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["extension", "--gamma", "0.5", "--f", "geometric", "--out", str(out)]) == EXIT_OK
    records = json.loads((tmp_path / "e.csv.neumann.json").read_text())
    assert max(r["rel_err"] for r in records) <= 1e-3


def test_converge_cos_and_band(tmp_path):
    out = tmp_path / "v.json"
    base = ["converge", "--f", "cos", "--alpha", "0.5", "--h", "0.1:0.0125", "--out", str(out)]
    assert main(base) == EXIT_OK
    rep = json.loads(out.read_text())
    assert abs(rep["slope"] - 1.0) < 0.05
    assert main(base + ["--band", "0.4:0.6"]) == EXIT_BAND


def test_converge_constant_is_degenerate_not_failure(tmp_path):
    out = tmp_path / "v.json"
    assert main(["converge", "--f", "const", "--alpha", "0.5", "--h", "0.1:0.0125", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["degenerate"] is True


def test_numerical_failure_exit(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise discfrac.continuous.QuadratureError("did not converge")

    monkeypatch.setattr(discfrac.continuous, "discretization_sweep", boom)
    argv = ["converge", "--f", "cos", "--alpha", "0.5", "--out", str(tmp_path / "v.json")]
    assert main(argv) == EXIT_NUMERICAL


def test_harmonic_cz(tmp_path):
    out = tmp_path / "h.json"
    assert main(["harmonic", "--op", "cz", "--gamma", "0.5", "--j-range", "16:1024", "--out", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert abs(rep["size_exponent"] + 1) <= 0.15
    assert abs(rep["smoothness_exponent"] + 2) <= 0.2


def test_harmonic_poisson_max(tmp_path):
    out = tmp_path / "h.json"
    argv = ["harmonic", "--op", "poisson_max", "--sizes", "16:64", "--out", str(out)]
    assert main(argv) == EXIT_OK
    assert json.loads(out.read_text())["rel_variation"] < 0.1


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha=0.25\nM=3\n")
    out = tmp_path / "c.csv"
    assert main(["--config", str(cfg), "coeffs", "--out", str(out)]) == EXIT_OK
    npt.assert_allclose(_csv(out)[:, 1], [1, -0.25, -0.09375, -0.0546875], rtol=1e-15)
    assert main(["--config", str(cfg), "coeffs", "--alpha", "0.5", "--out", str(out)]) == EXIT_OK
    npt.assert_allclose(_csv(out)[1, 1], -0.5)


@pytest.mark.parametrize("text", ["bogus=1\n", "M=abc\n", "no equals sign\n"])
def test_config_errors(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["--config", str(cfg), "coeffs", "--alpha", "0.5", "--out", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_config_missing_file(tmp_path):
    assert main(["--config", str(tmp_path / "none.cfg"), "coeffs", "--alpha", "0.5"]) == EXIT_VALIDATION


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["dirichlet", "--alpha", "0.6", "--fixture", "random", "--seed", "7", "--out", str(out)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()

import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from hetcorr.cli import main
from hetcorr.io import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
R_HALF_LN2 = math.log(2) / 2

SMALL = {
    "chain": {"r": R_HALF_LN2, "lo_phase": math.pi / 2},
    "acquisition": {"sample_rate": 1.0e6, "duration": 0.131072, "seed": 7},
    "estimator": {"segment_len": 1024},
    "budget": {"n_cl_snu_hz": 0.125, "bandwidth_hz": 1.0},
    "analytic": {"beta_s": 1.0, "direct": {"s_f": 0.5, "gamma": 1.0}},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def run(mode, cfg_path, out, *extra):
    return main([mode, "--config", str(cfg_path), "--out", str(out), *extra])


def test_simulate_outputs_and_sidecar(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    assert run("simulate", cfg, tmp_path / "o") == 0
    header, data = read_csv(tmp_path / "o" / "spectrum.csv")
    assert header == ["freq_hz", "csd_real_snu", "csd_imag_snu", "sigma_snu"]
    assert data.shape == (513, 4)
    side = json.loads((tmp_path / "o" / "spectrum.json").read_text())
    assert side["seed"] == 7
    assert side["config"]["chain"]["sq"]["r"] == pytest.approx(R_HALF_LN2)
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["predicted_snu"] == pytest.approx(-0.125)
    assert abs(summary["csd_mean_snu"] + 0.125) < 4 * summary["sigma"]


def test_simulate_is_reproducible(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    assert run("simulate", cfg, tmp_path / "a") == 0
    assert run("simulate", cfg, tmp_path / "b", "--emit-plots") == 0
    # plots must not perturb the data files
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() == (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert (tmp_path / "b" / "csd.svg").exists()
    assert not (tmp_path / "a" / "csd.svg").exists()


def test_seed_override_changes_output(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    assert run("simulate", cfg, tmp_path / "a") == 0
    assert run("simulate", cfg, tmp_path / "b", "--seed", "8") == 0
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() != (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert json.loads((tmp_path / "b" / "spectrum.json").read_text())["seed"] == 8


def test_segments_override_recorded(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    assert run("simulate", cfg, tmp_path / "a", "--segments", "8") == 0
    side = json.loads((tmp_path / "a" / "spectrum.json").read_text())
    assert side["config"]["acquisition"]["n_segments"] == 8


def test_trajectories_written(tmp_path):
    cfg = dict(SMALL, output={"write_trajectories": True})
    assert run("simulate", write_cfg(tmp_path, cfg), tmp_path / "o") == 0
    header, data = read_csv(tmp_path / "o" / "trajectories.csv")
    assert header == ["t", "j_a_minus", "j_b_minus"]
    assert data.shape == (131072, 3)


def test_analytic_rows(tmp_path):
    assert run("analytic", write_cfg(tmp_path, SMALL), tmp_path / "o", "--emit-plots") == 0
    with open(tmp_path / "o" / "analytic.csv") as fh:
        rows = dict(line.strip().split(",") for line in fh.readlines()[1:])
    assert float(rows["csd_narrowband"]) == pytest.approx(-0.125)
    assert float(rows["direct_csd"]) == pytest.approx(-0.25)
    assert float(rows["r_star"]) == pytest.approx(R_HALF_LN2)
    assert (tmp_path / "o" / "full_band.svg").exists()


def test_analytic_coherent_row_is_zero(tmp_path):
    cfg = dict(SMALL, chain={"r": 0.0})
    assert run("analytic", write_cfg(tmp_path, cfg), tmp_path / "o") == 0
    with open(tmp_path / "o" / "analytic.csv") as fh:
        rows = dict(line.strip().split(",") for line in fh.readlines()[1:])
    assert float(rows["csd_narrowband"]) == 0.0


def test_sweep_argmin(tmp_path):
    assert run("sweep", CONFIGS / "optimize.json", tmp_path / "o", "--emit-plots") == 0
    summary = json.loads((tmp_path / "o" / "sweep.json").read_text())
    assert summary["argmin_r"] == pytest.approx(0.35)
    assert summary["r_star"] == pytest.approx(R_HALF_LN2)
    header, data = read_csv(tmp_path / "o" / "sweep.csv")
    assert header == ["r", "total_noise_snu_hz"]
    assert data.shape == (101, 2)
    assert (tmp_path / "o" / "sweep.svg").exists()


def test_sweep_monte_carlo(tmp_path):
    cfg = dict(SMALL, sweep={"r_min": 0.0, "r_max": 0.6, "r_step": 0.1, "monte_carlo": True})
    assert run("sweep", write_cfg(tmp_path, cfg), tmp_path / "o") == 0
    header, data = read_csv(tmp_path / "o" / "sweep_mc.csv")
    assert header == ["r", "total_noise_snu_hz", "sigma_snu_hz"]
    assert data.shape == (7, 3)


def test_optimize_scalar(tmp_path):
    assert run("optimize", CONFIGS / "optimize.json", tmp_path / "o") == 0
    summary = json.loads((tmp_path / "o" / "optimize.json").read_text())
    assert summary["feasible"] is True
    assert summary["r_star"] == pytest.approx(0.34657, abs=1e-5)
    assert abs(summary["residual"]) < 1e-12


def test_optimize_infeasible_reports(tmp_path):
    cfg = {"budget": {"n_cl_snu_hz": 0.25, "bandwidth_hz": 1.0}}
    assert run("optimize", write_cfg(tmp_path, cfg), tmp_path / "o") == 0
    summary = json.loads((tmp_path / "o" / "optimize.json").read_text())
    assert summary["feasible"] is False
    assert summary["r_star"] is None


def test_optimize_table(tmp_path):
    assert run("optimize", CONFIGS / "noise_table.json", tmp_path / "o") == 0
    header, data = read_csv(tmp_path / "o" / "optimize.csv")
    assert header == ["freq_hz", "n_cl_snu_hz", "feasible", "r_star"]
    assert list(data[:, 2]) == [1, 1, 1, 0]
    assert math.isnan(data[-1, 3])


def test_config_errors_exit_2(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert run("simulate", write_cfg(tmp_path, {"chain": {"bogus": 1}}), tmp_path / "o") == 2
    assert run("simulate", write_cfg(tmp_path, {"chain": {"r": -1.0}}), tmp_path / "o") == 2
    assert run("optimize", write_cfg(tmp_path, {}), tmp_path / "o") == 2
    assert run("validate", write_cfg(tmp_path, {}), tmp_path / "o") == 2
    assert main(["nonsense", "--config", "x"]) == 2
    assert main(["simulate"]) == 2


def test_validate_tolerance_override_zero_fails(tmp_path, capsys):
    cfg = dict(SMALL, validate={"tolerance_override": 0.0}, sweep={"r_min": 0.0, "r_max": 0.4, "r_step": 0.2})
    assert run("validate", write_cfg(tmp_path, cfg), tmp_path / "o") == 1
    report = json.loads((tmp_path / "o" / "validation.json").read_text())
    assert report["passed"] is False
    assert "FAIL" in capsys.readouterr().out


def test_entry_point_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hetcorr.cli", "optimize", "--config", str(CONFIGS / "optimize.json"),
         "--out", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "total_noise.csv").exists()


@pytest.mark.slow
def test_validate_reference_config_passes(tmp_path, capsys):
    assert run("validate", CONFIGS / "validate.json", tmp_path / "o") == 0
    out = capsys.readouterr().out
    assert "overall: PASS" in out


def test_coherent_predicted_zero(tmp_path):
    cfg = dict(SMALL, chain={"r": 0.0})
    assert run("simulate", write_cfg(tmp_path, cfg), tmp_path / "o") == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["predicted_snu"] == 0.0
    assert abs(summary["csd_mean_snu"]) < 3 * summary["sigma"]

import json

import numpy as np
import pytest

from so4body import cli, spectral
from so4body.dynamics import TRAJECTORY_HEADER

LAM_ARGS = ["--lam", "4,3,2,1"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# Documented output schemas, pinned golden-file style.
CLASSIFY_KEYS = {"command", "lam", "orbit", "a", "b", "alpha1", "alpha2", "equilibria"}
CLASSIFY_POINT_KEYS = {"family", "a", "b", "state", "degenerate_orbit_pattern",
                       "verdict", "eigenstructure", "eigenvalues", "note"}
CERTIFY_KEYS = {"command", "lam", "orbit", "a", "b", "alpha1", "alpha2", "certificates"}
SWEEP_HEADER = "r,boundary,verdict,eigenstructure,max_re_numeric,certificate,p"


class TestClassify:
    def test_document_schema_and_verdicts(self, capsys):
        code, out, _ = run(capsys, "classify", *LAM_ARGS, "--orbit", "5,3")
        assert code == 0
        doc = json.loads(out)
        assert set(doc) == CLASSIFY_KEYS
        assert doc["a"] == pytest.approx(3.0)
        assert doc["b"] == pytest.approx(1.0)
        assert len(doc["equilibria"]) == 12
        by_kind = {}
        for rec in doc["equilibria"]:
            assert set(rec) >= CLASSIFY_POINT_KEYS
            assert len(rec["eigenvalues"]) == 4
            major = abs(rec["a"]) > abs(rec["b"])
            by_kind.setdefault((rec["family"], major), []).append(rec)
        for rec in by_kind[("t2", True)] + by_kind[("t2", False)]:
            assert rec["eigenstructure"] == spectral.CENTER_SADDLE
            assert rec["verdict"] == spectral.SPECTRALLY_UNSTABLE
        for rec in by_kind[("t1", True)] + by_kind[("t3", True)] + by_kind[("t3", False)]:
            assert rec["eigenstructure"] == spectral.CENTER_CENTER
            assert rec["verdict"] == spectral.SPECTRALLY_STABLE
        for rec in by_kind[("t1", False)]:  # r = 1/9 below the first threshold
            assert rec["eigenstructure"] == spectral.SADDLE_SADDLE
            assert rec["verdict"] == spectral.SPECTRALLY_UNSTABLE
            assert rec["r"] == pytest.approx(1 / 9)

    def test_ab_and_r_parameterizations(self, capsys):
        code, out, _ = run(capsys, "classify", *LAM_ARGS, "--ab", "3,1")
        assert code == 0
        assert json.loads(out)["orbit"] == {"c1": 5.0, "c2": 3.0}
        code, out, _ = run(capsys, "classify", *LAM_ARGS, "--r", "0.25")
        assert code == 0
        doc = json.loads(out)
        assert doc["a"] == pytest.approx(1.0)
        assert doc["b"] == pytest.approx(0.5)

    def test_exactly_one_parameterization(self, capsys):
        code, _, err = run(capsys, "classify", *LAM_ARGS)
        assert code == 1
        code, _, err = run(capsys, "classify", *LAM_ARGS, "--orbit", "5,3", "--r", "0.5")
        assert code == 1

    def test_degenerate_orbit_rejected(self, capsys):
        code, _, err = run(capsys, "classify", *LAM_ARGS, "--orbit", "5,5")
        assert code == 1
        assert "regular" in err

    def test_unordered_moments_rejected(self, capsys):
        code, _, err = run(capsys, "classify", "--lam", "1,2,3,4", "--orbit", "5,3")
        assert code == 1
        assert "lambda" in err


class TestCertify:
    def test_document_schema_and_bases(self, capsys):
        code, out, _ = run(capsys, "certify", *LAM_ARGS, "--orbit", "5,3")
        assert code == 0
        doc = json.loads(out)
        assert set(doc) == CERTIFY_KEYS
        recs = doc["certificates"]
        assert len(recs) == 12
        bases = {(r["family"], abs(r["a"]) > abs(r["b"])): r.get("base") for r in recs}
        assert bases[("t1", True)] == "G3"
        assert bases[("t3", True)] == "G1"
        assert bases[("t3", False)] == "G4"
        for r in recs:
            if r["family"] == "t2":
                assert r["verdict"] == "unstable"
                assert r["max_real_part"] > 0
            if r.get("base") == "G3":
                assert r["definiteness"] == "positive-definite"
                assert len(r["minors"]) == 4
                assert len(r["hessian_eigenvalues"]) == 4

    def test_stable_bifurcation_orbit(self, capsys):
        code, out, _ = run(capsys, "certify", *LAM_ARGS, "--r", "0.95")
        assert code == 0
        doc = json.loads(out)
        minor = [r for r in doc["certificates"]
                 if r["family"] == "t1" and abs(r["a"]) < abs(r["b"])]
        assert len(minor) == 2
        for r in minor:
            assert r["verdict"] == "nonlinearly-stable"
            assert r["base"] == "H+pI"
            assert r["p_window"][0] < r["p"] < r["p_window"][1]

    def test_threshold_orbit_undecidable(self, capsys):
        alpha2 = spectral.f_tilde(spectral.InertiaSpectrum(4, 3, 2, 1)).alpha2
        code, out, _ = run(capsys, "certify", *LAM_ARGS, "--r", repr(alpha2))
        assert code == 0
        doc = json.loads(out)
        minor = [r for r in doc["certificates"]
                 if r["family"] == "t1" and abs(r["a"]) < abs(r["b"])]
        for r in minor:
            assert r["verdict"] == "undecidable"
            assert "H, I, C1, C2" in r["note"]


class TestSweep:
    def test_header_boundaries_and_flip(self, capsys):
        code, out, _ = run(capsys, "sweep", *LAM_ARGS, "--steps", "101")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == SWEEP_HEADER
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 103  # grid plus the two threshold rows
        tags = [r[1] for r in rows]
        assert tags.count("alpha1") == 1
        assert tags.count("alpha2") == 1
        ft = spectral.f_tilde(spectral.InertiaSpectrum(4, 3, 2, 1))
        verdicts = [(float(r[0]), r[2]) for r in rows]
        for r_val, verdict in verdicts:
            expected = ("spectrally-unstable" if r_val < ft.alpha2 - 1e-12
                        else "spectrally-stable")
            assert verdict == expected
        # numeric max real part crosses zero exactly at the stability threshold
        for r_val, max_re in ((float(r[0]), float(r[4])) for r in rows):
            if r_val < ft.alpha2 - 1e-9:
                assert max_re > 1e-8
            else:
                assert max_re <= 1e-6

    def test_certificate_column(self, capsys):
        code, out, _ = run(capsys, "sweep", *LAM_ARGS, "--r-min", "0.93",
                           "--r-max", "0.99", "--steps", "4")
        assert code == 0
        rows = [line.split(",") for line in out.strip().split("\n")[1:]]
        for row in rows:
            assert row[5] == "positive-definite"
            assert row[6] != ""

    def test_empty_or_bad_grid_rejected(self, capsys):
        assert run(capsys, "sweep", *LAM_ARGS, "--steps", "0")[0] == 1
        assert run(capsys, "sweep", *LAM_ARGS, "--r-min", "0.9", "--r-max", "0.5")[0] == 1
        assert run(capsys, "sweep", *LAM_ARGS, "--r-max", "1.5")[0] == 1


class TestSimulate:
    def test_writes_csv_and_summary(self, capsys, tmp_path):
        out_file = tmp_path / "traj.csv"
        code, out, _ = run(capsys, "simulate", *LAM_ARGS,
                           "--state", "1,1,1,1,1,1", "--step", "0.01",
                           "--horizon", "2", "--out", str(out_file))
        assert code == 0
        summary = json.loads(out)
        assert summary["command"] == "simulate"
        assert set(summary["drift"]) == {"H", "C1", "C2", "I"}
        assert all(v < 1e-10 for v in summary["drift"].values())
        lines = out_file.read_text().strip().split("\n")
        assert lines[0] == ",".join(TRAJECTORY_HEADER)
        assert len(lines) == 1 + summary["samples"]

    def test_equilibrium_trajectory_constant(self, capsys, tmp_path):
        out_file = tmp_path / "eq.csv"
        code, out, _ = run(capsys, "simulate", *LAM_ARGS, "--state", "3,0,0,1,0,0",
                           "--step", "0.01", "--horizon", "1", "--out", str(out_file))
        assert code == 0
        rows = out_file.read_text().strip().split("\n")[1:]
        first = rows[0].split(",")[1:7]
        for row in rows:
            assert row.split(",")[1:7] == first

    def test_bad_step_rejected(self, capsys):
        code, _, err = run(capsys, "simulate", *LAM_ARGS,
                           "--state", "1,1,1,1,1,1", "--step", "0")
        assert code == 1

    def test_missing_state_rejected(self, capsys):
        assert run(capsys, "simulate", *LAM_ARGS)[0] == 1

    def test_out_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("SO4BODY_OUT_DIR", str(tmp_path))
        code, out, _ = run(capsys, "simulate", *LAM_ARGS, "--state", "1,1,1,1,1,1",
                           "--step", "0.01", "--horizon", "1", "--out", "traj.csv")
        assert code == 0
        assert (tmp_path / "traj.csv").exists()


class TestVerify:
    def test_default_passes(self, capsys):
        code, out, _ = run(capsys, "verify", *LAM_ARGS)
        assert code == 0
        assert out.count("PASS") == 5
        assert "FAIL" not in out

    def test_injected_defect_caught(self, capsys):
        code, out, _ = run(capsys, "verify", *LAM_ARGS, "--inject-defect")
        assert code == 2
        assert "FAIL decomposition" in out

    def test_custom_spectrum(self, capsys):
        code, out, _ = run(capsys, "verify", "--lam", "6,3,2,1")
        assert code == 0
        assert "lam=6,3,2,1" in out


class TestConfigFile:
    def test_config_supplies_options(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lam = 4,3,2,1\norbit = 5,3  # reference orbit\n")
        code, out, _ = run(capsys, "classify", "--config", str(cfg))
        assert code == 0
        assert json.loads(out)["a"] == pytest.approx(3.0)

    def test_flags_win_over_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lam = 4,3,2,1\nr = 0.25\n")
        code, out, _ = run(capsys, "classify", "--config", str(cfg), "--r", "0.5")
        assert code == 0
        assert json.loads(out)["b"] == pytest.approx(np.sqrt(0.5))

    def test_malformed_config_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("lam 4,3,2,1\n")
        assert run(capsys, "classify", "--config", str(cfg))[0] == 1

    def test_missing_config_rejected(self, capsys, tmp_path):
        assert run(capsys, "classify", "--config", str(tmp_path / "none.cfg"))[0] == 1


class TestParsing:
    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == 1

    def test_bad_lam_count(self, capsys):
        assert run(capsys, "classify", "--lam", "4,3,2", "--orbit", "5,3")[0] == 1

    def test_bad_float(self, capsys):
        assert run(capsys, "classify", "--lam", "a,b,c,d", "--orbit", "5,3")[0] == 1

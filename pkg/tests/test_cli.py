import hashlib
import json

import numpy as np
import pytest

from wigner_parity.cli import main, refine_study
from wigner_parity.config import PRESETS, ConfigError, load_config, parse_config
from wigner_parity.grid import read_field

SMALL = """\
[potential]
family = {family}

[domain]
l = 10.0
M = {M}

[velocity]
K = {K}
dv = {dv}

[moments]
N = 4

[boundary]
preset = {boundary}

[run]
mode = {mode}
seed = 0
output_dir = {out}
"""


def write_cfg(tmp_path, name="run.ini", family="gaussian", M=40, K=16, dv=0.5,
              boundary="left-maxwellian", mode="general", out="out"):
    p = tmp_path / name
    p.write_text(SMALL.format(family=family, M=M, K=K, dv=dv, boundary=boundary, mode=mode, out=out))
    return p


@pytest.fixture
def out_root(tmp_path, monkeypatch):
    root = tmp_path / "root"
    monkeypatch.setenv("WIGNER_PARITY_OUTPUT_ROOT", str(root))
    return root


class TestPresets:
    def test_list(self, capsys):
        assert main(["presets", "list"]) == 0
        names = capsys.readouterr().out.split()
        assert {"free-stream", "gaussian-barrier", "gaussian-barrier-compare"} <= set(names)

    def test_show(self, capsys):
        assert main(["presets", "show", "gaussian-barrier"]) == 0
        assert "family = gaussian" in capsys.readouterr().out

    def test_show_unknown(self, capsys):
        assert main(["presets", "show", "nope"]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_validate(self, name):
        load_config(name).validate()


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        assert main(["validate", str(write_cfg(tmp_path))]) == 0
        assert json.loads(capsys.readouterr().out)["valid"] is True

    def test_zero_K(self, tmp_path, capsys):
        code = main(["validate", str(write_cfg(tmp_path, K=0))])
        err = json.loads(capsys.readouterr().err)
        assert code == 2
        assert err["field"] == "velocity.K"
        assert "K" in err["message"]

    def test_zero_K_on_run(self, tmp_path, out_root, capsys):
        assert main(["run", str(write_cfg(tmp_path, K=0))]) == 2
        assert json.loads(capsys.readouterr().err)["field"] == "velocity.K"

    def test_missing_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "missing.ini")]) == 2

    @pytest.mark.parametrize("text,field", [
        ("[run]\nmode = fast\n", "run.mode"),
        ("[domain]\nM = -3\n", "domain.M"),
        ("[velocity]\ndv = 0\n", "velocity.dv"),
        ("[boundary]\npreset = sideways\n", "boundary.preset"),
        ("[boundary]\nf_L = nothere.csv\n", "boundary.f_L"),
        ("[potential]\nfamily = square\n", "field"),
    ])
    def test_field_named(self, text, field):
        with pytest.raises(ConfigError) as info:
            parse_config(text).validate()
        if field != "field":
            assert info.value.to_dict()["field"] == field

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            parse_config("[extras]\na = 1\n")


class TestRun:
    def test_free_stream_preset(self, out_root, capsys):
        assert main(["run", "free-stream"]) == 0
        out = out_root / "out" / "free-stream"
        cfg = load_config("free-stream")
        vg, _ = cfg.grids()
        bd = cfg.boundary_data(vg)
        xs, F = read_field(out / "field.csv")
        assert np.max(np.abs(F - np.concatenate([bd.f_R, bd.f_L]))) <= 1e-12
        diag = json.loads((out / "diagnostics.json").read_text())
        res = diag["residuals"]
        assert res["inflow"]["left"] <= 1e-15 and res["inflow"]["right"] <= 1e-15
        assert res["current_drift"] <= 1e-15 and res["orthogonality"]["max"] == 0
        assert diag["condition_number"] == 1.0

    def test_gaussian_barrier_preset(self, out_root):
        assert main(["run", "gaussian-barrier"]) == 0
        out = out_root / "out" / "gaussian-barrier"
        for name in ("field.csv", "moments.csv", "diagnostics.json", "manifest.json",
                     "R_lr.csv", "R_lr.json", "Q_rl.csv", "Q_rl.json", "Q_moment.csv", "Q_moment.json"):
            assert (out / name).is_file(), name
        diag = json.loads((out / "diagnostics.json").read_text())
        assert diag["condition_number"] >= 1.0
        assert diag["inflow_within_tolerance"] is True
        assert len(diag["operator_bound"]) == 5 and all(r["pass"] for r in diag["operator_bound"])
        assert diag["sign_convention"]["consistent_sign"] == "+B"
        assert diag["warnings"] == []
        header = (out / "moments.csv").read_text().splitlines()[0]
        assert header == "x,J1,J3,J5,J7,J9,J11,J13,J15"

    def test_manifest_reruns(self, out_root, tmp_path):
        cfg_path = write_cfg(tmp_path)
        assert main(["run", str(cfg_path)]) == 0
        out = out_root / "out"
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["versions"]["wigner_parity"]
        for name, digest in manifest["files"].items():
            assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
        again = tmp_path / "again.ini"
        again.write_text(manifest["config_ini"])
        first = (out / "field.csv").read_bytes()
        assert main(["run", str(again)]) == 0
        assert (out / "field.csv").read_bytes() == first

    @pytest.mark.parametrize("mode", ["oracle", "symmetric_shortcut", "compare"])
    def test_modes(self, out_root, tmp_path, mode):
        assert main(["run", str(write_cfg(tmp_path, mode=mode, out=mode))]) == 0
        out = out_root / mode
        assert (out / "field.csv").is_file()
        if mode == "compare":
            rep = json.loads((out / "comparison.json").read_text())
            assert 0 <= rep["global_relative_l2"] < 1

    def test_truncation_warning(self, out_root, tmp_path):
        assert main(["run", str(write_cfg(tmp_path, K=6, dv=0.5))]) == 0
        diag = json.loads((out_root / "out" / "diagnostics.json").read_text())
        assert diag["truncation"]["data_at_vmax"] > 1e-12
        assert diag["warnings"]

    def test_numerical_failure_exit_code(self, out_root, tmp_path, capsys):
        p = tmp_path / "huge.ini"
        p.write_text(SMALL.format(family="gaussian", M=10, K=8, dv=0.1, boundary="left-maxwellian",
                                  mode="general", out="huge").replace("family = gaussian",
                                                                      "family = gaussian\namplitude = 1e150"))
        with np.errstate(all="ignore"):
            code = main(["run", str(p)])
        assert code == 3
        assert json.loads(capsys.readouterr().err)["error"] == "DivergenceError"


class TestRefine:
    def test_levels_must_be_two(self, tmp_path, out_root, capsys):
        assert main(["refine", str(write_cfg(tmp_path)), "--levels", "1"]) == 2
        assert json.loads(capsys.readouterr().err)["field"] == "levels"

    def test_zero_potential(self, tmp_path, out_root):
        cfg = load_config(write_cfg(tmp_path, family="zero", M=10, K=8, dv=0.6,
                                    boundary="two-sided-maxwellian"))
        rep = refine_study(cfg, 3)
        for name in ("parity", "oracle"):
            assert max(rep[name]["pairwise_relative_l2"]) <= 1e-12
        assert (out_root / "out" / "refinement.json").is_file()

    @pytest.mark.slow
    def test_gaussian_barrier_orders(self, out_root):
        rep = refine_study(load_config("gaussian-barrier"), 3)
        assert rep["parity"]["observed_orders"][-1] >= 2
        assert rep["oracle"]["observed_orders"][-1] == pytest.approx(1.0, abs=0.3)

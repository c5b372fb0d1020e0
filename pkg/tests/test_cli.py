import json
import math

import numpy as np
import pytest

import splitwave as sw
from splitwave.cli import main, read_snapshot
from splitwave.config import loads_config, parse_number
from splitwave.errors import ConfigError

CASE1_SIM = """
[problem]
kind = linear
eps = 1.0
domain = 0, 1
n = 128
potential = 5cos2pix
initial = poly-bump

[scheme]
order = 2

[stepping]
tau = 0.001

[run]
n_steps = 10

[output]
directory = {out}
"""

CASE2_EPS = """
[problem]
kind = linear
eps = 1.0
domain = 0, 2pi
n = 64
potential = sinx
initial = inv-sin2

[scheme]
order = 2

[stepping]
tau = 0.01

[output]
directory = {out}

[experiment]
kind = eps-scaling
eps_list = 0.5, 0.25
horizon_power = 1
horizon_t = 0.5
tau_e = 0.001
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text.format(out=tmp_path / "out"))
    return str(path)


class TestConfigParsing:
    def test_parse_number_pi_tokens(self):
        assert parse_number("2pi") == pytest.approx(2 * math.pi)
        assert parse_number("pi") == pytest.approx(math.pi)
        assert parse_number("0.5pi") == pytest.approx(math.pi / 2)
        assert parse_number("1e-4") == 1e-4
        with pytest.raises(ConfigError):
            parse_number("two")

    def test_unknown_key_is_hard_error(self):
        with pytest.raises(ConfigError, match="unknown key"):
            loads_config("[problem]\nkindd = linear\n")

    def test_unknown_section_is_hard_error(self):
        with pytest.raises(ConfigError, match="unknown section"):
            loads_config("[problems]\nkind = linear\n")

    def test_run_needs_exactly_one_of(self):
        cfg = loads_config("[run]\nn_steps = 5\nt_end = 1.0\n[stepping]\ntau = 0.1\n")
        with pytest.raises(ConfigError):
            cfg.build_steps(0.1)

    def test_linear_rejects_nl_keys(self):
        cfg = loads_config(
            "[problem]\nkind = linear\neps = 1.0\ndomain = 0, 1\nn = 8\n"
            "potential = zero\ninitial = poly-bump\nnl_sign = +1\n"
        )
        with pytest.raises(ConfigError):
            cfg.build_problem()

    def test_invalid_eps_is_config_error(self):
        cfg = loads_config(
            "[problem]\nkind = linear\neps = 1.5\ndomain = 0, 1\nn = 8\n"
            "potential = zero\ninitial = poly-bump\n"
        )
        with pytest.raises(ConfigError):
            cfg.build_problem()

    def test_nonpositive_tau_is_config_error(self):
        cfg = loads_config("[stepping]\ntau = 0\n")
        with pytest.raises(ConfigError):
            cfg.build_tau()

    def test_build_2d_problem(self):
        cfg = loads_config(
            "[problem]\nkind = nlse\neps = 0.5\ndomain = 0, pi; 0, 1\nn = 16, 8\n"
            "initial = inv-sin2-2d\nnl_sign = +1\n"
        )
        prob = cfg.build_problem()
        assert prob.grid.shape == (16, 8)
        assert prob.nonlinearity.sign == 1


class TestSimulate:
    def test_simulate_and_manifest(self, tmp_path):
        cfg = write_cfg(tmp_path, CASE1_SIM)
        assert main(["simulate", "--config", cfg]) == 0
        outdir = tmp_path / "out"
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["derived"]["h"] == [1.0 / 128]
        assert manifest["config"]["problem"]["potential"] == "5cos2pix"
        assert len(manifest["outputs"]) == 1
        field, header = read_snapshot(outdir / "snapshot_0000.bin")
        assert header["time"] == pytest.approx(0.01)
        assert field.grid.shape == (128,)

    def test_stride_snapshots(self, tmp_path):
        text = CASE1_SIM.replace("[output]", "[output]\nstride = 5")
        cfg = write_cfg(tmp_path, text)
        assert main(["simulate", "--config", cfg]) == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        # steps 0, 5, 10 of a 10-step run
        assert len(manifest["outputs"]) == 3

    def test_zero_steps_snapshot_is_initial(self, tmp_path):
        text = CASE1_SIM.replace("n_steps = 10", "n_steps = 0")
        cfg = write_cfg(tmp_path, text)
        assert main(["simulate", "--config", cfg]) == 0
        field, header = read_snapshot(tmp_path / "out" / "snapshot_0000.bin")
        x = field.grid.nodes_1d[0]
        assert np.abs(field.values - 5 * x ** 2 * (1 - x) ** 2).max() < 1e-15

    def test_resonant_tau_under_rule_exits_3(self, tmp_path):
        # tau = 2 pi / mu1^2 with mu1 = 2 pi on [0, 1]: exact resonance
        text = CASE1_SIM.replace(
            "tau = 0.001", f"tau = {2 * math.pi / (2 * math.pi) ** 2!r}"
        )
        text = text.replace("[run]", "rule = diophantine\n\n[run]")
        cfg = write_cfg(tmp_path, text)
        assert main(["simulate", "--config", cfg]) == 3

    def test_bad_config_exits_2(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[problem]\nmystery = 1\n")
        assert main(["simulate", "--config", str(path)]) == 2

    def test_diophantine_rule_rejected_in_2d(self, tmp_path):
        text = """
[problem]
kind = nlse
eps = 0.5
domain = 0, pi; 0, 1
n = 8, 8
initial = inv-sin2-2d

[stepping]
tau = 0.001
rule = diophantine

[run]
n_steps = 1

[output]
directory = {out}
"""
        cfg = write_cfg(tmp_path, text)
        assert main(["simulate", "--config", cfg]) == 2

    def test_2d_small_step_gate_uses_combined_frequency(self, tmp_path):
        # on (0, pi) x (0, 1) the combined mu1^2 is 4 + 4 pi^2, so the
        # small-step bound sits near 8e-3 and tau = 0.01 must be refused
        text = """
[problem]
kind = nlse
eps = 0.5
domain = 0, pi; 0, 1
n = 8, 8
initial = inv-sin2-2d

[stepping]
tau = 0.01
rule = small-step

[run]
n_steps = 1

[output]
directory = {out}
"""
        cfg = write_cfg(tmp_path, text)
        assert main(["simulate", "--config", cfg]) == 3
        ok = text.replace("tau = 0.01", "tau = 0.001")
        cfg2 = write_cfg(tmp_path, ok, name="ok.cfg")
        assert main(["simulate", "--config", cfg2]) == 0

    def test_misaligned_snapshot_time_exits_2(self, tmp_path):
        text = CASE1_SIM.replace(
            "[output]", "[output]\nsnapshot_times = 0.0015"
        )
        cfg = write_cfg(tmp_path, text)
        assert main(["simulate", "--config", cfg]) == 2

    def test_snapshot_roundtrip_binary_layout(self, tmp_path):
        cfg = write_cfg(tmp_path, CASE1_SIM)
        main(["simulate", "--config", cfg])
        path = tmp_path / "out" / "snapshot_0000.bin"
        raw = path.read_bytes()
        header_line, _, body = raw.partition(b"\n")
        header = json.loads(header_line)
        assert header["dtype"] == "<c16"
        vals = np.frombuffer(body, dtype="<c16")
        assert vals.shape == (128,)
        field, _ = read_snapshot(path)
        assert np.array_equal(field.values, vals)


class TestExperiment:
    def test_eps_scaling_csv(self, tmp_path):
        cfg = write_cfg(tmp_path, CASE2_EPS)
        assert main(["experiment", "--config", cfg]) == 0
        outdir = tmp_path / "out"
        lines = (outdir / "eps-scaling.csv").read_text().splitlines()
        assert lines[0] == "eps,t_final,eH1,ratio"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "0.5"
        assert first[3] == ""  # ratio populated from row 2
        second = lines[2].split(",")
        assert float(second[3]) > 0
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["outputs"][0]["rows"] == 2
        assert manifest["outputs"][0]["file"] == "eps-scaling.csv"

    def test_csv_bodies_reproducible(self, tmp_path):
        cfg = write_cfg(tmp_path, CASE2_EPS)
        main(["experiment", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["experiment", "--config", cfg, "--out", str(tmp_path / "b")])
        a = (tmp_path / "a" / "eps-scaling.csv").read_bytes()
        b = (tmp_path / "b" / "eps-scaling.csv").read_bytes()
        assert a == b

    def test_manifest_admissibility_matches_module(self, tmp_path):
        cfg = write_cfg(tmp_path, CASE2_EPS)
        main(["experiment", "--config", cfg])
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        adm = manifest["derived"]["admissibility"]
        assert adm["small_step"] == sw.check_small_step(0.01, 0.5, 0.5, 1.0, "linear")
        assert adm["diophantine"] == sw.StepRule("diophantine").check(0.01, 1.0)

    def test_empty_parameter_list_exits_2(self, tmp_path):
        text = CASE2_EPS.replace("eps_list = 0.5, 0.25", "eps_list =")
        cfg = write_cfg(tmp_path, text)
        assert main(["experiment", "--config", cfg]) == 2

    def test_converge_time_csv_feeds_fit(self, tmp_path):
        text = CASE2_EPS.replace(
            "kind = eps-scaling",
            "kind = converge-time",
        ).replace(
            "eps_list = 0.5, 0.25",
            "taus = 0.05, 0.025, 0.0125\nt_eval = 0.5",
        )
        cfg = write_cfg(tmp_path, text)
        assert main(["experiment", "--config", cfg]) == 0
        lines = (tmp_path / "out" / "converge-time.csv").read_text().splitlines()
        assert lines[0] == "param,eL2,eH1"
        pts = [(float(r.split(",")[0]), float(r.split(",")[2])) for r in lines[1:]]
        fit = sw.fit_slope(pts)
        assert 1.9 <= fit.slope <= 2.1

    def test_err_growth_csv(self, tmp_path):
        text = CASE2_EPS.replace(
            "kind = eps-scaling",
            "kind = err-growth",
        ).replace(
            "eps_list = 0.5, 0.25",
            "taus = 0.04, 0.02\nt_end = 2.0\nstride = 5\ntau_e = 0.002",
        ).replace("tau_e = 0.001\n", "")
        cfg = write_cfg(tmp_path, text)
        assert main(["experiment", "--config", cfg]) == 0
        lines = (tmp_path / "out" / "err-growth.csv").read_text().splitlines()
        assert lines[0] == "tau,t,eL2,eH1,eL2max,eH1max"
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["outputs"][0]["rows"] == len(lines) - 1

    def test_twist_csv(self, tmp_path):
        text = CASE2_EPS.replace(
            "kind = eps-scaling",
            "kind = twist",
        ).replace(
            "eps_list = 0.5, 0.25",
            "eps_list = 0.5, 0.25\nt_end = 0.2",
        )
        cfg = write_cfg(tmp_path, text)
        assert main(["experiment", "--config", cfg]) == 0
        lines = (tmp_path / "out" / "twist.csv").read_text().splitlines()
        assert lines[0] == "eps,diagnostic"
        assert len(lines) == 3

    def test_converge_space_csv(self, tmp_path):
        text = CASE2_EPS.replace(
            "kind = eps-scaling",
            "kind = converge-space",
        ).replace(
            "eps_list = 0.5, 0.25",
            "ns = 8, 16, 32\nt_eval = 0.1\nn_e = 64\ntau_e = 0.01",
        ).replace("tau_e = 0.001\n", "")
        cfg = write_cfg(tmp_path, text)
        assert main(["experiment", "--config", cfg]) == 0
        lines = (tmp_path / "out" / "converge-space.csv").read_text().splitlines()
        assert lines[0] == "param,eL2,eH1"
        assert len(lines) == 4
        assert float(lines[1].split(",")[2]) > float(lines[2].split(",")[2])

    def test_threads_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SPLITWAVE_THREADS", "2")
        cfg = write_cfg(tmp_path, CASE2_EPS)
        assert main(["experiment", "--config", cfg]) == 0

    def test_local_probe_csv(self, tmp_path):
        text = """
[problem]
kind = linear
eps = 1.0
domain = 0, 2pi
n = 8
potential = sinx
initial = inv-sin2

[output]
directory = {out}

[experiment]
kind = local-probe
taus = 0.04, 0.02, 0.01
"""
        cfg = write_cfg(tmp_path, text)
        assert main(["experiment", "--config", cfg]) == 0
        lines = (tmp_path / "out" / "local-probe.csv").read_text().splitlines()
        assert lines[0] == "tau,onestep_err,F_norm,ratio"
        assert len(lines) == 4


class TestReference:
    def test_reference_snapshots(self, tmp_path):
        text = """
[problem]
kind = linear
eps = 1.0
domain = 0, 2pi
n = 32
potential = sinx
initial = inv-sin2

[scheme]
order = 2

[output]
directory = {out}

[reference]
tau_e = 0.001
n_e = 64
snapshot_times = 0.0, 0.01
"""
        cfg = write_cfg(tmp_path, text)
        assert main(["reference", "--config", cfg]) == 0
        field, header = read_snapshot(tmp_path / "out" / "reference_0000.bin")
        assert header["time"] == 0.0
        assert field.grid.shape == (64,)


class TestCheckStep:
    def test_admissible_default(self, capsys):
        assert main(["check-step", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "small-step: admissible" in out
        assert "K_max = 4" in out

    def test_resonant_exits_1(self, capsys):
        assert main(["check-step", str(2 * math.pi)]) == 1
        out = capsys.readouterr().out
        assert "diophantine: not admissible" in out
        assert "min gap" in out

    def test_suggest_flag(self, capsys):
        assert main(["check-step", str(2 * math.pi), "--suggest"]) == 1
        out = capsys.readouterr().out
        assert "suggested admissible tau:" in out
        suggested = float(out.split("suggested admissible tau:")[1].splitlines()[0])
        assert sw.StepRule("diophantine").check(suggested, 1.0)

    def test_bad_flags_exit_2(self):
        assert main(["check-step", "0.1", "--equation", "heat"]) == 2
        assert main(["check-step", "-0.1"]) == 2

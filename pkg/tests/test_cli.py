import json
import math
import os
import subprocess
import sys

import pytest
import yaml

from jcsim import __version__
from jcsim.cli import main
from jcsim.config import load_config, parse_config
from jcsim.errors import ConfigError
from jcsim.model import SystemParams, single_photon_resonances


def _write(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data) if isinstance(data, dict) else data)
    return path


class TestConfig:
    def test_minimal_defaults(self):
        cfg = parse_config({"g": 2, "gamma0": 0.2, "omega0": "E1+"})
        assert cfg.system.delta_a == 0.0
        assert cfg.grid_obj.n == 100
        assert cfg.grid_obj.span == pytest.approx(25 * 0.2)
        assert cfg.run.t_end == 60.0

    def test_resonance_label(self):
        cfg = parse_config({"g": 2, "gamma0": 0.2, "omega0": "E1+"})
        assert cfg.pulse.omega0 == single_photon_resonances(SystemParams(2.0))[0].real
        cfg = parse_config({"g": 2, "gamma0": 0.2, "omega0": "E1-"})
        assert cfg.pulse.omega0 == single_photon_resonances(SystemParams(2.0))[1].real

    def test_g_negative_message(self):
        with pytest.raises(ConfigError, match="g must be ≥ 0"):
            parse_config({"g": -1, "gamma0": 0.2})

    @pytest.mark.parametrize("raw,key", [
        ({"gamma0": 0.2}, "system.g"),
        ({"g": 1}, "pulse.gamma0"),
        ({"g": 1, "gamma0": 0.2, "bogus": 1}, "bogus"),
        ({"g": 1, "gamma0": 0.2, "grid": {"n": 1}}, "grid.n"),
        ({"g": 1, "gamma0": 0.2, "pulse": {"omega0": "E7"}}, "pulse.omega0"),
        ({"g": "two", "gamma0": 0.2}, "system.g"),
        ({"g": 1, "gamma0": 0.2, "units": "Hz"}, "units"),
        ({"g": 1, "gamma0": 0.2, "run": {"snapshot_times": [100]}}, "run.snapshot_times"),
    ])
    def test_errors_name_key(self, raw, key):
        with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
            parse_config(raw)

    def test_nested_and_scan(self):
        cfg = parse_config({
            "units": "kappa=1",
            "system": {"g": 2, "delta_a": 0.5},
            "pulse": {"gamma0": 0.5, "omega0": 1.0, "t0": 1.0},
            "grid": {"n": 64, "span": "cover"},
            "run": {"t_end": 10, "output_times": [0, 5, 10], "rtol": 1e-7},
            "analysis": {"omega0_scan": {"start": "-3g", "stop": "3g", "n": 5}, "n_modes": 3},
        })
        assert list(cfg.scan_values()) == [-6.0, -3.0, 0.0, 3.0, 6.0]
        assert cfg.grid_obj.span == pytest.approx(1.0 + 25 * 0.5)
        assert cfg.solver.rtol == 1e-7

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.yaml")

    def test_load_bad_yaml(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot parse"):
            load_config(_write(tmp_path, "g: [1,\n"))


class TestCli:
    def test_schmidt_empty_cavity(self, tmp_path, capsys):
        cfg = _write(tmp_path, {"g": 0, "gamma0": 0.2})
        assert main(["schmidt", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        out = capsys.readouterr().out
        assert "lambda_1 = 1.000000" in out
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["entropy_bits"] < 1e-3
        assert summary["jcsim_version"] == __version__

    def test_evolve_columns_and_snapshots(self, tmp_path):
        cfg = _write(tmp_path, {"g": 5, "gamma0": 1.0, "omega0": "E1+", "t_end": 4,
                                "grid": {"n": 24, "span": "cover"}, "run": {"output_dt": 0.5}})
        out = tmp_path / "o"
        assert main(["evolve", "--config", str(cfg), "--out", str(out), "--snapshot-times", "1,2",
                     "--quiet"]) == 0
        lines = (out / "timeseries.csv").read_text().splitlines()
        assert lines[0].startswith("# jcsim ") and lines[1].startswith("# config: ")
        assert lines[2] == "t_kappa,N_c,P_a,p1,p2,norm"
        assert len(lines) == 3 + 9
        assert (out / "snapshot_t1.csv").exists() and (out / "snapshot_t2.csv").exists()
        header = json.loads(lines[1][len("# config: "):])
        assert header["run"]["snapshot_times"] == [1.0, 2.0]

    def test_spectrum_scan_and_determinism(self, tmp_path):
        cfg = _write(tmp_path, {"g": 2, "gamma0": 0.2, "omega0": "E1+", "grid": {"n": 40},
                                "analysis": {"omega0_scan": {"n": 3}}})
        for d in ("a", "b"):
            assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / d), "--quiet"]) == 0
        for name in ("spectrum.csv", "spectrum_scan.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        rows = (tmp_path / "a" / "spectrum_scan.csv").read_text().splitlines()
        assert rows[2].startswith("omega0_kappa,varpi,")
        assert len(rows) == 3 + 3 * 40
        first = [float(x) for x in rows[3].split(",")]
        assert first[0] == pytest.approx(-6.0) and first[1] == pytest.approx(-25.0)

    def test_exit_code_config(self, tmp_path, capsys):
        cfg = _write(tmp_path, {"g": -1, "gamma0": 0.2})
        assert main(["evolve", "--config", str(cfg)]) == 2
        assert "g must be ≥ 0" in capsys.readouterr().err

    def test_exit_code_numerical(self, tmp_path, monkeypatch):
        import jcsim.cli as cli
        from jcsim.errors import IntegrationError

        def boom(*a, **k):
            raise IntegrationError("step size underflow", 1.5)

        monkeypatch.setattr(cli, "evolve", boom)
        cfg = _write(tmp_path, {"g": 1, "gamma0": 0.5, "grid": {"n": 8}})
        assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 3

    def test_console_script_help(self):
        exe = os.path.join(os.path.dirname(sys.executable), "jcsim")
        cmd = [exe] if os.path.exists(exe) else [sys.executable, "-m", "jcsim.cli"]
        out = subprocess.run(cmd + ["--help"], capture_output=True, text=True, check=True)
        assert "span_in_gamma0 = 25" in out.stdout and "Exit status" in out.stdout

    def test_resolved_numbers_are_finite(self):
        cfg = parse_config({"g": 1, "gamma0": 0.2})
        assert cfg.resolved["run"]["max_step"] == "inf"
        assert all(math.isfinite(v) for v in cfg.resolved["system"].values())

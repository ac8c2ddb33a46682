import csv
import json
import math
import subprocess
import sys

import pytest

from veloq.cli import main
from veloq.compiler import flying_ancilla_layout
from veloq.config import DEFAULT_PHYSICS, RunConfig, load_config, noise_preset
from veloq.errors import InvalidArgumentError


class TestConfig:
    def test_defaults(self):
        cfg = load_config(env={})
        assert cfg.seed == 7 and cfg.shots == 10_000
        assert cfg.noise.strength("depolarizing2q", "cz") == 0.0014
        assert cfg.rabi("rabi_clock_hz") == pytest.approx(2 * math.pi * 40e3)

    def test_ini(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[run]\nseed = 3\nshots = 50\n\n[physics]\nv_flyby = 0.2\n\n"
                        "[noise]\npreset = off\nloss@cz = 0.1 ; only this channel\n")
        cfg = load_config(str(path), env={})
        assert (cfg.seed, cfg.shots) == (3, 50)
        assert cfg.physics["v_flyby"] == 0.2
        assert cfg.noise.strength("loss", "cz") == 0.1
        assert cfg.noise.strength("depolarizing2q", "cz") == 0.0

    def test_explicit_channel_overrides_preset(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[noise]\ndepolarizing2q@cz = 0.02\n")
        cfg = load_config(str(path), env={})
        assert cfg.noise.strength("depolarizing2q", "cz") == 0.02
        assert cfg.noise.strength("readout_flip", "measure") == 0.025

    def test_seed_from_environment(self):
        assert load_config(env={"VELOQ_SEED": "99"}).seed == 99

    @pytest.mark.parametrize("text", ["[physics]\nwarp = 9\n", "[noise]\nbogus@cz = 0.1\n",
                                      "[run]\nshots = 0\n"])
    def test_bad_files(self, tmp_path, text):
        path = tmp_path / "bad.ini"
        path.write_text(text)
        with pytest.raises(InvalidArgumentError):
            load_config(str(path), env={})

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            load_config(str(tmp_path / "nope.ini"), env={})

    def test_presets(self):
        assert noise_preset("off").is_noiseless
        with pytest.raises(InvalidArgumentError):
            noise_preset("loud")

    def test_missing_physics(self):
        physics = dict(DEFAULT_PHYSICS)
        physics.pop("jerk")
        with pytest.raises(InvalidArgumentError):
            RunConfig(physics=physics)


class TestCli:
    def test_zones(self, capsys):
        assert main(["zones", "--dv", "0.05", "--jerk", "1.5e8"]) == 0
        header, row = capsys.readouterr().out.strip().splitlines()
        assert header == "dv_mps,jerk_m_s3,time_s,distance_m"
        t, d = map(float, row.split(",")[2:])
        assert t == pytest.approx(25.8e-6, rel=0.01)
        assert d == pytest.approx(860e-9, rel=0.01)

    def test_curves(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["curve", "spectator", "--out", str(out), "--points", "11"]) == 0
        rows = list(csv.reader(out.open()))
        assert len(rows) == 12 and float(rows[1][1]) == 1.0
        out2 = tmp_path / "z.csv"
        assert main(["curve", "first-zero", "--out", str(out2), "--points", "5"]) == 0
        assert len(out2.read_text().splitlines()) == 6

    def test_compile(self, tmp_path):
        ir, geo = flying_ancilla_layout()
        (tmp_path / "ir.json").write_text(json.dumps(ir.to_json_obj()))
        (tmp_path / "geo.json").write_text(json.dumps(geo.to_json_obj()))
        args = ["compile", "--ir", str(tmp_path / "ir.json"), "--geometry",
                str(tmp_path / "geo.json"), "--out", str(tmp_path / "s.json"),
                "--crosstalk", str(tmp_path / "x.json")]
        assert main(args) == 0
        sched = json.loads((tmp_path / "s.json").read_text())
        assert set(sched) >= {"events", "tones", "duration_s"}
        assert set(json.loads((tmp_path / "x.json").read_text())) == {"0", "1", "2", "3", "4"}

    def test_compile_error_exit(self, tmp_path, capsys):
        ir, geo = flying_ancilla_layout()
        obj = ir.to_json_obj()
        obj["ops"][1]["params"]["v"] = 0.9
        (tmp_path / "ir.json").write_text(json.dumps(obj))
        (tmp_path / "geo.json").write_text(json.dumps(geo.to_json_obj()))
        code = main(["compile", "--ir", str(tmp_path / "ir.json"), "--geometry",
                     str(tmp_path / "geo.json"), "--out", str(tmp_path / "s.json")])
        assert code == 1
        assert "op1" in capsys.readouterr().err

    @pytest.mark.parametrize("figure,files", [
        ("zones", {"zones_comparison.csv": "metric,spatial,velocity,ratio",
                   "zones_transfer.csv": "dv_mps,time_s,distance_m"}),
        ("fig2d", {"fig2d_spectator.csv": "d_over_lambda,infidelity",
                   "fig2d_integrated.csv": "d_over_lambda,analytic,integrated",
                   "fig2d_first_zero.csv": "rabi_hz,v_sr_mps,v_yb_mps,v_rb_raman_mps"}),
        ("fig3a", {"fig3a_phase.csv": "displacement_m,phase_axial_rad,phase_perpendicular_rad"}),
    ])
    def test_reproduce_headers(self, tmp_path, figure, files):
        assert main(["reproduce", figure, "--out", str(tmp_path), "--seed", "7"]) == 0
        for name, header in files.items():
            assert (tmp_path / name).read_text().splitlines()[0] == header
        summary = json.loads((tmp_path / f"{figure}.json").read_text())
        assert summary["passed"] and summary["seed"] == 7
        assert sorted(summary["files"]) == sorted(files)

    def test_unknown_figure(self):
        with pytest.raises(SystemExit):
            main(["reproduce", "fig99"])

    def test_console_script(self):
        out = subprocess.run([sys.executable, "-m", "veloq.cli", "zones", "--dv", "0.1",
                              "--jerk", "1.5e8"], capture_output=True, text=True, check=True)
        assert out.stdout.startswith("dv_mps,")

import numpy as np
import pytest

from aerosplat import cli, ppm, scene, surface


def write_tiny_config(tmp_path, **overrides):
    cfg = scene.load_preset("flag-pattern-2")
    cfg.nx, cfg.ny = 6, 8
    cfg.frames = 2
    cfg.out_dir = str(tmp_path / "out")
    cfg.camera.width = 64
    cfg.camera.height = 48
    for key, value in overrides.items():
        setattr(cfg, key, value)
    path = tmp_path / "scene.cfg"
    path.write_text(scene.config_to_text(cfg))
    return path


class TestSimulateCommand:
    def test_success_and_outputs(self, tmp_path, capsys):
        config = write_tiny_config(tmp_path)
        code = cli.main(["simulate", "--config", str(config), "--quiet"])
        assert code == cli.EXIT_OK
        assert (tmp_path / "out" / "frame_0001.ppm").exists()

    def test_frame_and_out_overrides(self, tmp_path):
        config = write_tiny_config(tmp_path)
        out = tmp_path / "elsewhere"
        code = cli.main(
            ["simulate", "--config", str(config), "--frames", "1", "--out", str(out), "--quiet"]
        )
        assert code == cli.EXIT_OK
        assert (out / "frame_0000.ppm").exists()
        assert not (out / "frame_0001.ppm").exists()

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[material]\nmodel = unobtainium\n")
        assert cli.main(["simulate", "--config", str(bad)]) == cli.EXIT_CONFIG

    def test_missing_config_exit_code(self, tmp_path):
        missing = tmp_path / "no-such-file.cfg"
        assert cli.main(["simulate", "--config", str(missing)]) == cli.EXIT_CONFIG

    def test_blowup_exit_code(self, tmp_path, capsys):
        # One huge substep with a stiff material destabilizes immediately.
        cfg = scene.load_preset("flag-pattern-2")
        cfg.nx, cfg.ny = 6, 8
        cfg.frames = 10
        cfg.out_dir = str(tmp_path / "out")
        cfg.camera.width = 32
        cfg.camera.height = 24
        cfg.material.young_modulus = 1e9
        cfg.step.dt = 0.04
        cfg.step.substeps_per_frame = 1
        path = tmp_path / "explosive.cfg"
        path.write_text(scene.config_to_text(cfg))
        assert cli.main(["simulate", "--config", str(path), "--quiet"]) == cli.EXIT_BLOWUP
        assert "blow-up" in capsys.readouterr().err

    def test_thread_request_warns_but_runs(self, tmp_path, capsys):
        config = write_tiny_config(tmp_path)
        code = cli.main(
            ["simulate", "--config", str(config), "--threads", "8", "--quiet"]
        )
        assert code == cli.EXIT_OK
        assert "single-threaded" in capsys.readouterr().err


class TestRenderCommand:
    def test_render_from_patch_dump(self, tmp_path):
        config = write_tiny_config(tmp_path, dump_patches=True)
        assert cli.main(["simulate", "--config", str(config), "--quiet"]) == cli.EXIT_OK
        dump = tmp_path / "out" / "patches_0000.txt"
        out = tmp_path / "rerender.ppm"
        code = cli.main(
            ["render", "--patches", str(dump), "--config", str(config), "--out", str(out)]
        )
        assert code == cli.EXIT_OK
        img = ppm.read_ppm(out)
        assert img.shape == (48, 64, 3)
        assert img.max() > 0.0  # the flag is visible

    def test_render_bad_dump_exit_code(self, tmp_path):
        config = write_tiny_config(tmp_path)
        dump = tmp_path / "garbage.txt"
        dump.write_text("not numbers\n")
        out = tmp_path / "x.ppm"
        code = cli.main(
            ["render", "--patches", str(dump), "--config", str(config), "--out", str(out)]
        )
        assert code == cli.EXIT_IO


class TestMetricsCommand:
    def test_psnr_between_files(self, tmp_path, capsys):
        a = np.full((8, 8, 3), 0.5)
        b = np.full((8, 8, 3), 0.5)
        from aerosplat.render import write_frame

        write_frame(a, tmp_path / "a.ppm")
        write_frame(b, tmp_path / "b.ppm")
        code = cli.main(
            ["metrics", "psnr", "--pred", str(tmp_path / "a.ppm"), "--ref", str(tmp_path / "b.ppm")]
        )
        assert code == cli.EXIT_OK
        assert "inf" in capsys.readouterr().out

    def test_psnr_directory_mode(self, tmp_path, capsys):
        from aerosplat.render import write_frame

        for sub in ("pred", "ref"):
            (tmp_path / sub).mkdir()
        rng = np.random.default_rng(3)
        for k in range(2):
            img = rng.uniform(0.0, 1.0, (6, 6, 3))
            write_frame(img, tmp_path / "pred" / f"frame_{k:04d}.ppm")
            write_frame(img, tmp_path / "ref" / f"frame_{k:04d}.ppm")
        code = cli.main(
            ["metrics", "psnr", "--pred", str(tmp_path / "pred"), "--ref", str(tmp_path / "ref")]
        )
        assert code == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "frame_0000.ppm" in out and "mean" in out

    def test_chamfer_between_dumps(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("# pts\n0 0 0 0 0 0\n")
        b.write_text("# pts\n1 0 0 0 0 0\n")
        code = cli.main(["metrics", "chamfer", "--pred", str(a), "--ref", str(b)])
        assert code == cli.EXIT_OK
        assert capsys.readouterr().out.strip() == "2"

    def test_missing_file_exit_code(self, tmp_path):
        code = cli.main(
            ["metrics", "psnr", "--pred", str(tmp_path / "nope.ppm"), "--ref", str(tmp_path / "nope.ppm")]
        )
        assert code == cli.EXIT_IO


class TestPresetsCommand:
    def test_list(self, capsys):
        assert cli.main(["presets", "list"]) == cli.EXIT_OK
        out = capsys.readouterr().out.split()
        assert "flag-pattern-2" in out
        assert "sand" in out

    def test_show(self, capsys):
        assert cli.main(["presets", "show", "sand"]) == cli.EXIT_OK
        assert "drucker_prager" in capsys.readouterr().out

    def test_show_unknown(self, capsys):
        assert cli.main(["presets", "show", "warp-core"]) == cli.EXIT_CONFIG

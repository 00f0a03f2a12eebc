import csv
import subprocess
import sys

import numpy as np
import pytest

from gradvec.cli import CSV_COLUMNS, ConfigError, main, make_config, parse_color
from gradvec.raster import RasterImage, save_png


@pytest.fixture
def png(tmp_path):
    y, x = np.mgrid[0:24, 0:24]
    rgb = np.ones((24, 24, 3))
    disc = np.hypot(x - 12, y - 12) < 7
    rgb[disc] = (0.9, 0.3, 0.1)
    path = tmp_path / "in" / "disc.png"
    path.parent.mkdir()
    save_png(RasterImage.from_rgb(rgb), path)
    return path


def test_make_config_defaults(png):
    cfg = make_config([str(png)], env={})
    assert sum(cfg.schedule) == 256 and cfg.schedule[:7] == (1, 1, 2, 4, 8, 16, 32)
    assert cfg.vectorize.iterations_per_epoch == 500
    assert cfg.vectorize.loss.alpha_s == 0.6 and cfg.vectorize.loss.tau == 10
    assert cfg.seed == 0 and cfg.mode == "full"


def test_env_overrides_flags(png):
    cfg = make_config([str(png), "--iters", "7", "--tau", "4"],
                      env={"GRADVEC_ITERS": "9", "GRADVEC_NO_GRADIENT": "1", "GRADVEC_NO_SEG_GUIDANCE": "yes"})
    assert cfg.vectorize.iterations_per_epoch == 9
    assert cfg.vectorize.loss.tau == 4
    assert cfg.mode == "live-baseline"


@pytest.mark.parametrize("argv,env", [
    (["--schedule", "0,1"], {}),
    (["--iters", "0"], {}),
    (["--alpha-s", "2"], {}),
    (["--background", "zz0000"], {}),
    ([], {"GRADVEC_TAU": "wide"}),
    ([], {"GRADVEC_SNAPSHOTS": "maybe"}),
])
def test_bad_config_raises(png, argv, env):
    with pytest.raises(ConfigError):
        make_config([str(png)] + argv, env=env)


def test_bad_config_exit_code(png, capsys):
    assert main([str(png), "--schedule", "clamp:cap=3"]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_input_exit_code(tmp_path):
    assert main([str(tmp_path / "nope.png")]) == 2


def test_parse_color():
    assert parse_color("#ff8000") == pytest.approx((1.0, 128 / 255, 0.0))


def test_run_writes_artifacts(png, tmp_path):
    out = tmp_path / "out"
    rc = main([str(png), "--schedule", "1,1", "--iters", "4", "--out", str(out), "--snapshots"])
    assert rc == 0
    for name in ("disc.full.svg", "disc.full.png", "disc.full.metrics.csv"):
        assert (out / name).is_file()
    with open(out / "disc.full.metrics.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + 8
    snaps = out / "disc.full.snapshots"
    assert (snaps / "epoch001.svg").is_file() and (snaps / "epoch002_regions.png").is_file()


def test_batch_mode_summary(png, tmp_path):
    save_png(RasterImage.from_rgb(np.full((24, 24, 3), 0.4)), png.parent / "flat.png")
    out = tmp_path / "out"
    rc = main([str(png.parent), "--schedule", "1,1", "--iters", "3", "--out", str(out),
               "--no-gradient", "--no-seg-guidance"])
    assert rc == 0
    assert (out / "flat.live-baseline.svg").is_file()
    with open(out / "summary.live-baseline.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["n_paths"] for r in rows] == ["1", "2"]
    assert all(r["mode"] == "live-baseline" and r["images"] == "2" for r in rows)


def test_pipeline_failure_exit_code(png, tmp_path, monkeypatch, caplog):
    import gradvec.vectorize.pipeline as pl

    orig = pl.render_backward

    def bad(*args, **kwargs):
        out = orig(*args, **kwargs)
        out[0]["stop0"] = out[0]["stop0"] * np.inf
        return out

    monkeypatch.setattr(pl, "render_backward", bad)
    rc = main([str(png), "--schedule", "1", "--iters", "2", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "epoch 1, iteration 0" in caplog.text


def test_module_entry_point(png, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gradvec", str(png), "--schedule", "1", "--iters", "2",
                           "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "disc.full.svg").is_file()

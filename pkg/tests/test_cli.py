import csv
import io as pyio
import json
import subprocess
import sys

import numpy as np
import pytest

from roict import io
from roict.cli import build_parser, main
from roict.geometry import fov_pixel_size, paper_geometry
from roict.phantom import generate_phantom

SMALL = {"views": 24, "cells": 32, "pitch_mm": 0.8, "sdd_mm": 291.2, "sad_mm": 115.84, "offset_cells": 1.5}


@pytest.fixture
def geo_file(tmp_path):
    p = tmp_path / "geo.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_phantom(tmp_path, capsys):
    code, _ = run(capsys, "phantom", "--n", "32", "--out", str(tmp_path / "p.f64"), "--png", str(tmp_path / "p.png"))
    assert code == 0
    np.testing.assert_array_equal(io.read_grid(tmp_path / "p.f64"), generate_phantom(32).values)
    from PIL import Image
    px = np.asarray(Image.open(tmp_path / "p.png"))
    # linear [0, 1] -> [0, 255]
    np.testing.assert_array_equal(px, np.rint(255 * generate_phantom(32).values).astype(np.uint8))


def test_project_and_matrix(tmp_path, capsys, geo_file):
    code, _ = run(capsys, "project", "--geometry", geo_file, "--n", "16", "--out", str(tmp_path / "y.f64"),
                  "--matrix", str(tmp_path / "w.smtx"))
    assert code == 0
    y = io.read_grid(tmp_path / "y.f64")
    assert y.shape == (24, 32)
    W = io.read_matrix(tmp_path / "w.smtx", (24 * 32, 256))
    f = generate_phantom(16).values.ravel(order="F")
    np.testing.assert_allclose((W @ f).reshape(24, 32), y, rtol=1e-12, atol=1e-12)


def test_mask_units(tmp_path, capsys):
    h = fov_pixel_size(paper_geometry(), 128)
    code, out = run(capsys, "mask", "--paper-geometry", "--roi-center-px", "5,-3", "--roi-radius-px", "20",
                    "--out", str(tmp_path / "a.f64"))
    assert code == 0 and "rays meet the ROI" in out
    run(capsys, "mask", "--roi-center-mm", f"{5 * h},{-3 * h}", "--roi-radius-mm", str(20 * h),
        "--out", str(tmp_path / "b.f64"))
    np.testing.assert_array_equal(io.read_grid(tmp_path / "a.f64"), io.read_grid(tmp_path / "b.f64"))


def test_reconstruct_and_metrics(tmp_path, capsys, geo_file):
    rec = str(tmp_path / "r.f64")
    code, out = run(capsys, "reconstruct", "--geometry", geo_file, "--n", "16", "--gamma", "0.4",
                    "--roi-offset-center", "--formulation", "explicit", "--regularizer", "wavelet",
                    "--max-iter", "30", "--out", rec, "--log", str(tmp_path / "log.csv"),
                    "--png", str(tmp_path / "r.png"), "--figure", str(tmp_path / "fig.png"),
                    "--sinogram-out", str(tmp_path / "yhat.f64"))
    assert code == 0
    row = list(csv.reader(pyio.StringIO(out)))
    assert row[0][:2] == ["formulation", "regularizer"] and row[1][:2] == ["explicit", "wavelet"]
    assert io.read_grid(tmp_path / "yhat.f64").shape == (24, 32)
    assert (tmp_path / "fig.png").exists() and (tmp_path / "fig_convergence.png").exists()
    io.write_grid(tmp_path / "t.f64", generate_phantom(16).values)
    code, out = run(capsys, "metrics", "--geometry", geo_file, "--recon", rec, "--truth", str(tmp_path / "t.f64"),
                    "--gamma", "0.4", "--roi-offset-center", "--iters", "30", "--params", "lam=5e-4")
    rows = list(csv.reader(pyio.StringIO(out)))
    assert rows[0] == ["psnr_db", "rel_err", "roi_pixels", "mpv", "iters", "params"]
    # same number as the reconstruct summary
    assert rows[1][0] == row[1][4] and rows[1][4] == "30"


def test_config_file_and_flag_precedence(tmp_path, capsys, geo_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"geometry": SMALL, "n": 16, "gamma": 0.3, "rho": 0.5, "regularizer": "none",
                               "sgp": {"max_iter": 5}}))
    code, out = run(capsys, "reconstruct", "--config", str(cfg), "--rho", "0.25", "--out", str(tmp_path / "r.f64"))
    assert code == 0
    row = list(csv.reader(pyio.StringIO(out)))[1]
    assert row[1] == "none" and float(row[3]) == 0.25 and row[6] == "5"


def test_sweep(tmp_path, capsys, geo_file):
    out_dir = tmp_path / "sweep"
    code, out = run(capsys, "sweep", "--geometry", geo_file, "--n", "16", "--gammas", "0.4", "--lambdas", "5e-4",
                    "--rhos", "0.01", "0.1", "--max-iter", "10", "--no-timing", "--no-figures",
                    "--roi-offset-center", "--out", str(out_dir))
    assert code == 0
    rows = list(csv.reader(pyio.StringIO(out)))
    assert len(rows) == 3 and rows[1][-1] == ""
    assert json.loads((out_dir / "config.json").read_text())["rhos"] == [0.01, 0.1]


def test_missing_radius_and_reserved_flag(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["mask", "--out", str(tmp_path / "m.f64")])
    with pytest.raises(SystemExit):
        main(["reconstruct", "--gamma", "0.5", "--poisson-noise", "--out", str(tmp_path / "r.f64")])


def test_bad_input_reports_error(tmp_path, capsys):
    bad = tmp_path / "bad.f64"
    bad.write_bytes(b"junk")
    code = main(["metrics", "--recon", str(bad), "--truth", str(bad), "--gamma", "0.5"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_parser_lists_subcommands():
    text = build_parser().format_help()
    for cmd in ("phantom", "project", "mask", "reconstruct", "metrics", "sweep"):
        assert cmd in text


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "roict", "phantom", "--n", "8", "--out", str(tmp_path / "p.f64")],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert io.read_grid(tmp_path / "p.f64").shape == (8, 8)

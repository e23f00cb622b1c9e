import csv
import json

import numpy as np
import pytest

from roict.experiment import SUMMARY_COLUMNS, Context, ExperimentConfig, run_experiment
from roict.geometry import FanBeamGeometry
from roict.roi import build_mask, truncate
from roict.sgp import SgpParams

SMALL = FanBeamGeometry(num_views=36, num_cells=40, cell_pitch=0.8, sdd=291.2, sad=115.84, detector_offset=1.5)


def small_config(tmp_path, **kw):
    base = dict(geometry=SMALL, n=32, gammas=(0.4,), lambdas=(5e-4,), rhos=(1e-2,), roi_center="offset",
                sgp=SgpParams(max_iter=25), output_dir=str(tmp_path / "out"), figures=False)
    base.update(kw)
    return ExperimentConfig(**base)


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_single_cell_paper_scale(tmp_path):
    cfg = ExperimentConfig(gammas=(0.5,), lambdas=(5e-4,), rhos=(0.01,), sgp=SgpParams(max_iter=10),
                           roi_center="offset", output_dir=str(tmp_path / "o"), figures=True)
    (res,) = run_experiment(cfg)
    rows = read_rows(tmp_path / "o" / "summary.csv")
    assert tuple(rows[0]) == SUMMARY_COLUMNS
    assert len(rows) == 2
    assert rows[1][:5] == ["0.5", "implicit", "shearlet", "0.0005", "0.01"]
    assert res.iterations == 10
    out = tmp_path / "o"
    stem = "g0.5_implicit_shearlet_lam0.0005_rho0.01"
    for suffix in (".f64", ".png", "_log.csv", "_report.png", "_convergence.png"):
        assert (out / f"{stem}{suffix}").exists()
    assert (out / "phantom.png").exists() and (out / "sinogram_g0.5.png").exists()


def test_grid_and_sorting(tmp_path):
    cfg = small_config(tmp_path, formulations=("implicit", "explicit"), regularizers=("shearlet", "none"),
                       lambdas=(5e-4, 5e-2), rhos=(1e-2, 1e-1))
    # 'none' drops the lambda grid: 2 formulations x (4 + 2) cells
    assert len(cfg.cells()) == 12
    results = run_experiment(cfg)
    assert len(results) == 12
    rows = read_rows(tmp_path / "out" / "summary.csv")[1:]
    psnr = [float(r[5]) for r in rows]
    assert psnr == sorted(psnr, reverse=True)
    assert {r[2] for r in rows} == {"shearlet", "none"}
    assert all(r[3] == "0.0" for r in rows if r[2] == "none")


def test_byte_identical_rerun(tmp_path):
    a = small_config(tmp_path, output_dir=str(tmp_path / "a"), record_timing=False)
    b = small_config(tmp_path, output_dir=str(tmp_path / "b"), record_timing=False)
    run_experiment(a)
    run_experiment(b)
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
    assert (tmp_path / "a" / "g0.4_implicit_shearlet_lam0.0005_rho0.01.f64").read_bytes() == \
        (tmp_path / "b" / "g0.4_implicit_shearlet_lam0.0005_rho0.01.f64").read_bytes()


def test_worker_pool_matches_serial(tmp_path):
    serial = run_experiment(small_config(tmp_path, rhos=(1e-2, 1e-1)), write=False)
    pooled = run_experiment(small_config(tmp_path, rhos=(1e-2, 1e-1), workers=2), write=False)
    for a, b in zip(serial, pooled):
        np.testing.assert_array_equal(a.f_hat, b.f_hat)


def test_truncated_data_vanishes_outside_mask(tmp_path):
    cfg = small_config(tmp_path)
    ctx = Context(cfg)
    mask = build_mask(cfg.geometry, ctx.roi(0.4))
    y0 = truncate(ctx.y, mask)
    assert np.all(y0[~mask] == 0.0)


@pytest.mark.parametrize("kw", [
    dict(lambdas=()), dict(rhos=[]), dict(gammas=()), dict(gammas=(0.0,)), dict(formulations=("hybrid",)),
    dict(regularizers=("curvelet",)), dict(lambdas=(-1.0,)), dict(delta=0.0), dict(n=1), dict(workers=0),
])
def test_invalid_config(tmp_path, kw):
    with pytest.raises(ValueError):
        small_config(tmp_path, **kw)


def test_config_dict_roundtrip(tmp_path):
    cfg = small_config(tmp_path)
    back = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back.geometry == cfg.geometry and back.sgp == cfg.sgp
    assert back.gammas == cfg.gammas and back.center_mm() == cfg.center_mm()
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_centers(tmp_path):
    assert small_config(tmp_path, roi_center=None).center_mm() == (0.0, 0.0)
    assert small_config(tmp_path, roi_center=(1, 2)).center_mm() == (1.0, 2.0)


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run_experiment(small_config(tmp_path, output_dir=str(blocker / "sub")))

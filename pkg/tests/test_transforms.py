import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from roict.transforms import build_shearlet_system, make_frame, sh_adjoint, sh_forward, tv_grad, tv_value
from roict.transforms.shearlet import meyer_nu, shear_bump
from roict.transforms.tv import tv_value_and_grad
from roict.transforms.wavelet import DB4_HI, DB4_LO, UndecimatedDb4, wavelet_adjoint, wavelet_forward


@pytest.fixture(scope="module")
def sh():
    return build_shearlet_system(182, 130, 3)


# --- shearlets --------------------------------------------------------------

def test_padding_and_counts(sh):
    assert (sh.padded_rows, sh.padded_cols) == (256, 256)
    assert sh.shears_per_scale() == {1: 10, 2: 10, 3: 18}
    assert sh.num_windows == 39


def test_window_energy_is_one(sh):
    np.testing.assert_allclose(np.sum(sh.windows**2, axis=0), 1.0, rtol=0, atol=1e-12)
    assert np.all(sh.windows >= 0)


def test_windows_are_even(sh):
    flipped = np.roll(sh.windows[:, ::-1, ::-1], shift=(1, 1), axis=(1, 2))
    np.testing.assert_allclose(sh.windows, flipped, atol=1e-15)


def test_reconstruction_and_parseval(sh, rng):
    for _ in range(10):
        x = rng.standard_normal((182, 130))
        c = sh_forward(sh, x)
        assert np.linalg.norm(sh_adjoint(sh, c) - x) <= 1e-10 * np.linalg.norm(x)
        assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(sh.pad(x)), rel=1e-10)


def test_adjoint_identity(sh, rng):
    x = rng.standard_normal((182, 130))
    c = rng.standard_normal(sh.windows.shape)
    assert np.sum(sh_forward(sh, x) * c) == pytest.approx(np.sum(x * sh_adjoint(sh, c)), rel=1e-10)


def test_zero_input(sh):
    assert not np.any(sh_forward(sh, np.zeros((182, 130))))


def test_constant_input_lives_in_lowpass():
    # on a dyadic grid there is no zero padding, so a constant stays constant
    s = build_shearlet_system(64, 64, 3)
    c = sh_forward(s, np.full((64, 64), 2.5))
    assert np.abs(c[1:]).max() < 1e-12
    assert np.sum(c[0] ** 2) == pytest.approx(64 * 64 * 2.5**2, rel=1e-12)


def test_shape_and_size_errors(sh):
    with pytest.raises(ValueError):
        sh_forward(sh, np.zeros((130, 182)))
    with pytest.raises(ValueError):
        sh_adjoint(sh, np.zeros((3, 256, 256)))
    with pytest.raises(ValueError):
        build_shearlet_system(6, 40)
    with pytest.raises(ValueError):
        build_shearlet_system(8, 8, 3)
    with pytest.raises(ValueError):
        build_shearlet_system(64, 64, 0)


def test_meyer_partition_identities():
    t = np.linspace(-0.5, 1.5, 101)
    np.testing.assert_allclose(meyer_nu(t) + meyer_nu(1 - t), 1.0, atol=1e-14)
    s = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(shear_bump(s) ** 2 + shear_bump(s - 1) ** 2 + shear_bump(s + 1) ** 2, 1.0, atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.integers(8, 40), st.integers(8, 40), st.integers(1, 2))
def test_tight_frame_any_size(rows, cols, scales):
    s = build_shearlet_system(rows, cols, scales)
    x = np.random.default_rng(rows * cols).standard_normal((rows, cols))
    np.testing.assert_allclose(sh_adjoint(s, sh_forward(s, x)), x, atol=1e-10)


# --- wavelet ----------------------------------------------------------------

def test_db4_filters():
    assert DB4_LO.sum() == pytest.approx(np.sqrt(2))
    assert np.sum(DB4_LO**2) == pytest.approx(1.0)
    assert DB4_HI.sum() == pytest.approx(0.0, abs=1e-12)
    # orthogonal to even shifts
    for k in (2, 4, 6):
        assert np.dot(DB4_LO[k:], DB4_LO[:-k]) == pytest.approx(0.0, abs=1e-12)


def test_wavelet_tight(rng):
    w = UndecimatedDb4(182, 130)
    x = rng.standard_normal((182, 130))
    np.testing.assert_allclose(wavelet_adjoint(w, wavelet_forward(w, x)), x, atol=1e-10)
    assert np.linalg.norm(w.forward(x)) == pytest.approx(np.linalg.norm(x), rel=1e-12)


def test_wavelet_constant_has_no_detail():
    c = UndecimatedDb4(20, 24).forward(np.full((20, 24), 3.0))
    assert np.abs(c[1:]).max() < 1e-12


def test_wavelet_impulse_gives_taps():
    rows, cols, r0, c0 = 16, 18, 5, 7
    x = np.zeros((rows, cols))
    x[r0, c0] = 1.0
    coeffs = UndecimatedDb4(rows, cols).forward(x)
    pairs = ((DB4_LO, DB4_LO), (DB4_LO, DB4_HI), (DB4_HI, DB4_LO), (DB4_HI, DB4_HI))
    for band, (fr, fc) in enumerate(pairs):
        ref = np.zeros((rows, cols))
        # direct circular convolution of the impulse with the separable filter
        for a, ta in enumerate(fr):
            for b, tb in enumerate(fc):
                ref[(r0 + a) % rows, (c0 + b) % cols] += 0.5 * ta * tb
        np.testing.assert_allclose(coeffs[band], ref, atol=1e-14)


def test_wavelet_errors():
    w = UndecimatedDb4(8, 8)
    with pytest.raises(ValueError):
        w.forward(np.zeros((8, 9)))
    with pytest.raises(ValueError):
        w.adjoint(np.zeros((3, 8, 8)))
    with pytest.raises(ValueError):
        UndecimatedDb4(1, 8)


def test_make_frame():
    assert make_frame("none", 16, 16) is None
    assert isinstance(make_frame("wavelet", 16, 16), UndecimatedDb4)
    assert make_frame("shearlet", 16, 16, 2).num_scales == 2
    with pytest.raises(ValueError):
        make_frame("curvelet", 16, 16)


# --- TV -----------------------------------------------------------------------

def test_tv_constant():
    f = np.full((6, 6), 0.7)
    assert tv_value(f, 0.01) == pytest.approx(36 * 0.01)
    np.testing.assert_array_equal(tv_grad(f, 0.01), 0.0)


def test_tv_hand_example():
    assert tv_value(np.array([[0.0, 1.0], [0.0, 1.0]]), 1.0) == pytest.approx(2 * np.sqrt(2) + 2)


def test_tv_errors():
    with pytest.raises(ValueError):
        tv_value(np.zeros((3, 3)), 0.0)
    with pytest.raises(ValueError):
        tv_grad(np.zeros((3, 3)), -1.0)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 6), elements=st.floats(-2, 2)), st.floats(1e-2, 1.0))
def test_tv_gradient_matches_finite_differences(f, delta):
    val, g = tv_value_and_grad(f, delta)
    eps = 1e-6
    num = np.zeros_like(f)
    for idx in np.ndindex(f.shape):
        e = np.zeros_like(f)
        e[idx] = eps
        num[idx] = (tv_value(f + e, delta) - tv_value(f - e, delta)) / (2 * eps)
    np.testing.assert_allclose(g, num, atol=1e-6)
    assert val >= f.size * delta - 1e-12

"""Backend parity and accuracy of the hot kernels."""
import numpy as np
import pytest
import scipy.special as sp

from gibbslab._core import _kernels_py
from gibbslab._core import BACKEND, j0_array, j1_array, abs_power_mean, \
    weighted_abs_power_sum


def test_j0_j1_against_scipy():
    x = np.linspace(0.0, 660.0, 44001)
    assert np.max(np.abs(j0_array(x) - sp.j0(x))) < 1e-12
    assert np.max(np.abs(j1_array(x) - sp.j1(x))) < 1e-12


def test_j0_series_region_small_arguments():
    x = np.linspace(0.0, 8.0, 2001)
    assert np.max(np.abs(j0_array(x) - sp.j0(x))) < 1e-13


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        j0_array(np.array([-1.0]))


def test_power_mean_even_fast_path_matches_generic():
    rng = np.random.default_rng(0)
    v = rng.standard_normal((32, 129))
    for p in (2.0, 4.0, 6.0):
        direct = (np.abs(v) ** p).mean(axis=-1)
        assert np.allclose(abs_power_mean(v, p), direct, rtol=1e-13)
    # non-even exponent goes through the generic path
    direct3 = (np.abs(v) ** 3.0).mean(axis=-1)
    assert np.allclose(abs_power_mean(v, 3.0), direct3, rtol=1e-13)


def test_weighted_power_sum_matches_direct():
    rng = np.random.default_rng(1)
    v = rng.standard_normal((16, 65))
    w = rng.random(65)
    for p in (2.0, 4.0, 5.0):
        direct = (np.abs(v) ** p) @ w
        assert np.allclose(weighted_abs_power_sum(v, w, p), direct,
                           rtol=1e-12)


def test_backends_agree():
    x = np.linspace(0.0, 400.0, 10001)
    assert np.max(np.abs(j0_array(x) - _kernels_py.j0_array(x))) < 1e-13
    assert np.max(np.abs(j1_array(x) - _kernels_py.j1_array(x))) < 1e-13
    rng = np.random.default_rng(2)
    v = rng.standard_normal((8, 513))
    w = rng.random(513)
    assert np.allclose(abs_power_mean(v, 6.0),
                       _kernels_py.abs_power_mean(v, 6.0), rtol=1e-13)
    assert np.allclose(weighted_abs_power_sum(v, w, 4.0),
                       _kernels_py.weighted_abs_power_sum(v, w, 4.0),
                       rtol=1e-13)


def test_backend_is_reported():
    assert BACKEND in ("cython", "numpy")

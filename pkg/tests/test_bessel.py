"""Bessel evaluation and the certified zero table.

The zero oracle here is deliberately independent of the package path: a
bisection on a locally coded power series for the small zeros, and scipy's
J0 sign changes for the deep table.
"""
import math

import numpy as np
import pytest
import scipy.special as sp

from gibbslab.bessel import BesselTable, bessel_j0, bessel_j1, bessel_zeros


def _series_j0(x):
    # direct power series, enough terms for x <= 8
    total, term = 1.0, 1.0
    for j in range(1, 40):
        term *= -(x * x / 4.0) / (j * j)
        total += term
    return total


def _bisect(f, lo, hi):
    flo = f(lo)
    assert flo * f(hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if flo * f(mid) <= 0:
            hi = mid
        else:
            lo, flo = mid, f(mid)
    return 0.5 * (lo + hi)


def test_j0_at_zero_is_one():
    assert bessel_j0(0.0) == 1.0


def test_j1_at_zero_vanishes():
    assert bessel_j1(0.0) == 0.0


def test_first_zero_matches_series_bisection():
    z = _bisect(_series_j0, 2.0, 3.0)
    assert abs(z - 2.404825557695773) < 1e-12
    assert abs(bessel_j0(z)) < 1e-12


def test_first_two_zeros_against_oracle(table200):
    z1 = _bisect(_series_j0, 2.0, 3.0)
    z2 = _bisect(_series_j0, 5.0, 6.0)
    assert abs(table200.zeros[0] - z1) < 1e-12
    assert abs(table200.zeros[1] - z2) < 1e-12


def test_table_invariants_hold(table200):
    table200.validate()
    assert np.max(np.abs(sp.j0(table200.zeros))) < 1e-12
    gaps = np.diff(table200.zeros)
    assert gaps.min() > math.pi - 0.3 and gaps.max() < math.pi + 0.3


def test_spacing_approaches_pi(table200):
    gap50 = table200.zeros[50] - table200.zeros[49]
    assert abs(gap50 - math.pi) < 0.002


def test_deep_zeros_against_scipy_brackets(table200):
    # every tabulated zero sits inside a sign change of scipy's J0
    z = table200.zeros
    eps = 1e-9
    left = sp.j0(z - eps)
    right = sp.j0(z + eps)
    assert np.all(left * right < 0)


def test_j0_accuracy_to_deep_argument(table200):
    x = np.linspace(0.0, table200.zeros[-1], 30001)
    assert np.max(np.abs(bessel_j0(x) - sp.j0(x))) < 1e-12


def test_bad_count_rejected():
    with pytest.raises(ValueError):
        bessel_zeros(0)


def test_corrupt_table_fails_validation(table200):
    bad = BesselTable(zeros=table200.zeros[:10] + 1e-3,
                      j1_at_zeros=table200.j1_at_zeros[:10])
    with pytest.raises(RuntimeError):
        bad.validate()


def test_csv_export(tmp_path, table200):
    path = tmp_path / "zeros.csv"
    table = BesselTable(zeros=table200.zeros[:5],
                        j1_at_zeros=table200.j1_at_zeros[:5])
    table.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,z_n,j1_at_z_n"
    assert len(lines) == 6
    n, z, j1 = lines[1].split(",")
    assert n == "1"
    assert abs(float(z) - 2.404825557695773) < 1e-14
    assert len(z.replace(".", "").replace("-", "").lstrip("0")) >= 15

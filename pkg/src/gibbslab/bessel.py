"""Zero-order Bessel machinery: J0/J1 evaluation and certified J0 zeros.

Zeros are located from McMahon asymptotic guesses, polished by Newton steps
(J0' = -J1) with a bisection fallback, and certified against the table
invariants: |J0(z_n)| < 1e-12, spacing within 0.3 of pi, and J1 alternating
in sign at consecutive zeros.
"""
from dataclasses import dataclass

import numpy as np

from ._core import j0_array, j1_array, j01_arrays

ZERO_RESIDUAL_TOL = 1e-12


def bessel_j0(x):
    """J0 at a scalar or array argument, x >= 0."""
    out = j0_array(np.asarray(x, dtype=float))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(np.ravel(out)[0])
    return out


def bessel_j1(x):
    """J1 at a scalar or array argument, x >= 0."""
    out = j1_array(np.asarray(x, dtype=float))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(np.ravel(out)[0])
    return out


@dataclass(frozen=True)
class BesselTable:
    """First `count` positive zeros of J0 with J1 evaluated there."""

    zeros: np.ndarray
    j1_at_zeros: np.ndarray

    @property
    def count(self) -> int:
        return len(self.zeros)

    def validate(self) -> None:
        res = np.abs(j0_array(self.zeros))
        if res.max() >= ZERO_RESIDUAL_TOL:
            raise RuntimeError(
                f"zero residual {res.max():.3e} exceeds {ZERO_RESIDUAL_TOL}")
        gaps = np.diff(self.zeros)
        if gaps.size and (gaps.min() <= np.pi - 0.3 or gaps.max() >= np.pi + 0.3):
            raise RuntimeError("zero spacing left the (pi-0.3, pi+0.3) band")
        if np.any(self.j1_at_zeros == 0.0):
            raise RuntimeError("vanishing J1 at a J0 zero")
        signs = np.sign(self.j1_at_zeros)
        if np.any(signs[1:] * signs[:-1] != -1.0):
            raise RuntimeError("J1 signs at consecutive zeros do not alternate")

    def to_csv(self, path) -> None:
        """Write (n, z_n, J1(z_n)) rows with 15 significant digits."""
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "z_n", "j1_at_z_n"])
            for i, (z, j1) in enumerate(zip(self.zeros, self.j1_at_zeros), 1):
                w.writerow([i, f"{z:.15g}", f"{j1:.15g}"])


def _mcmahon_guess(n):
    """McMahon expansion for the n-th positive zero of J0."""
    b = (n - 0.25) * np.pi
    bi = 1.0 / b
    return b + bi * (0.125 + bi * bi * (-31.0 / 384.0
                     + bi * bi * (3779.0 / 15360.0)))


def bessel_zeros(count: int) -> BesselTable:
    """First `count` positive zeros of J0, Newton-refined and certified."""
    if count < 1:
        raise ValueError("count must be >= 1")
    zs = np.empty(count)
    for i in range(count):
        z = _mcmahon_guess(i + 1)
        converged = False
        for _ in range(8):
            j0v, j1v = j01_arrays(np.array([z]))
            step = float(j0v[0]) / float(j1v[0])   # Newton with J0' = -J1
            z = z + step
            if abs(step) < 1e-14 * z:
                converged = True
                break
        if not converged or abs(bessel_j0(z)) >= ZERO_RESIDUAL_TOL:
            z = _bisect_zero(i + 1)
        zs[i] = z
    table = BesselTable(zeros=zs, j1_at_zeros=j1_array(zs))
    table.validate()
    return table


def _bisect_zero(n: int) -> float:
    """Bisection fallback around the McMahon guess."""
    guess = _mcmahon_guess(n)
    lo, hi = guess - 0.5, guess + 0.5
    flo, fhi = bessel_j0(lo), bessel_j0(hi)
    if flo * fhi > 0:
        raise RuntimeError(
            f"could not bracket J0 zero #{n} near {guess:.6f}; "
            "J0 evaluation is suspect")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = bessel_j0(mid)
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-15 * hi:
            break
    return 0.5 * (lo + hi)

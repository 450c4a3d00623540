"""Truncated radial Gaussian fields on the unit disc.

Modes are the L2-normalized Dirichlet eigenfunctions

    e_n(r) = J0(z_n r) / (sqrt(pi) |J1(z_n)|),

with z_n the J0 zeros, so that a coefficient vector a gives
||v||_2^2 = sum a_n^2 and ||grad v||_2^2 = sum (z_n a_n)^2 exactly.
Sampling draws a_n = g_n / z_n with independent standard real Gaussians, and
stores the g_n so the Dirichlet energy of a sampled field is literally the
sum of squares of its Gaussians.

Radial integrals use Gauss-Legendre nodes on [0, 1] with the area measure
2 pi r dr applied through the weights.
"""
from dataclasses import dataclass

import numpy as np

from ._core import j0_array, j1_array, weighted_abs_power_sum
from .bessel import BesselTable
from .rng import rng_for
from .spectral1d import _window


@dataclass(frozen=True)
class DiscQuadrature:
    """Gauss-Legendre rule on [0, 1] for radial profiles."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.nodes)

    @property
    def area_weights(self) -> np.ndarray:
        """Weights for integrals over the disc: 2 pi w_q r_q."""
        return 2.0 * np.pi * self.weights * self.nodes


def disc_quadrature(n_nodes: int) -> DiscQuadrature:
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return DiscQuadrature(nodes=0.5 * (x + 1.0), weights=0.5 * w)


def min_node_count(table: BesselTable, n_modes: int) -> int:
    """Oscillation floor for resolving mode n_modes."""
    return max(64, int(np.ceil(2.0 * table.zeros[n_modes - 1] / np.pi)))


def default_node_count(table: BesselTable, n_modes: int) -> int:
    """Generous default: about pi nodes per half wavelength of the top mode."""
    return max(64, int(np.ceil(table.zeros[n_modes - 1])) + 33)


@dataclass(frozen=True)
class RadialBasis:
    """Mode values on a quadrature grid, ready for batched evaluation."""

    table: BesselTable
    n_modes: int
    quad: DiscQuadrature
    matrix: np.ndarray              # (Q, N): e_n(r_q)
    normalized: bool = True

    def derivative_matrix(self) -> np.ndarray:
        """(Q, N) radial derivatives e_n'(r_q) = -z_n J1(z_n r)/norm."""
        z = self.table.zeros[:self.n_modes]
        arg = np.outer(self.quad.nodes, z)
        scale = _mode_scales(self.table, self.n_modes, self.normalized)
        return -j1_array(arg) * z[None, :] * scale[None, :]

    def project(self, values_at_nodes: np.ndarray) -> np.ndarray:
        """L2(disc) projection of a radial profile onto the modes."""
        if not self.normalized:
            raise ValueError("projection requires the normalized basis")
        return self.matrix.T @ (self.quad.area_weights * values_at_nodes)


def _mode_scales(table: BesselTable, n_modes: int, normalized: bool):
    if normalized:
        return 1.0 / (np.sqrt(np.pi) * np.abs(table.j1_at_zeros[:n_modes]))
    return np.full(n_modes, 1.0 / np.sqrt(np.pi))


def radial_basis(table: BesselTable, n_modes: int,
                 quad: DiscQuadrature | None = None,
                 normalized: bool = True) -> RadialBasis:
    if table.count < n_modes:
        raise ValueError("Bessel table too short for requested n_modes")
    if quad is None:
        quad = disc_quadrature(default_node_count(table, n_modes))
    if quad.count < min_node_count(table, n_modes):
        raise ValueError(
            f"{quad.count} nodes undersample mode {n_modes} "
            f"(need >= {min_node_count(table, n_modes)})")
    z = table.zeros[:n_modes]
    arg = np.outer(quad.nodes, z)
    scale = _mode_scales(table, n_modes, normalized)
    return RadialBasis(table, n_modes, quad, j0_array(arg) * scale[None, :],
                       normalized)


@dataclass(frozen=True)
class RadialField2D:
    """Coefficients against the normalized disc modes."""

    n_modes: int
    coeffs: np.ndarray
    table: BesselTable
    gaussians: np.ndarray | None = None

    def __post_init__(self):
        if self.table.count < self.n_modes:
            raise ValueError("Bessel table too short for field")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite coefficient")


def zero_field_radial(n_modes: int, table: BesselTable) -> RadialField2D:
    return RadialField2D(n_modes, np.zeros(n_modes), table)


def sample_radial(seed: int, stream: int, n_modes: int,
                  table: BesselTable) -> RadialField2D:
    """a_n = g_n / z_n with standard real Gaussians g_n; pure in (seed, stream)."""
    if table.count < n_modes:
        raise ValueError("Bessel table too short for requested n_modes")
    g = rng_for(seed, stream).standard_normal(n_modes)
    return RadialField2D(n_modes, g / table.zeros[:n_modes], table, gaussians=g)


def evaluate_radial(field: RadialField2D, basis: RadialBasis) -> np.ndarray:
    """Field values at the quadrature nodes."""
    if basis.n_modes < field.n_modes:
        raise ValueError("basis holds fewer modes than the field")
    return basis.matrix[:, :field.n_modes] @ field.coeffs


def radial_lp_norm(field: RadialField2D, p: float, basis: RadialBasis) -> float:
    """L^p norm over the disc by Gauss-Legendre quadrature."""
    if p < 1:
        raise ValueError("p must be >= 1")
    v = evaluate_radial(field, basis)
    s = float(weighted_abs_power_sum(v, basis.quad.area_weights, p))
    return s ** (1.0 / p)


def l2_norm_spectral_radial(field: RadialField2D) -> float:
    return float(np.sqrt(np.sum(field.coeffs ** 2)))


def grad_l2_spectral_sq(field: RadialField2D) -> float:
    """Dirichlet energy; for sampled fields exactly the sum of Gaussian squares."""
    if field.gaussians is not None:
        return float(np.sum(field.gaussians * field.gaussians))
    za = field.table.zeros[:field.n_modes] * field.coeffs
    return float(np.sum(za * za))


def grad_l2_spectral(field: RadialField2D) -> float:
    return float(np.sqrt(grad_l2_spectral_sq(field)))


def dyadic_project_radial(field: RadialField2D, kind: str,
                          k: int) -> RadialField2D:
    """Dyadic window on the mode index (same tiling as the 1D module)."""
    keep = _window(kind, k, field.n_modes)
    coeffs = np.where(keep, field.coeffs, 0.0)
    g = None
    if field.gaussians is not None:
        g = np.where(keep, field.gaussians, 0.0)
    return RadialField2D(field.n_modes, coeffs, field.table, g)


def block_l4_expectation(j: int, n_samples: int, table: BesselTable,
                         seed: int = 0,
                         basis: RadialBasis | None = None):
    """Monte Carlo estimate of E ||v_j||_{L^4(disc)} with its standard error."""
    if j < 1:
        raise ValueError("block index must be >= 1")
    n_modes = 2 ** j
    if basis is None:
        basis = radial_basis(table, n_modes)
    keep = _window("block", j, n_modes)
    z = table.zeros[:n_modes]
    mat = basis.matrix[:, :n_modes]
    aw = basis.quad.area_weights
    norms = np.empty(n_samples)
    batch = 2048
    done = 0
    while done < n_samples:
        b = min(batch, n_samples - done)
        g = np.stack([rng_for(seed, s).standard_normal(n_modes)
                      for s in range(done, done + b)])
        coeffs = np.where(keep, g / z, 0.0)
        vals = coeffs @ mat.T
        norms[done:done + b] = weighted_abs_power_sum(vals, aw, 4.0) ** 0.25
        done += b
    mean = float(norms.mean())
    stderr = float(norms.std(ddof=1) / np.sqrt(n_samples))
    return mean, stderr

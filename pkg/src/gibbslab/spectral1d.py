"""Truncated mean-zero Gaussian loops on the circle [0, 1].

A field is stored through its positive-frequency coefficients c_n, n = 1..N;
negative frequencies are the conjugates (the field is real). Sampling draws
c_n = w_n * g_n with independent standard complex Gaussians g_n and a spectral
weight w_n set by the normalization:

  gff:           w_n = 1/(2 pi n); the Dirichlet energy int |u'|^2 is then
                 exactly the sum of squares of the 2N underlying standard
                 normals, which the sampler stores alongside the coefficients.
  paper-literal: w_n = 1/n, kept for side-by-side comparison.

Dyadic windows are indexed so that consecutive low/high projections tile the
spectrum exactly: low(k) keeps 1 <= |n| <= 2^k, high(k) keeps |n| > 2^(k-1),
and block(k) = low(k) minus low(k-1) (block 0 is the single frequency 1).
"""
import json
from dataclasses import dataclass

import numpy as np

from ._core import abs_power_mean
from .rng import rng_for

GFF = "gff"
PAPER_LITERAL = "paper-literal"
_NORMALIZATIONS = (GFF, PAPER_LITERAL)


def spectral_weights(n_modes: int, normalization: str) -> np.ndarray:
    n = np.arange(1, n_modes + 1, dtype=float)
    if normalization == GFF:
        return 1.0 / (2.0 * np.pi * n)
    if normalization == PAPER_LITERAL:
        return 1.0 / n
    raise ValueError(f"unknown normalization {normalization!r}")


@dataclass(frozen=True)
class SpectralField1D:
    """Fourier data of a real mean-zero loop, frequencies 1..n_modes."""

    n_modes: int
    coeffs_pos: np.ndarray          # c_n for n = 1..N; c_{-n} = conj(c_n)
    normalization: str
    gaussians: np.ndarray | None = None   # (N, 2) standard normals, sampled fields

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if len(self.coeffs_pos) != self.n_modes:
            raise ValueError("coefficient array does not match n_modes")
        if self.normalization not in _NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if not np.all(np.isfinite(self.coeffs_pos.view(float))):
            raise ValueError("non-finite coefficient")

    def coeff(self, n: int) -> complex:
        """Signed-frequency coefficient (Hermitian symmetry for n < 0)."""
        if n == 0 or abs(n) > self.n_modes:
            return 0.0j
        c = self.coeffs_pos[abs(n) - 1]
        return c if n > 0 else np.conj(c)


@dataclass(frozen=True)
class GridSamples1D:
    """Real field values on the uniform grid x_m = m/M."""

    grid_size: int
    values: np.ndarray
    n_modes: int                    # of the field these were evaluated from


def zero_field(n_modes: int, normalization: str = GFF) -> SpectralField1D:
    return SpectralField1D(n_modes, np.zeros(n_modes, dtype=complex),
                           normalization)


def sample_loop(seed: int, stream: int, n_modes: int,
                normalization: str = GFF) -> SpectralField1D:
    """Draw one loop; a pure function of (seed, stream)."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1 (use zero_field for the "
                         "empty field)")
    g = rng_for(seed, stream).standard_normal((n_modes, 2))
    w = spectral_weights(n_modes, normalization)
    coeffs = w * (g[:, 0] + 1j * g[:, 1]) / np.sqrt(2.0)
    return SpectralField1D(n_modes, coeffs, normalization, gaussians=g)


def _window(kind: str, k: int, n_modes: int) -> np.ndarray:
    """Boolean keep-mask over frequencies 1..N for a dyadic window."""
    if k < 0:
        raise ValueError("k must be >= 0")
    n = np.arange(1, n_modes + 1)
    if kind == "low":
        return n <= 2 ** k
    if kind == "high":
        return n > 2 ** (k - 1) if k >= 1 else np.ones(n_modes, dtype=bool)
    if kind == "block":
        if k == 0:
            return n == 1
        return (n > 2 ** (k - 1)) & (n <= 2 ** k)
    raise ValueError(f"unknown projection kind {kind!r}")


def dyadic_project(field: SpectralField1D, kind: str, k: int) -> SpectralField1D:
    """Littlewood-Paley style projection; zeroed modes drop their Gaussians."""
    keep = _window(kind, k, field.n_modes)
    coeffs = np.where(keep, field.coeffs_pos, 0.0j)
    g = None
    if field.gaussians is not None:
        g = np.where(keep[:, None], field.gaussians, 0.0)
    return SpectralField1D(field.n_modes, coeffs, field.normalization, g)


def evaluate_grid(field: SpectralField1D, grid_size: int) -> GridSamples1D:
    """Field values on the uniform M-point grid via the inverse FFT."""
    values = evaluate_coeff_rows(field.coeffs_pos[None, :], grid_size)[0]
    return GridSamples1D(grid_size, values, field.n_modes)


def evaluate_coeff_rows(coeff_rows: np.ndarray, grid_size: int) -> np.ndarray:
    """Batched grid evaluation: rows of c_n (n=1..N) -> rows of field values."""
    n_modes = coeff_rows.shape[-1]
    if grid_size < 4 * n_modes:
        raise ValueError(
            f"grid_size {grid_size} < 4*n_modes = {4 * n_modes}: aliasing")
    spec = np.zeros(coeff_rows.shape[:-1] + (grid_size // 2 + 1,),
                    dtype=complex)
    spec[..., 1:n_modes + 1] = coeff_rows
    return grid_size * np.fft.irfft(spec, n=grid_size, axis=-1)


def lp_norm(samples: GridSamples1D, p: float) -> float:
    """Rectangle-rule L^p norm on the unit circle."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(abs_power_mean(samples.values, p)) ** (1.0 / p)


def l2_norm_spectral(field: SpectralField1D) -> float:
    """Parseval L^2 norm."""
    return float(np.sqrt(l2_norm_spectral_sq(field)))


def l2_norm_spectral_sq(field: SpectralField1D) -> float:
    return 2.0 * float(np.sum(np.abs(field.coeffs_pos) ** 2))


def h1_seminorm_sq(field: SpectralField1D) -> float:
    """Squared Dirichlet energy int_0^1 |u'|^2.

    For gff-sampled fields this is taken directly from the stored standard
    normals, making the chi-square law exact in floating point; otherwise the
    spectral formula sum (2 pi n)^2 |c_n|^2 over both signs is used.
    """
    if field.normalization == GFF and field.gaussians is not None:
        return float(np.sum(field.gaussians * field.gaussians))
    n = np.arange(1, field.n_modes + 1, dtype=float)
    return 2.0 * float(np.sum((2.0 * np.pi * n) ** 2
                              * np.abs(field.coeffs_pos) ** 2))


def h1_seminorm(field: SpectralField1D) -> float:
    return float(np.sqrt(h1_seminorm_sq(field)))


def field_to_json(field: SpectralField1D) -> str:
    """Snapshot record with both frequency signs listed explicitly."""
    coeffs = []
    for n in range(-field.n_modes, field.n_modes + 1):
        if n == 0:
            continue
        c = field.coeff(n)
        coeffs.append([n, float(c.real), float(c.imag)])
    return json.dumps({"n_modes": field.n_modes,
                       "normalization": field.normalization,
                       "coeffs": coeffs})


def field_from_json(text: str) -> SpectralField1D:
    rec = json.loads(text)
    n_modes = int(rec["n_modes"])
    coeffs = np.zeros(n_modes, dtype=complex)
    seen = {}
    for n, re, im in rec["coeffs"]:
        seen[int(n)] = complex(re, im)
    for n in range(1, n_modes + 1):
        cpos = seen.get(n, 0.0j)
        cneg = seen.get(-n, 0.0j)
        if abs(np.conj(cneg) - cpos) > 1e-12 * (1.0 + abs(cpos)):
            raise ValueError(f"record is not Hermitian at frequency {n}")
        coeffs[n - 1] = cpos
    return SpectralField1D(n_modes, coeffs, rec["normalization"])

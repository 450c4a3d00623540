"""Ground states of (p-2) Lap(phi) - (p+2) phi + phi^(p-1) = 0 and the
associated Gagliardo-Nirenberg machinery.

In one dimension the equation reduces by scaling to Q'' - Q + Q^(p-1) = 0,
whose sech-power solution is known in closed form; the profile, its mass and
all functionals are then analytic. In two dimensions the radial profile is
found by shooting on phi(0) (bisection between sign-crossing and turn-up
outcomes) and then polished by a Newton solve of a fourth-order finite
difference discretization, whose converged max-norm residual certifies the
profile. Masses are Richardson-extrapolated from two grids.

Two constants are exposed per ground state:

  gns_constant  -- the bookkeeping identity (p/2) * mass^(2-p), enforced
                   exactly on the GroundState record;
  j_min         -- the attained minimum of the interpolation functional
                   J(f) = |grad f|^(n(p-2)/2) |f|^(2+(p-2)(2-n)/2) / |f|_p^p,
                   i.e. J evaluated at the solved profile.  1/j_min is the
                   sharp constant of the interpolation inequality and is the
                   quantity every minimality and saturation check uses.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.special import beta as beta_fn

from .radial2d import (RadialBasis, RadialField2D, grad_l2_spectral_sq,
                       l2_norm_spectral_radial, radial_lp_norm)
from .spectral1d import (GFF, evaluate_grid, h1_seminorm, l2_norm_spectral,
                         lp_norm, sample_loop)

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class GroundState:
    dim: int
    p: int
    grid: np.ndarray
    profile: np.ndarray
    mass: float                 # ||phi||_{L2(R^n)}
    grad_norm: float            # ||grad phi||_{L2}
    gns_constant: float         # (p/2) mass^(2-p), enforced identity
    j_min: float                # attained minimum of the J functional
    residual_max: float
    mass_error_bar: float

    @property
    def sharp_constant(self) -> float:
        """Sharp constant of the interpolation inequality, 1 / j_min."""
        return 1.0 / self.j_min

    def summary(self) -> dict:
        return {"dim": self.dim, "p": self.p, "mass": self.mass,
                "grad_norm": self.grad_norm, "gns_constant": self.gns_constant,
                "residual_max": self.residual_max}

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "phi"])
            for x, v in zip(self.grid, self.profile):
                w.writerow([f"{x:.12g}", f"{v:.15g}"])


def _validate_dim_p(dim: int, p: int) -> None:
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if p % 2 or p <= 2:
        raise ValueError("p must be an even integer greater than 2")
    if dim == 1 and p > 6:
        raise ValueError("1D range is p <= 6")
    if dim == 2 and p > 4:
        raise ValueError("2D range is p <= 4")


@lru_cache(maxsize=8)
def solve_ground_state(dim: int, p: int) -> GroundState:
    _validate_dim_p(dim, p)
    return _solve_1d(p) if dim == 1 else _solve_2d(p)


# ---------------------------------------------------------------- 1D, closed form

def _solve_1d(p: int) -> GroundState:
    s = 2.0 / (p - 2)         # sech power of the unit-normalized profile
    c = (p - 2) / 2.0
    a = (p + 2) ** (1.0 / (p - 2))
    b = math.sqrt((p + 2) / (p - 2))
    amp = (p / 2.0) ** (1.0 / (p - 2))

    # closed-form line integrals of Q(y) = amp * sech^s(c y)
    int_q2 = amp ** 2 * beta_fn(s, 0.5) / c
    int_qp = amp ** p * beta_fn(p * s / 2.0, 0.5) / c
    int_dq2 = int_qp - int_q2             # from the equation, multiply by Q

    mass_sq = a * a / b * int_q2
    grad_sq = a * a * b * int_dq2
    lp_p = a ** p / b * int_qp

    length = (math.log(1e10) + s * math.log(2.0) + 1.0) / b
    grid = np.linspace(0.0, length, 4001)
    y = b * grid
    q = amp / np.cosh(c * y) ** s
    profile = a * q

    # analytic residual: phi'' = a b^2 (Q - Q^(p-1)) along the solution family
    phi_pp = a * b * b * (q - q ** (p - 1))
    residual = (p - 2) * phi_pp - (p + 2) * profile + profile ** (p - 1)

    mass = math.sqrt(mass_sq)
    grad = math.sqrt(grad_sq)
    j_min = _j_value(1, p, grad, mass, lp_p)
    return GroundState(
        dim=1, p=p, grid=grid, profile=profile, mass=mass, grad_norm=grad,
        gns_constant=(p / 2.0) * mass ** (2 - p), j_min=j_min,
        residual_max=float(np.max(np.abs(residual))),
        mass_error_bar=1e-14 * mass)


def _j_value(dim, p, grad, mass, lp_p):
    e_grad = dim * (p - 2) / 2.0
    e_mass = 2.0 + (p - 2) * (2.0 - dim) / 2.0
    return grad ** e_grad * mass ** e_mass / lp_p


# ---------------------------------------------------------------- 2D, shooting

def _shoot_2d(p: int, s0: float, r_max: float):
    """Integrate from the series start; returns (outcome, solution).

    outcome is 'cross' when phi reaches zero, 'turn' when phi' turns positive
    while phi is still order one, 'decay' otherwise.
    """
    r0 = 1e-6
    c2 = ((p + 2) * s0 - s0 ** (p - 1)) / (4.0 * (p - 2))

    def rhs(r, y):
        f, fp = y
        return [fp, ((p + 2) * f - f ** (p - 1)) / (p - 2) - fp / r]

    def ev_cross(r, y):
        return y[0]
    ev_cross.terminal = True
    ev_cross.direction = -1

    def ev_turn(r, y):
        return y[1]
    ev_turn.terminal = True
    ev_turn.direction = 1

    sol = solve_ivp(rhs, (r0, r_max), [s0 + c2 * r0 * r0, 2 * c2 * r0],
                    method="DOP853", rtol=1e-12, atol=1e-14,
                    events=[ev_cross, ev_turn], dense_output=True)
    if sol.t_events[0].size:
        return "cross", sol
    if sol.t_events[1].size:
        return "turn", sol
    return "decay", sol


def _newton_polish_2d(p: int, r_max: float, n_cells: int, guess):
    """Newton solve of the 5-point FD discretization on r_i = i h.

    Rows 0..n-3 impose the equation (with the even extension across r = 0);
    the last two values are clamped to zero. Returns (grid, profile, residual).
    """
    h = r_max / n_cells
    n = n_cells + 1
    r = np.arange(n) * h
    phi = np.asarray(guess(r), dtype=float)
    phi[-2:] = 0.0
    h2 = 12.0 * h * h
    h1 = 12.0 * h

    def fd_ops(f):
        d2 = np.zeros_like(f)
        d1 = np.zeros_like(f)
        i = np.arange(2, n - 2)
        d2[i] = (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1]
                 - f[i + 2]) / h2
        d1[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / h1
        # even extension through r=0: f[-k] = f[k]
        d2[0] = (-2 * f[2] + 32 * f[1] - 30 * f[0]) / h2
        d2[1] = (16 * f[0] - 31 * f[1] + 16 * f[2] - f[3]) / h2
        d1[1] = (f[1] - 8 * f[0] + 8 * f[2] - f[3]) / h1
        return d2, d1

    def residual_vec(f):
        d2, d1 = fd_ops(f)
        res = (p - 2) * d2 - (p + 2) * f + f ** (p - 1)
        res[1:n - 2] += (p - 2) * d1[1:n - 2] / r[1:n - 2]
        res[0] = 2 * (p - 2) * d2[0] - (p + 2) * f[0] + f[0] ** (p - 1)
        res[n - 2] = f[n - 2]
        res[n - 1] = f[n - 1]
        return res

    # banded Jacobian, bandwidth 2
    def jacobian(f):
        ab = np.zeros((5, n))
        lap2 = (p - 2) / h2
        adv = (p - 2) / h1

        def add(row, col, val):
            ab[2 + row - col, col] += val

        add(0, 0, 2 * (-30.0) * lap2 - (p + 2) + (p - 1) * f[0] ** (p - 2))
        add(0, 1, 2 * 32.0 * lap2)
        add(0, 2, 2 * (-2.0) * lap2)
        i = 1
        ri = r[i]
        add(i, 0, 16 * lap2 + (-8.0) * adv / ri)
        add(i, 1, -31 * lap2 + 1.0 * adv / ri - (p + 2)
            + (p - 1) * f[i] ** (p - 2))
        add(i, 2, 16 * lap2 + 8.0 * adv / ri)
        add(i, 3, -1 * lap2 - 1.0 * adv / ri)
        for i in range(2, n - 2):
            ri = r[i]
            add(i, i - 2, -lap2 + adv / ri)
            add(i, i - 1, 16 * lap2 - 8 * adv / ri)
            add(i, i, -30 * lap2 - (p + 2) + (p - 1) * f[i] ** (p - 2))
            add(i, i + 1, 16 * lap2 + 8 * adv / ri)
            add(i, i + 2, -lap2 - adv / ri)
        add(n - 2, n - 2, 1.0)
        add(n - 1, n - 1, 1.0)
        return ab

    # rounding floor of the stencil evaluation; can't resolve residuals below it
    floor = 4.0 * 62.0 * (p - 2) * max(1.0, abs(phi[0])) \
        * np.finfo(float).eps / (12.0 * h * h)
    for _ in range(60):
        res = residual_vec(phi)
        base = np.max(np.abs(res))
        if base < 2.0 * floor:
            break
        delta = solve_banded((2, 2), jacobian(phi), res)
        step = 1.0
        while step > 1e-4:
            trial = phi - step * delta
            if np.max(np.abs(residual_vec(trial))) < base:
                phi = trial
                break
            step *= 0.5
        else:
            if base < 0.5 * RESIDUAL_TOL:
                break               # stalled at the rounding floor; good enough
            raise RuntimeError("Newton polish stalled on the FD system")
    res = residual_vec(phi)
    return r, phi, float(np.max(np.abs(res[:n - 2])))


def _simpson(y, h):
    n = len(y)
    if n % 2 == 0:
        raise ValueError("Simpson needs an odd point count")
    return h / 3.0 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def _fd_derivative(f, h):
    d = np.empty_like(f)
    i = np.arange(2, len(f) - 2)
    d[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h)
    d[0] = 0.0                   # even profile
    d[1] = (f[1] - 8 * f[0] + 8 * f[2] - f[3]) / (12 * h)
    d[-2] = (f[-4] - 8 * f[-3] + 8 * f[-1] - 0.0) / (12 * h)
    d[-1] = 0.0
    return d


def _solve_2d(p: int) -> GroundState:
    mu = math.sqrt((p + 2) / (p - 2))
    r_max = (math.log(1e10) + 3.0) / mu
    lo, hi = (p + 2) ** (1.0 / (p - 2)) + 0.05, 4.0 * (p + 2) ** (1.0 / (p - 2))
    out_lo, _ = _shoot_2d(p, lo, r_max)
    out_hi, _ = _shoot_2d(p, hi, r_max)
    if out_lo != "turn" or out_hi != "cross":
        raise RuntimeError(
            f"shooting bracket failed: outcomes ({out_lo}, {out_hi})")
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        out, _ = _shoot_2d(p, mid, r_max)
        if out == "cross":
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12 * hi:
            break
    s_star = 0.5 * (lo + hi)
    _, sol = _shoot_2d(p, s_star, r_max)

    def guess(r):
        t = np.clip(r, sol.t[0], sol.t[-1])
        vals = sol.sol(t)[0]
        vals = np.where(r > sol.t[-1], 0.0, vals)
        return np.clip(vals, 0.0, None)

    n_cells = 2200
    masses = {}
    results = {}
    for cells in (n_cells, 2 * n_cells):
        grid, prof, res = _newton_polish_2d(p, r_max, cells, guess)
        h = grid[1] - grid[0]
        masses[cells] = math.sqrt(2 * math.pi * _simpson(prof * prof * grid, h))
        results[cells] = (grid, prof, res, h)
    m_h, m_h2 = masses[n_cells], masses[2 * n_cells]
    mass = (16 * m_h2 - m_h) / 15.0
    bar = abs(m_h2 - m_h) / 15.0

    grid, prof, res, h = results[2 * n_cells]
    if res >= RESIDUAL_TOL:
        raise RuntimeError(f"2D residual {res:.2e} above {RESIDUAL_TOL}")
    if prof[0] <= 0 or np.min(prof[:-2]) < -1e-12 \
            or np.any(np.diff(prof[:-1]) > 1e-12):
        raise RuntimeError("2D profile is not positive decreasing")

    dprof = _fd_derivative(prof, h)
    grad = math.sqrt(2 * math.pi * _simpson(dprof * dprof * grid, h))
    lp_p = 2 * math.pi * _simpson(prof ** p * grid, h)
    j_min = _j_value(2, p, grad, mass, lp_p)
    return GroundState(
        dim=2, p=p, grid=grid, profile=prof, mass=mass, grad_norm=grad,
        gns_constant=(p / 2.0) * mass ** (2 - p), j_min=j_min,
        residual_max=res, mass_error_bar=bar)


# ---------------------------------------------------------------- functionals

def profile_function(gs: GroundState):
    """Cubic-spline evaluator phi(|x|), zero beyond the stored grid."""
    spline = CubicSpline(gs.grid, gs.profile,
                         bc_type=((1, 0.0), (1, 0.0)))
    edge = gs.grid[-1]

    def phi(x):
        r = np.abs(np.asarray(x, dtype=float))
        out = spline(np.clip(r, 0.0, edge))
        return np.where(r > edge, 0.0, out)

    return phi


def gns_constant(gs: GroundState) -> float:
    """Bookkeeping constant (p/2) mass^(2-p) of a solved ground state."""
    return (gs.p / 2.0) * gs.mass ** (2 - gs.p)


def gns_minimum(gs: GroundState) -> float:
    """Attained minimum of the interpolation functional."""
    return gs.j_min


def _fd4(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid."""
    f = values
    d = np.empty_like(f)
    i = np.arange(2, len(f) - 2)
    d[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-2] = -(-3 * f[-1] - 10 * f[-2] + 18 * f[-3] - 6 * f[-4] + f[-5]) / (12 * h)
    d[-1] = -(-25 * f[-1] + 48 * f[-2] - 36 * f[-3] + 16 * f[-4] - 3 * f[-5]) / (12 * h)
    return d


def gns_functional(grid: np.ndarray, values: np.ndarray, dim: int,
                   p: float) -> float:
    """J(f) for a gridded profile (full line for dim=1, radial for dim=2)."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    h = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), h):
        raise ValueError("uniform grid required")
    d = _fd4(values, h)
    if dim == 1:
        w = np.ones_like(grid)
    elif dim == 2:
        w = 2.0 * np.pi * grid
    else:
        raise ValueError("dim must be 1 or 2")
    lp_p = float(simpson(np.abs(values) ** p * w, dx=h))
    if lp_p <= 0.0:
        raise ValueError("function vanishes in L^p")
    l2 = math.sqrt(float(simpson(values * values * w, dx=h)))
    gr = math.sqrt(float(simpson(d * d * w, dx=h)))
    return _j_value(dim, p, gr, l2, lp_p)


def periodic_gns_probe(margin: float, corpus_size: int, *, p: int = 6,
                       n_modes: int = 64, grid_size: int | None = None,
                       seed: int = 0,
                       sharp_constant: float | None = None) -> float:
    """Empirical lower bound for the additive constant in the periodic
    interpolation inequality with a sharp-constant margin.

    Over a corpus of sampled loops u, returns the maximum of
    (|u|_p^p - (C+margin) |u'|^((p-2)/2) |u|^((p+2)/2)) / |u|^p, so any
    admissible additive constant must be at least the returned value.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    if sharp_constant is None:
        sharp_constant = solve_ground_state(1, p).sharp_constant
    if grid_size is None:
        grid_size = max(4 * n_modes, (p + 1) * n_modes)
    c = sharp_constant + margin
    best = -math.inf
    for stream in range(corpus_size):
        u = sample_loop(seed, stream, n_modes, GFF)
        lp_p = lp_norm(evaluate_grid(u, grid_size), p) ** p
        l2 = l2_norm_spectral(u)
        h1 = h1_seminorm(u)
        val = (lp_p - c * h1 ** ((p - 2) / 2.0) * l2 ** ((p + 2) / 2.0)) / l2 ** p
        best = max(best, val)
    return best


def disc_gns_check(field: RadialField2D, basis: RadialBasis,
                   sharp_constant: float) -> float:
    """Saturation ratio |v|_4^4 / (C |grad v|^2 |v|^2) on the disc; <= 1."""
    l2sq = l2_norm_spectral_radial(field) ** 2
    if l2sq == 0.0:
        raise ValueError("zero field")
    num = radial_lp_norm(field, 4.0, basis) ** 4
    return num / (sharp_constant * grad_l2_spectral_sq(field) * l2sq)

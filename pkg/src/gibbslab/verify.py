"""One-shot invariant suite at pinned desk-scale parameters.

Each check is small enough that the whole suite runs in a few minutes; the
heavier statistical versions of the same statements live in the test suite.
The optional fault injection rebuilds the disc basis without the |J1(z_n)|
normalization, which must break the gradient-Parseval check: a verify run
that still passes under the injected fault would indicate a vacuous check.
"""
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm as normal_dist

from . import gibbs, tails
from .bessel import bessel_zeros
from .groundstate import (disc_gns_check, gns_functional, profile_function,
                          solve_ground_state)
from .radial2d import (grad_l2_spectral_sq, radial_basis, sample_radial)
from .rng import rng_for
from .spectral1d import (dyadic_project, evaluate_grid, h1_seminorm_sq,
                         l2_norm_spectral, lp_norm, sample_loop)

FAULTS = ("j1-normalization",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: str
    seconds: float


def _check(name, fn, results):
    t0 = time.time()
    try:
        passed, measured = fn()
    except Exception as exc:                  # a crash is a failure, not an abort
        passed, measured = False, f"raised {type(exc).__name__}: {exc}"
    results.append(CheckResult(name, bool(passed), measured,
                               time.time() - t0))


def run_all(inject_fault: str | None = None) -> list[CheckResult]:
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}; known: {FAULTS}")
    results: list[CheckResult] = []

    def realness():
        worst = 0.0
        for stream in range(20):
            f = sample_loop(101, stream, 48)
            spec = np.zeros(256, dtype=complex)
            spec[1:49] = f.coeffs_pos
            spec[-48:] = np.conj(f.coeffs_pos[::-1])
            vals = 256 * np.fft.ifft(spec)
            worst = max(worst, float(np.max(np.abs(vals.imag))))
        return worst < 1e-12, f"max imaginary part {worst:.2e}"

    def parseval():
        worst = 0.0
        for n_modes in (16, 64, 256):
            for stream in range(10):
                f = sample_loop(102, stream, n_modes)
                a = l2_norm_spectral(f) ** 2
                b = lp_norm(evaluate_grid(f, 4 * n_modes), 2) ** 2
                worst = max(worst, abs(a - b) / (1.0 + a))
        return worst < 1e-10, f"max relative defect {worst:.2e}"

    def projection_algebra():
        worst = 0.0
        for stream, k in [(0, 1), (1, 2), (2, 4), (3, 6)]:
            f = sample_loop(103, stream, 100)
            lo = dyadic_project(f, "low", k)
            hi = dyadic_project(f, "high", k + 1)
            worst = max(worst, float(np.max(np.abs(
                lo.coeffs_pos + hi.coeffs_pos - f.coeffs_pos))))
        return worst == 0.0, f"max coefficient defect {worst:.2e}"

    def lp_monotone():
        bad = 0
        for stream in range(100):
            f = sample_loop(104, stream, 32)
            g = evaluate_grid(f, 256)
            ns = [lp_norm(g, p) for p in (1.0, 2.0, 3.0, 4.0, 6.0)]
            if any(b < a * (1 - 1e-12) for a, b in zip(ns, ns[1:])):
                bad += 1
        return bad == 0, f"{bad} monotonicity violations in 100 fields"

    def chi_square_law():
        n, n_modes = 20000, 64
        vals = np.array([h1_seminorm_sq(sample_loop(105, s, n_modes))
                         for s in range(n)])
        dof = 2 * n_modes
        mean_tol = 3 * math.sqrt(2 * dof / n)
        m_ok = abs(vals.mean() - dof) < mean_tol
        var = vals.var(ddof=1)
        var_tol = 3 * (2 * dof) * math.sqrt((2 / (n - 1)) + 12 / (dof * n))
        v_ok = abs(var - 2 * dof) < var_tol
        return m_ok and v_ok, (f"mean {vals.mean():.2f} (exp {dof}), "
                               f"var {var:.1f} (exp {2 * dof})")

    def bessel_table():
        t = bessel_zeros(100)
        t.validate()
        z1 = abs(t.zeros[0] - 2.404825557695773)
        z2 = abs(t.zeros[1] - 5.520078110286311)
        return z1 < 1e-12 and z2 < 1e-12, (
            f"|dz1|={z1:.1e} |dz2|={z2:.1e}, residuals certified")

    def orthonormality():
        t = bessel_zeros(100)
        basis = radial_basis(t, 100)
        gram = basis.matrix.T * basis.quad.area_weights @ basis.matrix
        diag = np.max(np.abs(np.diag(gram) - 1.0))
        off = np.max(np.abs(gram[:30, :30] - np.diag(np.diag(gram))[:30, :30]))
        return diag < 1e-10 and off < 1e-8, (
            f"norm defect {diag:.2e}, max off-diag {off:.2e}")

    def gradient_parseval_2d():
        t = bessel_zeros(64)
        normalized = inject_fault != "j1-normalization"
        basis = radial_basis(t, 64, normalized=normalized)
        dmat = basis.derivative_matrix()
        aw = basis.quad.area_weights
        worst_rel = 0.0
        exact = True
        for stream in range(300):
            f = sample_radial(106, stream, 64, t)
            spec = grad_l2_spectral_sq(f)
            if spec != float(np.sum(f.gaussians ** 2)):
                exact = False
            dv = dmat @ f.coeffs
            quad = float(np.sum(aw * dv * dv))
            worst_rel = max(worst_rel, abs(quad - spec) / spec)
        return exact and worst_rel < 1e-6, (
            f"stored-Gaussian identity {'exact' if exact else 'BROKEN'}, "
            f"max quadrature mismatch {worst_rel:.2e}")

    def ground_state_1d():
        t0 = time.time()
        gs = solve_ground_state(1, 6)
        dt = time.time() - t0
        m_err = abs(gs.mass ** 2 - math.sqrt(3) * math.pi) / (math.sqrt(3) * math.pi)
        ident = abs(gs.gns_constant * gs.mass ** (gs.p - 2) - gs.p / 2.0)
        ok = m_err < 1e-8 and ident < 1e-12 and gs.residual_max < 1e-8
        return ok, (f"mass^2 rel err {m_err:.1e}, identity defect {ident:.1e}, "
                    f"residual {gs.residual_max:.1e}, {dt:.2f}s")

    def ground_state_2d():
        gs = solve_ground_state(2, 4)
        ident = abs(gs.gns_constant - 2.0 / gs.mass ** 2)
        jref = gns_functional(gs.grid, gs.profile, 2, 4)
        jerr = abs(jref - gs.j_min) / gs.j_min
        ok = (gs.residual_max < 1e-8 and gs.mass_error_bar < 1e-8
              and ident < 1e-12 and jerr < 1e-6)
        return ok, (f"residual {gs.residual_max:.1e}, mass bar "
                    f"{gs.mass_error_bar:.1e}, J cross-check {jerr:.1e}")

    def gns_minimality():
        rng = rng_for(107, 0)
        bad = 0
        for dim, p in ((1, 6), (2, 4)):
            gs = solve_ground_state(dim, p)
            if dim == 1:
                grid = np.linspace(-12.0, 12.0, 4801)
            else:
                grid = np.linspace(0.0, 12.0, 4801)
            for _ in range(100):
                f = _random_bump(rng, grid, dim)
                if gns_functional(grid, f, dim, p) < gs.j_min - 1e-9:
                    bad += 1
            phi = profile_function(gs)
            for lam in (0.5, 1.0, 2.0):
                scaled = phi(lam * np.abs(grid))
                jv = gns_functional(grid, scaled, dim, p)
                if abs(jv - gs.j_min) / gs.j_min > 1e-6:
                    bad += 1
        return bad == 0, f"{bad} violations (corpus and rescalings)"

    def disc_saturation():
        t = bessel_zeros(64)
        basis = radial_basis(t, 64)
        gs = solve_ground_state(2, 4)
        worst = 0.0
        for stream in range(100):
            f = sample_radial(108, stream, 64, t)
            worst = max(worst, disc_gns_check(f, basis, gs.sharp_constant))
        return worst <= 1.0 + 1e-9, f"max saturation ratio {worst:.6f}"

    def mgf_identity():
        for c, m in ((0.1, 1), (0.1, 8), (0.2, 4)):
            mc, se = tails.gaussian_mgf_mc(c, m, 200000, seed=109)
            exact = tails.gaussian_mgf(c, m)
            if abs(mc - exact) > 3 * se:
                return False, f"c={c} M={m}: {mc:.4f} vs {exact:.4f} (3se={3*se:.4f})"
        q = tails.gaussian_mgf_quadrature(0.3, 1)
        qd = abs(q - tails.gaussian_mgf(0.3, 1))
        return qd < 1e-10, f"MC within 3 sigma; quadrature defect {qd:.1e}"

    def chi2_lemma():
        curve = tails.chi2_tail_empirical(1, [3.0, 3.5], 10 ** 6, seed=110)
        oracle = 2 * (1 - normal_dist.cdf(3.0))
        dev = abs(curve.empirical[0] - oracle) / curve.err[0]
        dominated = np.all(curve.empirical <= curve.theoretical + 3 * curve.err)
        return dominated and dev < 3, (
            f"P(X^2>9)={curve.empirical[0]:.2e} vs oracle {oracle:.2e} "
            f"({dev:.1f} sigma), bound {curve.theoretical[0]:.2e}")

    def schedule_exactness():
        s1 = tails.dyadic_schedule(1.0, 3, 1.0 / 12, 6.0)
        s2 = tails.dyadic_schedule(2.0, 3, 1.0 / 12, 6.0)
        d = s1.partial_sum_defect()
        lin = np.max(np.abs(s2.values - 2 * s1.values))
        return d < 1e-12 and lin < 1e-12, (
            f"sum defect {d:.1e}, doubling defect {lin:.1e}")

    def high_freq_domination():
        c_hat = max(tails.bernstein_probe(j, 6.0, 2000, seed=111).c_hat
                    for j in (3, 4, 5))
        for k in (3, 4):
            curve = tails.high_freq_empirical_1d(
                k, [1.0, 2.0], 128, 10 ** 4, seed=112, bernstein_c=c_hat)
            ok = curve.empirical <= curve.theoretical + 3 * curve.err
            if not np.all(ok[curve.valid]):
                return False, f"violation at k={k}"
        return True, f"empirical under bound for k in (3,4), C_hat={c_hat:.3f}"

    def block_tail_domination():
        from .radial2d import block_l4_expectation

        t = bessel_zeros(64)
        norms = tails.block_norm_samples_2d(4, 3000, t, seed=113)
        fp = tails.fernique_probe(norms, [1.5, 2.0, 3.0])
        c_prime = min(fp.c_hat, 5.0)
        c4 = max(block_l4_expectation(j, 2000, t, seed=114)[0] * 2 ** (j / 2)
                 for j in (3, 4, 5))
        curve = tails.block_tail_empirical_2d(
            3, [1.0, 2.0], 64, 10 ** 4, t, seed=115, c_prime=c_prime, c4=c4)
        ok = np.all(curve.empirical <= curve.theoretical + 3 * curve.err)
        return bool(ok), (f"c'={c_prime:.3f}, C4={c4:.3f}, "
                          f"bounds {np.array2string(curve.theoretical, precision=3)}")

    def fernique_normal():
        x = np.abs(rng_for(116, 0).standard_normal(200000))
        ts = np.array([1.5, 2.0, 3.0])
        fp = tails.fernique_probe(x, ts)
        mean = math.sqrt(2 / math.pi)
        oracle = 2 * (1 - normal_dist.cdf(ts * mean))
        err = np.sqrt(oracle * (1 - oracle) / len(x))
        dev = np.max(np.abs(fp.empirical - oracle) / err)
        return dev < 3 and fp.c_hat > 0, f"max deviation {dev:.2f} sigma"

    def estimator_calibration():
        cutoff = 0.30
        cfg = gibbs.EnsembleConfig(dim=1, p=6, cutoff=cutoff, n_modes=32,
                                   n_samples=50000, seed=117, calibration=True)
        rep = gibbs.estimate_partition(cfg)
        if abs(rep.estimate - rep.fraction_inside_cutoff) > 1e-12:
            return False, "calibration estimate is not the inside fraction"
        # direct simulation of the cutoff event from the weighted chi-squares
        n = 50000
        w = 1.0 / (2 * np.pi * np.arange(1, 33)) ** 2
        hits = 0
        for s in range(0, n, 10000):
            g = np.stack([rng_for(118, i).standard_normal((32, 2))
                          for i in range(s, s + 10000)])
            l2 = np.sum(w[None, :, None] * g * g, axis=(1, 2))
            hits += int(np.sum(l2 <= cutoff ** 2))
        direct = hits / n
        se = math.sqrt(direct * (1 - direct) / n
                       + rep.estimate * (1 - rep.estimate) / cfg.n_samples)
        dev = abs(direct - rep.estimate) / se
        return dev < 3, f"fraction {rep.estimate:.4f} vs direct {direct:.4f} ({dev:.1f} sigma)"

    def estimator_determinism():
        cfg = gibbs.EnsembleConfig(dim=1, p=6, cutoff=1.0, n_modes=32,
                                   n_samples=20000, seed=119)
        a = gibbs.estimate_partition(cfg)
        b = gibbs.estimate_partition(cfg)
        same = (a.estimate == b.estimate and a.log_estimate == b.log_estimate
                and a.standard_error == b.standard_error)
        return same, "two runs bit-identical" if same else "reports differ"

    def estimator_monotone_in_cutoff():
        ests = []
        for cutoff in (0.2, 0.3, 0.5, 1.0, math.inf):
            cfg = gibbs.EnsembleConfig(dim=1, p=6, cutoff=cutoff, n_modes=32,
                                       n_samples=20000, seed=120)
            ests.append(gibbs.estimate_partition(cfg).estimate)
        ok = all(b >= a for a, b in zip(ests, ests[1:]))
        return ok, f"estimates {['%.5f' % e for e in ests]}"

    def importance_consistency():
        gs = solve_ground_state(1, 6)
        reps = []
        for sampler, seed in (("plain", 121), ("tilted", 122)):
            cfg = gibbs.EnsembleConfig(dim=1, p=6, cutoff=0.5 * gs.mass,
                                       n_modes=32, n_samples=50000, seed=seed,
                                       sampler=sampler)
            reps.append(gibbs.estimate_partition(cfg))
        if min(r.effective_sample_size for r in reps) <= 100:
            return False, "effective sample size too small to compare"
        dev = abs(reps[0].estimate - reps[1].estimate) / math.hypot(
            reps[0].standard_error, reps[1].standard_error)
        return dev < 3, f"plain vs tilted deviation {dev:.2f} sigma"

    def layer_cake():
        gsig = gibbs.EnsembleConfig(dim=1, p=4, cutoff=1.0, n_modes=16,
                                    n_samples=60000, seed=123)
        lams = np.concatenate([[0.0], np.linspace(0.05, 1.6, 32)])
        curve = gibbs.tail_curve(gsig, lams)
        rec = gibbs.layer_cake_reconstruct(curve, 4.0)
        direct = gibbs.estimate_partition(
            gibbs.EnsembleConfig(dim=1, p=4, cutoff=1.0, n_modes=16,
                                 n_samples=60000, seed=124))
        dev = abs(rec.estimate - direct.estimate) / math.hypot(
            rec.stderr, direct.standard_error)
        return dev < 3 and not rec.inconclusive, (
            f"reconstruction {rec.estimate:.5f} vs direct "
            f"{direct.estimate:.5f} ({dev:.1f} sigma)")

    def kernel_parity():
        from ._core import _kernels_py
        from ._core import _impl
        if _impl is _kernels_py:
            return True, "compiled backend absent; fallback in use"
        x = np.linspace(0.0, 300.0, 20001)
        d0 = np.max(np.abs(_impl.j0_array(x) - _kernels_py.j0_array(x)))
        d1 = np.max(np.abs(_impl.j1_array(x) - _kernels_py.j1_array(x)))
        v = rng_for(125, 0).standard_normal((64, 257))
        dp = np.max(np.abs(_impl.abs_power_mean(v, 6.0)
                           - _kernels_py.abs_power_mean(v, 6.0)))
        ok = d0 < 1e-13 and d1 < 1e-13 and dp < 1e-12
        return ok, f"j0 {d0:.1e}, j1 {d1:.1e}, power-mean {dp:.1e}"

    _check("spectral-realness", realness, results)
    _check("spectral-parseval", parseval, results)
    _check("projection-algebra", projection_algebra, results)
    _check("lp-monotone-in-p", lp_monotone, results)
    _check("dirichlet-chi-square-law", chi_square_law, results)
    _check("bessel-table-invariants", bessel_table, results)
    _check("disc-mode-orthonormality", orthonormality, results)
    _check("gradient-parseval-2d", gradient_parseval_2d, results)
    _check("ground-state-1d", ground_state_1d, results)
    _check("ground-state-2d", ground_state_2d, results)
    _check("gns-minimality", gns_minimality, results)
    _check("disc-gns-saturation", disc_saturation, results)
    _check("mgf-identity", mgf_identity, results)
    _check("chi-square-tail-lemma", chi2_lemma, results)
    _check("dyadic-schedule-exactness", schedule_exactness, results)
    _check("high-freq-tail-domination", high_freq_domination, results)
    _check("block-tail-2d-domination", block_tail_domination, results)
    _check("fernique-normal-oracle", fernique_normal, results)
    _check("estimator-calibration", estimator_calibration, results)
    _check("estimator-determinism", estimator_determinism, results)
    _check("estimator-monotone-in-cutoff", estimator_monotone_in_cutoff,
           results)
    _check("importance-consistency", importance_consistency, results)
    _check("layer-cake-consistency", layer_cake, results)
    _check("kernel-backend-parity", kernel_parity, results)
    return results


def _random_bump(rng, grid, dim):
    """Random smooth decaying test function for the minimality corpus."""
    f = np.zeros_like(grid)
    for _ in range(rng.integers(1, 4)):
        center = rng.uniform(0.0, 3.0) if dim == 2 else rng.uniform(-3.0, 3.0)
        width = rng.uniform(0.3, 2.0)
        amp = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
        f += amp * np.exp(-((grid - center) / width) ** 2)
    if dim == 2:
        f = f - f[-1]
        f *= np.exp(-(grid / 8.0) ** 4)
    return f


def junit_xml(results: list[CheckResult]) -> str:
    from xml.sax.saxutils import escape

    failures = sum(0 if r.passed else 1 for r in results)
    lines = ['<?xml version="1.0" encoding="utf-8"?>',
             f'<testsuite name="gibbslab-verify" tests="{len(results)}" '
             f'failures="{failures}">']
    for r in results:
        base = (f'  <testcase name="{escape(r.name)}" '
                f'time="{r.seconds:.3f}"')
        if r.passed:
            lines.append(base + " />")
        else:
            lines.append(base + ">")
            lines.append(f'    <failure message="{escape(r.measured)}" />')
            lines.append("  </testcase>")
    lines.append("</testsuite>")
    return "\n".join(lines)

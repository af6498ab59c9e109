"""Self-verification suites over random states and orbit parameters.

Each suite checks one family of identities on a given moment spectrum and
returns a result record; the command-line `verify` subcommand runs them all
and fails on any violation.  All residuals are compared as
|residual| <= tol * tolerance_scale(operand magnitudes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, equilibria, lyapunov, spectral

__all__ = ["SuiteResult", "run_all", "conservation_suite", "bracket_suite",
           "decomposition_suite", "closed_form_suite", "ordering_suite"]

DEFAULT_SEED = 20260810


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _states(rng, n, scale=2.0):
    return rng.uniform(-scale, scale, size=(n, 6))


def conservation_suite(lam: core.InertiaSpectrum, n: int = 300,
                       seed: int = DEFAULT_SEED) -> SuiteResult:
    """Field form agrees with the matrix commutator and annihilates every
    conserved-quantity gradient."""
    rng = np.random.default_rng(seed)
    worst_comm = 0.0
    worst_cons = 0.0
    for m in _states(rng, n):
        f = core.vector_field(m, lam)
        omega = core.embed(core.omega_from_m(m, lam))
        mm = core.embed(m)
        oracle = core.extract(mm @ omega - omega @ mm)
        denom = core.tolerance_scale(np.linalg.norm(m) ** 2)
        worst_comm = max(worst_comm, float(np.max(np.abs(f - oracle))) / denom)
        for name in core.INTEGRALS:
            g = core.integral_gradient(name, m, lam)
            s = core.tolerance_scale(np.linalg.norm(g) * np.linalg.norm(f))
            worst_cons = max(worst_cons, abs(float(g @ f)) / s)
    passed = worst_comm <= 1e-12 and worst_cons <= 1e-10
    return SuiteResult("conservation", passed,
                       f"commutator residual {worst_comm:.2e} (tol 1e-12), "
                       f"gradient-field residual {worst_cons:.2e} (tol 1e-10), n={n}")


def bracket_suite(lam: core.InertiaSpectrum, n: int = 300,
                  seed: int = DEFAULT_SEED) -> SuiteResult:
    """All conserved quantities commute with H, the Casimirs with everything."""
    rng = np.random.default_rng(seed + 1)
    pairs = [("H", g) for g in core.INTEGRALS]
    pairs += [("C1", g) for g in core.INTEGRALS]
    pairs += [("C2", g) for g in core.INTEGRALS]
    pairs += [("H", "H")]
    worst = 0.0
    for m in _states(rng, n):
        for f, g in pairs:
            val = core.poisson_bracket(f, g, m, lam)
            gf = np.linalg.norm(core.integral_gradient(f, m, lam))
            gg = np.linalg.norm(core.integral_gradient(g, m, lam))
            s = core.tolerance_scale(np.linalg.norm(m) * gf * gg)
            worst = max(worst, abs(val) / s)
    return SuiteResult("brackets", worst <= 1e-10,
                       f"worst scaled bracket {worst:.2e} (tol 1e-10), "
                       f"{len(pairs)} pairs x {n} states")


def decomposition_suite(lam: core.InertiaSpectrum, n: int = 300,
                        seed: int = DEFAULT_SEED, perturb: float = 0.0) -> SuiteResult:
    """G_k equals mu1*H + mu2*I + m'*C1 pointwise; `perturb` scales mu2 of G2
    away from its true value as a negative control."""
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for m in _states(rng, n):
        for k in (1, 2, 3, 4):
            d = core.popov_decomposition(k, lam)
            mu2 = d.mu2 * (1.0 + perturb) if k == 2 else d.mu2
            combo = (d.mu1 * core.integral_value("H", m, lam)
                     + mu2 * core.integral_value("I", m, lam)
                     + d.m_prime * core.integral_value("C1", m, lam))
            gk = core.integral_value(f"G{k}", m, lam)
            worst = max(worst, abs(gk - combo) / core.tolerance_scale(abs(gk)))
    return SuiteResult("decomposition", worst <= 1e-10,
                       f"worst scaled residual {worst:.2e} (tol 1e-10), n={n}")


def _random_ratio(rng, ft, margin=2e-2):
    """A ratio in [0, 1) at least `margin` away from both thresholds."""
    for _ in range(1000):
        r = rng.uniform(0.0, 0.999)
        if abs(r - ft.alpha1) > margin and abs(r - ft.alpha2) > margin:
            return r
    raise RuntimeError("could not sample a ratio away from the thresholds")


def spectrum_mismatch(expected, actual) -> float:
    """Worst pairing distance between two eigenvalue multisets, relative to
    the larger magnitude scale (greedy nearest matching)."""
    expected = list(np.asarray(expected, dtype=complex))
    actual = list(np.asarray(actual, dtype=complex))
    if len(expected) != len(actual):
        raise ValueError("spectra have different sizes")
    scale = max(1e-300, max(abs(z) for z in expected + actual))
    worst = 0.0
    for z in expected:
        dists = [abs(z - w) for w in actual]
        i = int(np.argmin(dists))
        worst = max(worst, dists[i])
        actual.pop(i)
    return worst / scale


def closed_form_suite(lam: core.InertiaSpectrum, n: int = 60,
                      seed: int = DEFAULT_SEED) -> SuiteResult:
    """Closed-form quartic data against the numeric restricted linearization,
    and the closed-form minors against numeric Hessian minors."""
    rng = np.random.default_rng(seed + 3)
    ft = spectral.f_tilde(lam)
    worst_eig = 0.0
    worst_delta = 0.0
    worst_minor = 0.0
    sq = lam.values ** 2
    for _ in range(n):
        a = rng.uniform(0.5, 3.0)
        r = _random_ratio(rng, ft)
        b = a * np.sqrt(r)
        quartic = spectral.char_quartic(lam, a, b)
        roots = spectral.quartic_eigenvalues(quartic)
        state = equilibria.cartan_state("t1", b, a)
        j4 = spectral.restrict_to_orbit(spectral.linearize(state, lam), state)
        worst_eig = max(worst_eig, spectrum_mismatch(roots, np.linalg.eigvals(j4)))
        fact = spectral.quartic_discriminant_factored(lam, a, b)
        delta_scale = core.tolerance_scale(quartic.v ** 2 + 4.0 * abs(quartic.u * quartic.w))
        worst_delta = max(worst_delta, abs(quartic.delta - fact) / delta_scale)
        # third-integral-based minors at the slot-major point
        eq = equilibria.Equilibrium("t1", a, b, equilibria.cartan_state("t1", a, b))
        mm, nn = lyapunov.solve_multipliers("G3", eq, lam)
        cert = lyapunov.restricted_hessian(lyapunov.LyapunovCandidate("G3", mm, nn), eq, lam)
        a2, b2 = a * a, b * b
        top = a2 * (sq[0] - sq[1]) + b2 * (sq[1] - sq[2])
        closed = np.array([
            2.0 * top / ((sq[0] - sq[2]) * (sq[1] - sq[2]) * (a2 - b2)),
            4.0 * a2 * top / ((sq[0] - sq[2]) * (sq[1] - sq[2]) ** 2 * (a2 - b2) ** 2),
            8.0 * a2 ** 2 * (sq[0] - sq[1]) / ((sq[0] - sq[2]) * (sq[1] - sq[2]) ** 3 * (a2 - b2) ** 2),
            16.0 * a2 ** 2 * (sq[0] - sq[1]) * (sq[1] - sq[3])
            / ((sq[0] - sq[2]) * (sq[2] - sq[3]) * (sq[1] - sq[2]) ** 4 * (a2 - b2) ** 2),
        ])
        worst_minor = max(worst_minor, float(np.max(
            np.abs(cert.minors - closed) / np.maximum(1.0, np.abs(closed)))))
    passed = worst_eig <= 1e-7 and worst_delta <= 1e-9 and worst_minor <= 1e-9
    return SuiteResult("closed-form", passed,
                       f"eigenvalue mismatch {worst_eig:.2e} (tol 1e-7), "
                       f"discriminant residual {worst_delta:.2e} (tol 1e-9), "
                       f"minor residual {worst_minor:.2e} (tol 1e-9), n={n}")


def ordering_suite(lam: core.InertiaSpectrum, n: int = 40,
                   seed: int = DEFAULT_SEED) -> SuiteResult:
    """Root orderings and window feasibility of the p-interval machinery."""
    ft = spectral.f_tilde(lam)
    if ft.alpha2 >= 1.0 - 1e-9:
        return SuiteResult("orderings", True,
                           "skipped: alpha2 = 1 for this spectrum (no stable band)")
    rng = np.random.default_rng(seed + 4)
    ok = True
    notes = []
    for _ in range(n):
        a = rng.uniform(0.5, 3.0)
        r = rng.uniform(ft.alpha2 + 5e-3, 0.995)
        b = a * np.sqrt(r)
        rep = lyapunov.p_interval(lam, a, b)
        coef = rep.coefficients
        if rep.case_tag == "case-i":
            ordered = rep.p2 < rep.p1 < rep.p3 < rep.p4
            lemma = rep.p1 < -coef.t3 / (2.0 * coef.s3)
        else:
            ordered = rep.p3 < rep.p4 < rep.p2 < rep.p1
            lemma = rep.p2 > -coef.t3 / (2.0 * coef.s3)
        gpos = coef.g(rep.p1) > 0.0 and coef.g(rep.p2) > 0.0
        mid = 0.5 * (rep.p3 + rep.p4)
        window = coef.d1(mid, a, b) > 0.0 and coef.d2(mid, a, b) > 0.0 and coef.g(mid) < 0.0
        if not (ordered and lemma and gpos and window):
            ok = False
            notes.append(f"violation at a={a:.4f}, r={r:.6f}")
            break
    boundary = lyapunov.p_interval(lam, 1.0, float(np.sqrt(ft.alpha2)))
    if boundary.feasible is not None:
        ok = False
        notes.append("window not closed at the threshold")
    case = lyapunov.p_interval(lam, 1.0, float(np.sqrt((ft.alpha2 + 1.0) / 2.0))).case_tag
    detail = f"{case} orderings, lemmas, window signs on {n} draws; threshold window closed"
    if notes:
        detail += "; " + "; ".join(notes)
    return SuiteResult("orderings", ok, detail)


def run_all(lam: core.InertiaSpectrum, seed: int = DEFAULT_SEED,
            perturb_decomposition: float = 0.0) -> list:
    return [
        conservation_suite(lam, seed=seed),
        bracket_suite(lam, seed=seed),
        decomposition_suite(lam, seed=seed, perturb=perturb_decomposition),
        closed_form_suite(lam, seed=seed),
        ordering_suite(lam, seed=seed),
    ]

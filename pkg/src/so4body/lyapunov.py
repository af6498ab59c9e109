"""Lyapunov certificates for the nonlinearly stable Cartan equilibria.

A candidate function is a conserved base quantity plus multiples of the two
Casimirs, F = base + m*C1 + n*C2.  The multipliers (m, n) are chosen so the
gradient of F vanishes at the equilibrium; stability is certified when the
constant Hessian of F, restricted to the orbit tangent space W, is definite.

The working bases are:

* G3 for t1 equilibria with the larger slot value in the x1 position,
* G1 / G4 for t3 equilibria (larger / smaller value in the x3 position),
* the one-parameter family H + p * kappa * I (kappa a fixed moment product)
  for the bifurcating t1 equilibria with ratio r = b^2/a^2 above the
  spectral threshold alpha2.  Definiteness holds exactly for p inside an
  open window (p3, p4) cut out by one quadratic and two linear conditions
  in p; the window closes at r = alpha2.

H and I are accepted as bases as well: the H-based candidate is definite
only under restrictive moment conditions and the I-based candidate is
never definite at the t1 points, which the tests pin down as negative
controls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    InertiaSpectrum,
    quadratic_form,
    tolerance_scale,
)
from .equilibria import FAMILY_SLOTS, Equilibrium, cartan_state
from .spectral import (
    BOUNDARY_TOL,
    SPECTRALLY_UNSTABLE,
    SpectralVerdict,
    classify_spectral,
    f_tilde,
)

__all__ = [
    "BASES",
    "POSITIVE_DEFINITE", "NEGATIVE_DEFINITE", "INDEFINITE", "DEGENERATE",
    "NONLINEARLY_STABLE", "UNSTABLE", "UNDECIDABLE",
    "CertificationError",
    "LyapunovCandidate", "HessianCertificate", "PCoefficients",
    "PIntervalReport", "StabilityCertificate",
    "scaled_mix_coefficient", "candidate_hessian", "solve_multipliers",
    "restricted_hessian", "certify_center_center",
    "p_coefficients", "p_interval", "certify_bifurcation",
]

# Allowed base quantities for a candidate F = base + m*C1 + n*C2.  "H+pI"
# stands for H + p * kappa * I with kappa = scaled_mix_coefficient(lam).
BASES = ("G1", "G2", "G3", "G4", "H", "I", "H+pI")

POSITIVE_DEFINITE = "positive-definite"
NEGATIVE_DEFINITE = "negative-definite"
INDEFINITE = "indefinite"
DEGENERATE = "degenerate"

NONLINEARLY_STABLE = "nonlinearly-stable"
UNSTABLE = "unstable"
UNDECIDABLE = "undecidable"


class CertificationError(RuntimeError):
    """A certificate that the theory guarantees could not be produced."""


@dataclass(frozen=True)
class LyapunovCandidate:
    """F = base + m*C1 + n*C2, with p set only for the "H+pI" base."""

    base: str
    m: float
    n: float
    p: float | None = None

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"base must be one of {BASES}, got {self.base!r}")
        if (self.base == "H+pI") != (self.p is not None):
            raise ValueError("p is required for base 'H+pI' and disallowed otherwise")


@dataclass(frozen=True, eq=False)
class HessianCertificate:
    """Restricted Hessian data on the canonical W basis: leading principal
    minors, eigenvalues, and the definiteness tag."""

    minors: np.ndarray
    eigenvalues: np.ndarray
    definiteness: str


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    """Verdict for one equilibrium, with the Lyapunov witness when one exists."""

    verdict: str
    base: str | None = None
    m: float | None = None
    n: float | None = None
    p: float | None = None
    p_window: tuple | None = None
    hessian: HessianCertificate | None = None
    spectral: SpectralVerdict | None = None
    note: str = ""


def scaled_mix_coefficient(lam: InertiaSpectrum) -> float:
    """kappa = 1 / (2 (l1+l3)(l1+l4)(l3+l4)), the I-weight of the base H + p*kappa*I."""
    l1, _, l3, l4 = lam.values
    return 1.0 / (2.0 * (l1 + l3) * (l1 + l4) * (l3 + l4))


def _base_form(base: str, lam: InertiaSpectrum, p: float | None) -> np.ndarray:
    if base == "H+pI":
        if p is None:
            raise ValueError("base 'H+pI' requires p")
        return quadratic_form("H", lam) + p * scaled_mix_coefficient(lam) * quadratic_form("I", lam)
    if base in ("C1", "C2"):
        raise ValueError(f"base {base!r} is not allowed: Casimirs enter through (m, n)")
    if base not in BASES:
        raise ValueError(f"base must be one of {BASES}, got {base!r}")
    return quadratic_form(base, lam)


def candidate_hessian(cand: LyapunovCandidate, lam: InertiaSpectrum) -> np.ndarray:
    """Constant 6x6 Hessian of F = base + m*C1 + n*C2."""
    return (
        _base_form(cand.base, lam, cand.p)
        + cand.m * quadratic_form("C1", lam)
        + cand.n * quadratic_form("C2", lam)
    )


def solve_multipliers(base: str, eq: Equilibrium, lam: InertiaSpectrum,
                      p: float | None = None) -> tuple:
    """Multipliers (m, n) making the gradient of F vanish at eq.state.

    On the active coordinate pair the condition is the 2x2 linear system
    [[a, b], [b, a]] (m, n)^T = -grad(base); it is singular exactly on
    non-regular orbits a^2 = b^2, which are rejected.
    """
    a, b = eq.a, eq.b
    det = a * a - b * b
    if det == 0.0 or abs(det) <= 1e-15 * (a * a + b * b):
        raise ValueError(f"multiplier system is singular at a^2 = b^2 (a={a}, b={b})")
    form = _base_form(base, lam, p)
    grad = form @ eq.state
    u, v = FAMILY_SLOTS[eq.family]
    g0, g1 = grad[u], grad[v]
    m = (-a * g0 + b * g1) / det
    n = (b * g0 - a * g1) / det
    return float(m), float(n)


# Canonical ordered W slots per family: the four coordinate directions
# complementary to the active plane.  This ordering is what reproduces the
# closed-form leading minors.
_W_SLOTS = {
    "t1": (1, 2, 4, 5),
    "t2": (0, 2, 3, 5),
    "t3": (0, 1, 3, 4),
}


def restricted_hessian(cand: LyapunovCandidate, eq: Equilibrium,
                       lam: InertiaSpectrum) -> HessianCertificate:
    """Hessian of the candidate restricted to W, on the canonical coordinate
    basis of eq's family.

    Requires the multipliers to be already solved: the full gradient of F at
    eq.state must vanish (relative residual below 1e-11).
    """
    form = candidate_hessian(cand, lam)
    grad = form @ eq.state
    scale = tolerance_scale(np.linalg.norm(eq.state) * np.max(np.abs(form)))
    if np.max(np.abs(grad)) > 1e-11 * scale:
        raise ValueError("candidate gradient does not vanish at the equilibrium; "
                         "solve the multipliers first")
    slots = _W_SLOTS[eq.family]
    hw = form[np.ix_(slots, slots)]
    minors = np.array([np.linalg.det(hw[:k, :k]) for k in range(1, 5)])
    eigenvalues = np.linalg.eigvalsh(hw)
    emax = float(np.max(np.abs(eigenvalues)))
    # Degenerate = some eigenvalue vanishes relative to the matrix scale
    # (equivalently, |det| falls below 1e-12 times the product scale of the
    # remaining eigenvalues).
    if float(np.min(np.abs(eigenvalues))) <= 1e-12 * max(1.0, emax):
        tag = DEGENERATE
    elif np.all(eigenvalues > 0.0):
        tag = POSITIVE_DEFINITE
    elif np.all(eigenvalues < 0.0):
        tag = NEGATIVE_DEFINITE
    else:
        tag = INDEFINITE
    return HessianCertificate(minors=minors, eigenvalues=eigenvalues, definiteness=tag)


# Base quantity certifying each non-bifurcating center-center family, keyed
# by (family, whether the x-slot holds the larger orbit value).
_CENTER_CENTER_BASE = {
    ("t1", True): "G3",
    ("t3", True): "G1",
    ("t3", False): "G4",
}


def certify_center_center(eq: Equilibrium, lam: InertiaSpectrum) -> StabilityCertificate:
    """Definite certificate for the unconditionally stable Cartan equilibria.

    Accepts t1 equilibria with the larger slot value in the x position
    (base G3) and all four t3 equilibria (base G1 or G4).  The t2 points are
    unstable and the slot-minor t1 points bifurcate; both are rejected here.
    """
    slot_major = abs(eq.a) > abs(eq.b)
    base = _CENTER_CENTER_BASE.get((eq.family, slot_major))
    if base is None:
        if eq.family == "t1":
            raise ValueError("t1 equilibrium with the smaller value in the x1 slot "
                             "bifurcates; use certify_bifurcation")
        raise ValueError(f"no center-center certificate for family {eq.family!r}")
    m, n = solve_multipliers(base, eq, lam)
    cand = LyapunovCandidate(base=base, m=m, n=n)
    hess = restricted_hessian(cand, eq, lam)
    if hess.definiteness not in (POSITIVE_DEFINITE, NEGATIVE_DEFINITE):
        raise CertificationError(
            f"{base} candidate unexpectedly {hess.definiteness} at {eq}"
        )
    return StabilityCertificate(
        verdict=NONLINEARLY_STABLE, base=base, m=m, n=n, hessian=hess,
    )


@dataclass(frozen=True)
class PCoefficients:
    """Closed-form coefficients of the definiteness conditions in p.

    d1(p) = (s1*a^2 - t1*b^2) p + s1p*a^2 + t1p*b^2   (first minor, rescaled)
    d2(p) = (s2*a^2 - t2*b^2) p + s2p*a^2 + t2p*b^2   (second minor factor)
    g(p)  = s3 p^2 + t3 p + u3                        (third/fourth minor factor)
    """

    s1: float
    t1: float
    s1p: float
    t1p: float
    s2: float
    t2: float
    s2p: float
    t2p: float
    s3: float
    t3: float
    u3: float

    def d1(self, p: float, a: float, b: float) -> float:
        return (self.s1 * a * a - self.t1 * b * b) * p + self.s1p * a * a + self.t1p * b * b

    def d2(self, p: float, a: float, b: float) -> float:
        return (self.s2 * a * a - self.t2 * b * b) * p + self.s2p * a * a + self.t2p * b * b

    def g(self, p: float) -> float:
        return (self.s3 * p + self.t3) * p + self.u3


def p_coefficients(lam: InertiaSpectrum, a: float, b: float) -> PCoefficients:
    l1, l2, l3, l4 = lam.values
    a2, b2 = a * a, b * b
    s1 = (l2 + l3) * (l3 * l3 - l4 * l4)
    t1 = (l2 + l3) * (l1 * l1 - l2 * l2)
    s1p = -(l2 + l3) * (l3 * l3 - l4 * l4)
    t1p = (l1 - l2) * (l1 + l4) * (l3 + l4)
    s2 = (l1 + l2) * (l2 + l3) * (l2 * l2 - l4 * l4)
    t2 = (l1 + l2) * (l2 + l3) * (l1 * l1 - l3 * l3)
    s2p = -(l1 + l3) * (l2 + l3) * (l3 + l4) * (l2 - l4)
    t2p = (l1 + l3) * (l1 + l4) * (l3 + l4) * (l1 - l3)
    s3 = (l1 + l2) * (l2 + l4) * (l2 + l3) ** 2 * (a2 - b2)
    # The t3 normalization is pinned by the discriminant identity
    # t3^2 - 4*s3*u3 = (sum of moments)^2 (l2+l3)^2 a^4 ftilde(b^2/a^2),
    # which the tests verify.
    t3 = -(l2 + l3) * (
        (l2 + l3) * ((l1 + l2) * (l2 + l4) + (l1 + l3) * (l3 + l4)) * a2
        - (l1 + l4) * ((l1 + l2) * (l1 + l3) + (l2 + l4) * (l3 + l4)) * b2
    )
    u3 = (l1 + l3) * (l3 + l4) * ((l2 + l3) ** 2 * a2 - (l1 + l4) ** 2 * b2)
    return PCoefficients(s1, t1, s1p, t1p, s2, t2, s2p, t2p, s3, t3, u3)


@dataclass(frozen=True, eq=False)
class PIntervalReport:
    """Roots of the definiteness conditions and the admissible p window.

    p1, p2 are the roots of the two linear conditions; p3 <= p4 those of the
    quadratic.  feasible is the open interval (p3, p4) when the ratio
    b^2/a^2 exceeds alpha2, and None when the window is closed (ratio at
    alpha2, vanishing quadratic discriminant).
    """

    p1: float
    p2: float
    p3: float
    p4: float
    case_tag: str
    feasible: tuple | None
    delta3: float
    coefficients: PCoefficients


def p_interval(lam: InertiaSpectrum, a: float, b: float,
               exact_boundary: bool = False) -> PIntervalReport:
    """Admissible p window for the bifurcating t1 equilibrium with slots (b, a).

    Requires r = b^2/a^2 in [alpha2, 1) and moments with
    lambda1^2 + lambda4^2 != lambda2^2 + lambda3^2 (so that alpha2 < 1).
    """
    ft = f_tilde(lam)
    if ft.alpha2 >= 1.0 - 1e-12:
        raise ValueError("threshold alpha2 = 1: the squared-moment pair sums "
                         "coincide and no stable band exists")
    r = (b * b) / (a * a)
    if r >= 1.0:
        raise ValueError(f"ratio b^2/a^2 must be below 1, got {r}")
    at_boundary = exact_boundary or abs(r - ft.alpha2) <= BOUNDARY_TOL
    if not at_boundary and r < ft.alpha2:
        raise ValueError(f"ratio b^2/a^2 = {r} is below the stability threshold "
                         f"alpha2 = {ft.alpha2}")
    l1, l2, l3, l4 = lam.values
    coef = p_coefficients(lam, a, b)
    a2, b2 = a * a, b * b
    p1 = -(coef.s1p * a2 + coef.t1p * b2) / (coef.s1 * a2 - coef.t1 * b2)
    p2 = -(coef.s2p * a2 + coef.t2p * b2) / (coef.s2 * a2 - coef.t2 * b2)
    case_tag = "case-i" if l1 * l1 + l4 * l4 < l2 * l2 + l3 * l3 else "case-ii"
    delta3 = coef.t3 * coef.t3 - 4.0 * coef.s3 * coef.u3
    if at_boundary:
        vertex = -coef.t3 / (2.0 * coef.s3)
        return PIntervalReport(p1=p1, p2=p2, p3=vertex, p4=vertex,
                               case_tag=case_tag, feasible=None,
                               delta3=delta3, coefficients=coef)
    root = np.sqrt(delta3)
    big = -(coef.t3 + root) / 2.0 if coef.t3 >= 0.0 else -(coef.t3 - root) / 2.0
    r1 = big / coef.s3
    r2 = coef.u3 / big
    p3, p4 = (r1, r2) if r1 <= r2 else (r2, r1)
    return PIntervalReport(p1=p1, p2=p2, p3=p3, p4=p4, case_tag=case_tag,
                           feasible=(p3, p4), delta3=delta3, coefficients=coef)


def certify_bifurcation(lam: InertiaSpectrum, a: float, b: float,
                        p: float | None = None) -> StabilityCertificate:
    """Stability verdict for the t1 equilibrium with slots (b, a) on the
    orbit of (a, b).

    Above the threshold alpha2 the H + p*kappa*I candidate is solved at the
    midpoint of the admissible window (or at a caller-supplied p) and must
    come out positive definite.  At the threshold the conserved quantities
    cannot decide and the verdict is "undecidable"; below it the point is
    spectrally unstable and that witness is returned.
    """
    r = (b * b) / (a * a)
    if not (0.0 <= r < 1.0):
        raise ValueError(f"ratio b^2/a^2 must lie in [0, 1), got {r}")
    spec = classify_spectral(lam, a, b)
    ft = f_tilde(lam)
    if spec.verdict == SPECTRALLY_UNSTABLE:
        return StabilityCertificate(
            verdict=UNSTABLE, spectral=spec,
            note="spectral witness: an eigenvalue with positive real part",
        )
    if abs(r - ft.alpha2) <= BOUNDARY_TOL:
        report = p_interval(lam, a, b)
        return StabilityCertificate(
            verdict=UNDECIDABLE, spectral=spec, p_window=report.feasible,
            note="unstable per the known classification; not certifiable with "
                 "the conserved quantities {H, I, C1, C2}",
        )
    report = p_interval(lam, a, b)
    p_sel = 0.5 * (report.p3 + report.p4) if p is None else float(p)
    eq = Equilibrium("t1", b, a, cartan_state("t1", b, a))
    m, n = solve_multipliers("H+pI", eq, lam, p=p_sel)
    cand = LyapunovCandidate(base="H+pI", m=m, n=n, p=p_sel)
    hess = restricted_hessian(cand, eq, lam)
    if hess.definiteness != POSITIVE_DEFINITE:
        raise CertificationError(
            f"H+pI candidate at p={p_sel} is {hess.definiteness}, not positive definite"
        )
    return StabilityCertificate(
        verdict=NONLINEARLY_STABLE, base="H+pI", m=m, n=n, p=p_sel,
        p_window=report.feasible, hessian=hess, spectral=spec,
    )

"""Linearized stability of the bifurcating Cartan equilibria.

For a t1 equilibrium whose x1 slot holds the smaller orbit value b (ratio
r = b^2/a^2 in [0, 1)), the linearization restricted to the orbit has
characteristic polynomial u t^4 + v t^2 + w with closed-form coefficients
in the moments and (a, b).  The stability bands in r are cut by the roots
alpha1 < alpha2 of a fixed quadratic in the squared moments: real pairs
below alpha1, a focus-focus quadruple between alpha1 and alpha2, and two
imaginary pairs (spectral stability) from alpha2 up to 1.  When
lambda1*lambda4 = lambda2*lambda3 the quartic discriminant vanishes
identically and all roots are double; the stability threshold is still
alpha2 = S/T, which then equals (lambda2+lambda3)^2 / (lambda1+lambda4)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    InertiaSpectrum,
    as_state,
    field_coefficients,
    tolerance_scale,
)

__all__ = [
    "SPECTRALLY_STABLE", "SPECTRALLY_UNSTABLE",
    "SADDLE_SADDLE", "FOCUS_FOCUS", "CENTER_CENTER", "CENTER_SADDLE",
    "DEGENERATE_DOUBLE_REAL", "DEGENERATE_ZERO", "DOUBLE_IMAGINARY",
    "FTildeData", "CharQuartic", "SpectralVerdict",
    "f_tilde", "char_quartic", "quartic_eigenvalues",
    "quartic_discriminant_factored",
    "linearize", "orbit_tangent_basis", "restrict_to_orbit",
    "classify_spectral", "classify_eigenstructure",
]

SPECTRALLY_STABLE = "spectrally-stable"
SPECTRALLY_UNSTABLE = "spectrally-unstable"

SADDLE_SADDLE = "saddle-saddle"
FOCUS_FOCUS = "focus-focus"
CENTER_CENTER = "center-center"
CENTER_SADDLE = "center-saddle"
DEGENERATE_DOUBLE_REAL = "degenerate-double-real"
DEGENERATE_ZERO = "degenerate-zero"
DOUBLE_IMAGINARY = "double-imaginary"

# Absolute tolerance deciding membership in the boundary sets {alpha1}, {alpha2}.
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class FTildeData:
    """Quadratic s_tilde*t^2 + t_tilde*t + u_tilde whose roots alpha1 < alpha2
    are the stability thresholds in r = b^2/a^2."""

    s_tilde: float
    t_tilde: float
    u_tilde: float
    alpha1: float
    alpha2: float

    def evaluate(self, t: float) -> float:
        return (self.s_tilde * t + self.t_tilde) * t + self.u_tilde

    @property
    def discriminant(self) -> float:
        return self.t_tilde ** 2 - 4.0 * self.s_tilde * self.u_tilde


def f_tilde(lam: InertiaSpectrum) -> FTildeData:
    sq = lam.values ** 2
    s = (sq[0] - sq[3]) ** 2
    u = (sq[1] - sq[2]) ** 2
    t = -2.0 * ((sq[0] - sq[1]) * (sq[2] - sq[3]) + (sq[0] - sq[2]) * (sq[1] - sq[3]))
    disc = t * t - 4.0 * s * u
    # disc > 0 for any valid spectrum; factored form checked in tests
    root_big = (-t + np.sqrt(disc)) / 2.0
    return FTildeData(s_tilde=float(s), t_tilde=float(t), u_tilde=float(u),
                      alpha1=float(u / root_big), alpha2=float(root_big / s))


@dataclass(frozen=True)
class CharQuartic:
    """Closed-form data of the restricted characteristic polynomial
    u t^4 + v t^2 + w at a t1 equilibrium with slots (b, a)."""

    u: float
    v: float
    w: float
    S: float
    T: float
    E1: float
    E2: float
    delta: float


def char_quartic(lam: InertiaSpectrum, a: float, b: float) -> CharQuartic:
    if a == 0.0:
        raise ValueError("slot value a must be nonzero")
    if abs(a * a - b * b) <= 1e-15 * (a * a + b * b):
        raise ValueError(f"slot values must satisfy a != +-b, got ({a}, {b})")
    l1, l2, l3, l4 = lam.values
    s14 = l1 + l4
    s23 = l2 + l3
    e1 = (l1 * l1 + l2 * l3) * (l4 * l4 + l2 * l3) - l1 * l4 * s23 ** 2
    e2 = -(l2 * l2 + l1 * l4) * (l3 * l3 + l1 * l4) + l2 * l3 * s14 ** 2
    big_s = s23 ** 2 * e2
    big_t = s14 ** 2 * e1
    u = (l1 + l2) * (l1 + l3) * s14 ** 4 * s23 ** 4 * (l2 + l4) * (l3 + l4)
    w = (
        (l1 - l2) * (l1 - l3) * (l2 - l4) * (l3 - l4)
        * (s23 ** 2 * a * a - s14 ** 2 * b * b) ** 2
    )
    v = -2.0 * s14 ** 2 * s23 ** 2 * (big_s * a * a - big_t * b * b)
    delta = v * v - 4.0 * u * w
    return CharQuartic(u=u, v=v, w=w, S=big_s, T=big_t, E1=e1, E2=e2, delta=delta)


def quartic_discriminant_factored(lam: InertiaSpectrum, a: float, b: float) -> float:
    """Factored form of v^2 - 4uw; vanishes iff lambda1*lambda4 = lambda2*lambda3
    or r = b^2/a^2 hits a threshold."""
    l1, l2, l3, l4 = lam.values
    r = (b * b) / (a * a)
    return (
        4.0 * (l1 + l4) ** 6 * (l2 + l3) ** 6
        * (l1 * l4 - l2 * l3) ** 2 * a ** 4 * f_tilde(lam).evaluate(r)
    )


def quartic_eigenvalues(q: CharQuartic) -> np.ndarray:
    """The four roots of u t^4 + v t^2 + w, via the stable quadratic in s = t^2."""
    if q.delta >= 0.0:
        root = np.sqrt(q.delta)
        big = -(q.v + root) / 2.0 if q.v >= 0.0 else -(q.v - root) / 2.0
        if big == 0.0:
            s_roots = [0.0 + 0.0j, 0.0 + 0.0j]
        else:
            s_roots = [complex(big / q.u), complex(q.w / big)]
    else:
        root = np.sqrt(-q.delta)
        s_roots = [
            (-q.v + 1j * root) / (2.0 * q.u),
            (-q.v - 1j * root) / (2.0 * q.u),
        ]
    eigs = []
    for s in s_roots:
        t = np.sqrt(s)
        eigs.extend([t, -t])
    return np.array(eigs, dtype=complex)


def linearize(m, lam: InertiaSpectrum) -> np.ndarray:
    """Jacobian of :func:`so4body.core.vector_field` at m (analytic partials)."""
    x1, x2, x3, y1, y2, y3 = as_state(m)
    c = field_coefficients(lam)
    j = np.zeros((6, 6))
    j[0, 1] = c[0] * x3; j[0, 2] = c[0] * x2; j[0, 4] = c[1] * y3; j[0, 5] = c[1] * y2
    j[1, 0] = c[2] * x3; j[1, 2] = c[2] * x1; j[1, 3] = c[3] * y3; j[1, 5] = c[3] * y1
    j[2, 0] = c[4] * x2; j[2, 1] = c[4] * x1; j[2, 3] = c[5] * y2; j[2, 4] = c[5] * y1
    j[3, 1] = c[6] * y3; j[3, 5] = c[6] * x2; j[3, 2] = c[7] * y2; j[3, 4] = c[7] * x3
    j[4, 0] = c[8] * y3; j[4, 5] = c[8] * x1; j[4, 2] = c[9] * y1; j[4, 3] = c[9] * x3
    j[5, 0] = c[10] * y2; j[5, 4] = c[10] * x1; j[5, 1] = c[11] * y1; j[5, 3] = c[11] * x2
    return j


def _casimir_gradients(m: np.ndarray) -> tuple:
    """Gradients of the two Casimirs at m: the state itself and its x/y swap."""
    g1 = m.copy()
    g2 = np.concatenate([m[3:], m[:3]])
    return g1, g2


def orbit_tangent_basis(m) -> np.ndarray:
    """Deterministic orthonormal basis (columns) of the orbit tangent space
    W = ker dC1 intersect ker dC2 at m.

    Construction: orthonormalize the two Casimir gradients, then sweep the six
    coordinate directions in order, keeping the four that survive projection.
    At a Cartan point this returns exactly the four coordinate directions
    complementary to the active plane, in coordinate order.
    """
    m = as_state(m)
    g1, g2 = _casimir_gradients(m)
    frame = []
    for v in [g1, g2]:
        u = v.astype(float)
        for q in frame:
            u = u - (q @ u) * q
        norm = np.linalg.norm(u)
        if norm <= 1e-12 * max(1.0, np.linalg.norm(v)):
            raise ValueError("Casimir gradients are linearly dependent (singular orbit point)")
        frame.append(u / norm)
    basis = []
    for k in range(6):
        u = np.zeros(6)
        u[k] = 1.0
        for q in frame:
            u = u - (q @ u) * q
        norm = np.linalg.norm(u)
        if norm > 1e-10:
            u = u / norm
            frame.append(u)
            basis.append(u)
        if len(basis) == 4:
            break
    if len(basis) != 4:
        raise ValueError("failed to build a 4-dimensional orbit tangent basis")
    return np.column_stack(basis)


def restrict_to_orbit(j, m) -> np.ndarray:
    """Restriction of a linearization j to the orbit tangent space at m,
    expressed on the deterministic basis of :func:`orbit_tangent_basis`."""
    basis = orbit_tangent_basis(m)
    return basis.T @ np.asarray(j, dtype=float) @ basis


@dataclass(frozen=True)
class SpectralVerdict:
    """Outcome of the closed-form spectral classification at a t1 point with
    slots (b, a)."""

    verdict: str
    eigenstructure: str
    eigenvalues: np.ndarray
    r: float
    alpha1: float
    alpha2: float
    note: str = ""

    @property
    def max_real_part(self) -> float:
        return float(np.max(self.eigenvalues.real))


def _is_product_degenerate(lam: InertiaSpectrum) -> bool:
    """True when lambda1*lambda4 = lambda2*lambda3 (identically zero quartic
    discriminant; all restricted eigenvalues double)."""
    l1, l2, l3, l4 = lam.values
    return abs(l1 * l4 - l2 * l3) <= 1e-12 * tolerance_scale(l1 * l4)


def classify_spectral(lam: InertiaSpectrum, a: float, b: float,
                      exact_boundary: str | None = None) -> SpectralVerdict:
    """Spectral verdict for the equilibrium with the smaller slot value b in
    the x1 position and the larger value a in the y1 position.

    The ratio r = b^2/a^2 must lie in [0, 1).  Membership in the boundary
    sets {alpha1}, {alpha2} is decided within BOUNDARY_TOL; callers holding
    an exact boundary case pass exact_boundary="alpha1" or "alpha2" instead.
    """
    if exact_boundary not in (None, "alpha1", "alpha2"):
        raise ValueError(f"unknown exact_boundary tag {exact_boundary!r}")
    if a == 0.0:
        raise ValueError("slot value a must be nonzero")
    r = (b * b) / (a * a)
    if not (0.0 <= r < 1.0):
        raise ValueError(f"ratio b^2/a^2 must lie in [0, 1), got {r}")
    ft = f_tilde(lam)
    quartic = char_quartic(lam, a, b)
    eigs = quartic_eigenvalues(quartic)
    w_scale = tolerance_scale(abs(quartic.u) * (a * a + b * b) ** 2)
    w_zero = abs(quartic.w) <= 1e-12 * w_scale
    at_a1 = exact_boundary == "alpha1" or abs(r - ft.alpha1) <= BOUNDARY_TOL
    at_a2 = exact_boundary == "alpha2" or abs(r - ft.alpha2) <= BOUNDARY_TOL

    def verdictof(stable, structure, note=""):
        return SpectralVerdict(
            verdict=SPECTRALLY_STABLE if stable else SPECTRALLY_UNSTABLE,
            eigenstructure=structure,
            eigenvalues=eigs,
            r=r,
            alpha1=ft.alpha1,
            alpha2=ft.alpha2,
            note=note,
        )

    if _is_product_degenerate(lam):
        # Identically vanishing discriminant: double roots throughout, and
        # the threshold alpha2 = S/T is strictly below 1.
        if at_a2:
            return verdictof(True, DEGENERATE_ZERO,
                             "zero eigenvalue of multiplicity four; nilpotent "
                             "behavior is not excluded by the spectrum")
        if r < ft.alpha2:
            return verdictof(False, DEGENERATE_DOUBLE_REAL)
        return verdictof(True, DOUBLE_IMAGINARY)

    if at_a1:
        return verdictof(False, DEGENERATE_DOUBLE_REAL)
    if r < ft.alpha1:
        if w_zero:
            return verdictof(False, DEGENERATE_ZERO,
                             "zero eigenvalue pair on the orbit")
        return verdictof(False, SADDLE_SADDLE)
    if at_a2 and ft.alpha2 < 1.0:
        return verdictof(True, DOUBLE_IMAGINARY)
    if r < ft.alpha2:
        return verdictof(False, FOCUS_FOCUS)
    if w_zero:
        return verdictof(True, DEGENERATE_ZERO,
                         "zero eigenvalue pair on the orbit")
    return verdictof(True, CENTER_CENTER)


def classify_eigenstructure(eigs, tol: float = 1e-8) -> str:
    """Eigenvalue-pattern tag of a 4-dimensional linear Hamiltonian spectrum.

    The input must be closed under negation and conjugation within tol;
    coincident pairs are flagged with the degenerate tags rather than being
    forced into a generic pattern.
    """
    eigs = np.asarray(eigs, dtype=complex)
    if eigs.shape != (4,):
        raise ValueError(f"expected four eigenvalues, got shape {eigs.shape}")
    scale = float(np.max(np.abs(eigs)))
    cutoff = tol * max(1.0, scale)
    if scale <= tol:
        return DEGENERATE_ZERO
    for e in eigs:
        if np.min(np.abs(eigs + e)) > cutoff:
            raise ValueError(f"spectrum is not closed under negation: {eigs}")
    if np.any(np.abs(eigs) <= cutoff):
        return DEGENERATE_ZERO
    real = [e for e in eigs if abs(e.imag) <= cutoff]
    imag = [e for e in eigs if abs(e.real) <= cutoff and abs(e.imag) > cutoff]
    if len(real) == 4:
        p = sorted(abs(e.real) for e in eigs)
        return DEGENERATE_DOUBLE_REAL if p[3] - p[0] <= cutoff else SADDLE_SADDLE
    if len(imag) == 4:
        p = sorted(abs(e.imag) for e in eigs)
        return DOUBLE_IMAGINARY if p[3] - p[0] <= cutoff else CENTER_CENTER
    if len(real) == 2 and len(imag) == 2:
        return CENTER_SADDLE
    if not real and not imag:
        return FOCUS_FOCUS
    raise ValueError(f"spectrum is not closed under conjugation: {eigs}")

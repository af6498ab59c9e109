"""Equilibrium set of the so(4) free rigid body.

Every equilibrium lies in one of five families: the three coordinate
Cartan planes t1, t2, t3 (one x-coordinate paired with the matching
y-coordinate, all other coordinates zero) and the two three-dimensional
subspaces s_plus / s_minus spanned by paired basis directions weighted by
inverse moment sums.  A regular orbit {C1 = c1, C2 = c2} meets each Cartan
plane in the four points (a, b), (-a, -b), (b, a), (-b, -a), giving twelve
isolated equilibria per orbit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    X1, X2, X3, Y1, Y2, Y3,
    InertiaSpectrum,
    as_state,
    integral_value,
    tolerance_scale,
    vector_field,
)

__all__ = [
    "CARTAN_FAMILIES",
    "FAMILY_SLOTS",
    "OrbitParams",
    "Equilibrium",
    "ab_from_orbit",
    "cartan_state",
    "cartan_equilibria",
    "s_family_basis",
    "is_equilibrium",
]

CARTAN_FAMILIES = ("t1", "t2", "t3")

# Active (x, y) coordinate slots of each Cartan plane.
FAMILY_SLOTS = {"t1": (X1, Y1), "t2": (X2, Y2), "t3": (X3, Y3)}


@dataclass(frozen=True)
class OrbitParams:
    """Casimir levels (c1, c2) of a regular adjoint orbit: c1 > 0, c1 > |c2|."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise ValueError(f"orbit levels must be finite, got ({self.c1}, {self.c2})")
        if not (self.c1 > 0.0 and self.c1 > abs(self.c2)):
            raise ValueError(
                f"orbit is not regular: need c1 > 0 and c1 > |c2|, got ({self.c1}, {self.c2})"
            )


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """A classified Cartan equilibrium: family tag, slot values, embedded state."""

    family: str
    a: float
    b: float
    state: np.ndarray

    def __post_init__(self):
        if self.family not in CARTAN_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "state", as_state(self.state))
        expected = cartan_state(self.family, self.a, self.b)
        if np.max(np.abs(self.state - expected)) > 1e-12 * max(1.0, abs(self.a), abs(self.b)):
            raise ValueError(
                f"state is not the ({self.a}, {self.b}) embedding into {self.family}"
            )


def cartan_state(family: str, a: float, b: float) -> np.ndarray:
    """Embed slot values (a, b) into the family's coordinate plane."""
    u, v = FAMILY_SLOTS[family]
    state = np.zeros(6)
    state[u] = a
    state[v] = b
    return state


def ab_from_orbit(orbit: OrbitParams) -> tuple:
    """Slot values (a, b) with (a^2 + b^2)/2 = c1 and a*b = c2, a > |b| >= 0."""
    plus = np.sqrt(orbit.c1 + orbit.c2)
    minus = np.sqrt(orbit.c1 - orbit.c2)
    a = (plus + minus) / np.sqrt(2.0)
    b = (plus - minus) / np.sqrt(2.0)
    return float(a), float(b)


def cartan_equilibria(orbit: OrbitParams) -> list:
    """The twelve Cartan equilibria on a regular orbit.

    Ordered family-major (t1, t2, t3), with the four slot assignments
    (a, b), (-a, -b), (b, a), (-b, -a) inside each family.
    """
    a, b = ab_from_orbit(orbit)
    out = []
    for family in CARTAN_FAMILIES:
        for u, v in ((a, b), (-a, -b), (b, a), (-b, -a)):
            out.append(Equilibrium(family, u, v, cartan_state(family, u, v)))
    return out


def s_family_basis(sign: int, lam: InertiaSpectrum) -> np.ndarray:
    """Three spanning vectors (rows) of the subspace s_plus (sign=+1) or
    s_minus (sign=-1).

    Row k pairs the x_k direction, weighted by the inverse of the
    complementary y-pair moment sum, with sign times the y_k direction,
    weighted by the inverse of the complementary x-pair moment sum.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    s = lam.pair_sums
    basis = np.zeros((3, 6))
    for k in range(3):
        basis[k, k] = 1.0 / s[k + 3]
        basis[k, k + 3] = sign / s[k]
    return basis


def is_equilibrium(m, lam: InertiaSpectrum, tol: float = 1e-10) -> bool:
    """True when the field vanishes at m relative to the quadratic scale of m."""
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    m = as_state(m)
    resid = np.max(np.abs(vector_field(m, lam)))
    return resid <= tol * max(1.0, float(m @ m))


def orbit_residual(eq: Equilibrium, orbit: OrbitParams, lam: InertiaSpectrum) -> float:
    """Relative deviation of the Casimir levels of eq.state from the orbit's."""
    c1 = integral_value("C1", eq.state, lam)
    c2 = integral_value("C2", eq.state, lam)
    return max(
        abs(c1 - orbit.c1) / tolerance_scale(orbit.c1),
        abs(c2 - orbit.c2) / tolerance_scale(orbit.c1),
    )

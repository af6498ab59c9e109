"""Coordinates, dynamics, and conserved quantities of the so(4) free rigid body.

A state is the angular momentum M, stored as a length-6 vector in the
coordinate order (x1, x2, x3, y1, y2, y3).  The same point can be viewed as
the antisymmetric 4x4 matrix

    [[  0, -x3,  x2, y1],
     [ x3,   0, -x1, y2],
     [-x2,  x1,   0, y3],
     [-y1, -y2, -y3,  0]]

via :func:`embed` / :func:`extract`; that single chart is shared by every
other module.  The body is described by four ordered moments
lambda1 > lambda2 > lambda3 > lambda4 with positive pairwise sums
(:class:`InertiaSpectrum`).  Momentum and angular velocity are related
componentwise by the pairwise sums, the motion is the isospectral flow
dM/dt = M*Omega - Omega*M, and the flow preserves eight quadratic
quantities: the energy H, the Casimirs C1 and C2, the extra integral I that
makes the system completely integrable, and the four combinations G1..G4 of
(H, I, C1) with one squared coordinate removed each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "X1", "X2", "X3", "Y1", "Y2", "Y3",
    "INTEGRALS",
    "InertiaSpectrum",
    "PopovDecomposition",
    "as_state",
    "embed",
    "extract",
    "tolerance_scale",
    "omega_from_m",
    "field_coefficients",
    "vector_field",
    "quadratic_form",
    "integral_value",
    "integral_gradient",
    "poisson_bracket",
    "popov_decomposition",
]

# Coordinate indices into a state vector.
X1, X2, X3, Y1, Y2, Y3 = range(6)

# Closed set of conserved-quantity tags.
INTEGRALS = ("H", "C1", "C2", "I", "G1", "G2", "G3", "G4")

# (row, col) of the 4x4 embedding carrying each coordinate, and therefore the
# moment pair (lambda_i, lambda_j) weighting it.
_COORD_PAIRS = ((1, 2), (0, 2), (0, 1), (0, 3), (1, 3), (2, 3))


def tolerance_scale(*magnitudes: float) -> float:
    """Reference scale for identity checks: max(1, |product of magnitudes|).

    Every "this quantity vanishes" assertion in the package is made as
    |residual| <= tol * tolerance_scale(...), with the magnitudes of the
    operands entering the identity passed in.  This is the one scaling rule
    used throughout.
    """
    prod = 1.0
    for m in magnitudes:
        prod *= float(m)
    return max(1.0, abs(prod))


@dataclass(frozen=True)
class InertiaSpectrum:
    """The four moments, strictly ordered and with positive pairwise sums."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            object.__setattr__(self, name, float(getattr(self, name)))
        lam = (self.lambda1, self.lambda2, self.lambda3, self.lambda4)
        if not all(math.isfinite(v) for v in lam):
            raise ValueError(f"moments must be finite, got {lam}")
        if not (lam[0] > lam[1] > lam[2] > lam[3]):
            raise ValueError(f"moments must satisfy lambda1 > lambda2 > lambda3 > lambda4, got {lam}")
        # Under the ordering, lambda3 + lambda4 is the smallest pairwise sum.
        if lam[2] + lam[3] <= 0.0:
            raise ValueError(f"pairwise sums must be positive, got lambda3 + lambda4 = {lam[2] + lam[3]}")

    @classmethod
    def from_values(cls, values) -> "InertiaSpectrum":
        v = [float(x) for x in values]
        if len(v) != 4:
            raise ValueError(f"expected four moments, got {len(v)}")
        return cls(*v)

    @property
    def values(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3, self.lambda4])

    @property
    def pair_sums(self) -> np.ndarray:
        """lambda_i + lambda_j for the moment pair weighting each coordinate."""
        lam = self.values
        return np.array([lam[i] + lam[j] for i, j in _COORD_PAIRS])

    @property
    def square_pair_sums(self) -> np.ndarray:
        """lambda_i^2 + lambda_j^2 per coordinate (weights of the integral I)."""
        sq = self.values ** 2
        return np.array([sq[i] + sq[j] for i, j in _COORD_PAIRS])


def as_state(values) -> np.ndarray:
    """Validate and return a state vector (x1, x2, x3, y1, y2, y3)."""
    m = np.asarray(values, dtype=float)
    if m.shape != (6,):
        raise ValueError(f"state must have six components, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"state must be finite, got {m}")
    return m


def embed(state) -> np.ndarray:
    """Antisymmetric 4x4 matrix carrying the given coordinates."""
    x1, x2, x3, y1, y2, y3 = state
    return np.array([
        [0.0, -x3, x2, y1],
        [x3, 0.0, -x1, y2],
        [-x2, x1, 0.0, y3],
        [-y1, -y2, -y3, 0.0],
    ])


def extract(matrix) -> np.ndarray:
    """Inverse of :func:`embed`."""
    mat = np.asarray(matrix, dtype=float)
    return np.array([mat[2, 1], mat[0, 2], mat[1, 0], mat[0, 3], mat[1, 3], mat[2, 3]])


def omega_from_m(m, lam: InertiaSpectrum) -> np.ndarray:
    """Angular velocity in the same chart: each momentum component divided by
    its pairwise moment sum."""
    return as_state(m) / lam.pair_sums


def field_coefficients(lam: InertiaSpectrum) -> tuple:
    """The twelve constant coefficients of the quadratic equations of motion.

    Returned flat as (c1, d1, c2, d2, ..., c6, d6) where row k of the field
    is c_k * (first product) + d_k * (second product); see
    :func:`vector_field` for the products.
    """
    ix1, ix2, ix3, iy1, iy2, iy3 = (float(v) for v in 1.0 / lam.pair_sums)
    # plain floats keep the integrator's scalar hot loop off numpy scalars
    return (
        ix3 - ix2, iy3 - iy2,
        ix1 - ix3, iy1 - iy3,
        ix2 - ix1, iy2 - iy1,
        iy3 - ix2, ix3 - iy2,
        ix1 - iy3, iy1 - ix3,
        iy2 - ix1, ix2 - iy1,
    )


def vector_field(m, lam: InertiaSpectrum) -> np.ndarray:
    """Time derivative of the state; coordinate form of dM/dt = [M, Omega]."""
    x1, x2, x3, y1, y2, y3 = as_state(m)
    c = field_coefficients(lam)
    return np.array([
        c[0] * x2 * x3 + c[1] * y2 * y3,
        c[2] * x1 * x3 + c[3] * y1 * y3,
        c[4] * x1 * x2 + c[5] * y1 * y2,
        c[6] * x2 * y3 + c[7] * x3 * y2,
        c[8] * x1 * y3 + c[9] * x3 * y1,
        c[10] * x1 * y2 + c[11] * x2 * y1,
    ])


def quadratic_form(integral: str, lam: InertiaSpectrum) -> np.ndarray:
    """Constant symmetric matrix Q of the conserved quantity, F(M) = M.Q.M / 2.

    The gradient of F is then Q @ M and its (constant) Hessian is Q itself.
    """
    if integral == "H":
        return np.diag(1.0 / lam.pair_sums)
    if integral == "C1":
        return np.eye(6)
    if integral == "C2":
        q = np.zeros((6, 6))
        for i in range(3):
            q[i, i + 3] = q[i + 3, i] = 1.0
        return q
    if integral == "I":
        return np.diag(2.0 * lam.square_pair_sums)
    if integral in ("G1", "G2", "G3", "G4"):
        sq = lam.values ** 2
        k = int(integral[1]) - 1
        w = np.zeros(6)
        # G_k drops the squared coordinate paired with moment k and weights
        # the remaining three by 1 / (lambda_k^2 - lambda_j^2).
        for coord, (i, j) in enumerate(_COORD_PAIRS):
            if k == i:
                w[coord] = 1.0 / (sq[k] - sq[j])
            elif k == j:
                w[coord] = 1.0 / (sq[k] - sq[i])
        return np.diag(2.0 * w)
    raise ValueError(f"unknown integral {integral!r}; expected one of {INTEGRALS}")


def integral_value(integral: str, m, lam: InertiaSpectrum) -> float:
    m = as_state(m)
    return 0.5 * float(m @ quadratic_form(integral, lam) @ m)


def integral_gradient(integral: str, m, lam: InertiaSpectrum) -> np.ndarray:
    return quadratic_form(integral, lam) @ as_state(m)


def poisson_bracket(f: str, g: str, m, lam: InertiaSpectrum) -> float:
    """Bracket {F, G}(M) = Trace(M [grad F, grad G]) / 2 via the matrix chart."""
    mm = embed(as_state(m))
    a = embed(integral_gradient(f, m, lam))
    b = embed(integral_gradient(g, m, lam))
    return 0.5 * float(np.trace(mm @ (a @ b - b @ a)))


@dataclass(frozen=True)
class PopovDecomposition:
    """Coefficients writing G_k = mu1 * H + mu2 * I + m_prime * C1."""

    mu1: float
    mu2: float
    m_prime: float


def popov_decomposition(k: int, lam: InertiaSpectrum) -> PopovDecomposition:
    """Decomposition coefficients of G_k over (H, I, C1).

    The common denominator is (sum of all moments) times the three pairwise
    moment differences involving index k; the sign alternates with k.  For
    G3 the published mu2 denominator deviates from this index pattern
    (lambda2 - lambda4 in place of lambda3 - lambda4); the identity
    G3 = mu1*H + mu2*I + m'*C1 holds only for the patterned variant used
    here, which the decomposition tests pin down numerically.
    """
    if k not in (1, 2, 3, 4):
        raise ValueError(f"k must be 1..4, got {k}")
    lam1, lam2, lam3, lam4 = lam.values
    total = lam1 + lam2 + lam3 + lam4
    others = [v for i, v in enumerate((lam1, lam2, lam3, lam4)) if i != k - 1]
    lam_k = (lam1, lam2, lam3, lam4)[k - 1]
    diffs = 1.0
    for i, v in enumerate((lam1, lam2, lam3, lam4)):
        if i != k - 1:
            # signed difference in index order: (lambda_min(i,k) - lambda_max(i,k))
            diffs *= (lam_k - v) if i > k - 1 else (v - lam_k)
    den = total * diffs
    sign = 1.0 if k in (1, 3) else -1.0
    o1, o2, o3 = others
    pair_prod = 2.0 * (o1 + o2) * (o1 + o3) * (o2 + o3)
    sym = o1 * o1 + o2 * o2 + o3 * o3 + o1 * o2 + o1 * o3 + o2 * o3
    return PopovDecomposition(
        mu1=sign * pair_prod / den,
        mu2=sign / den,
        m_prime=-sign * 2.0 * sym / den,
    )

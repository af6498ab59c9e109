"""Free rigid body on so(4): dynamics, equilibria, and stability certificates.

The package implements the six-dimensional momentum dynamics with its eight
conserved quadratic quantities, enumerates the twelve isolated Cartan
equilibria per regular orbit plus the two three-dimensional equilibrium
subspaces, classifies spectral stability in closed form, certifies nonlinear
stability with energy-Casimir Hessian certificates, and corroborates both
empirically with a conservative integrator and Monte-Carlo probes.
"""

__version__ = "0.1.0"

from .core import (
    INTEGRALS,
    InertiaSpectrum,
    PopovDecomposition,
    as_state,
    embed,
    extract,
    integral_gradient,
    integral_value,
    omega_from_m,
    poisson_bracket,
    popov_decomposition,
    quadratic_form,
    tolerance_scale,
    vector_field,
)
from .equilibria import (
    CARTAN_FAMILIES,
    Equilibrium,
    OrbitParams,
    ab_from_orbit,
    cartan_equilibria,
    cartan_state,
    is_equilibrium,
    s_family_basis,
)
from .spectral import (
    CharQuartic,
    FTildeData,
    SpectralVerdict,
    char_quartic,
    classify_eigenstructure,
    classify_spectral,
    f_tilde,
    linearize,
    orbit_tangent_basis,
    quartic_eigenvalues,
    restrict_to_orbit,
)
from .lyapunov import (
    CertificationError,
    HessianCertificate,
    LyapunovCandidate,
    PIntervalReport,
    StabilityCertificate,
    certify_bifurcation,
    certify_center_center,
    p_interval,
    restricted_hessian,
    solve_multipliers,
)
from .dynamics import (
    BlowUpError,
    IntegrationReport,
    PerturbationProbe,
    ProjectionError,
    integrate,
    probe_stability,
    project_to_orbit,
    write_trajectory_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]

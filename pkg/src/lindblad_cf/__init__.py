"""Exact solver for quadratic fermionic Lindblad dynamics.

The master equation

    d rho / dt = -i [H, rho] + sum_mu (2 L_mu rho L_mu^+ - {L_mu^+ L_mu, rho})

with a quadratic Hamiltonian H = (1/2) (c^+, c) HH (c; c^+) and linear jump
operators L_mu = l_mu^+ (c; c^+) is solved exactly in terms of 2N x 2N
matrices.  The package computes the propagators Q(t), Qbar(t), M(t), steady
states, Green's functions, dynamical correlations of nonlocal (string and
Gaussian) operators such as hard-core anyon Green's functions, full counting
statistics of subsystem charge, and Loschmidt echoes, together with a
brute-force Fock-space oracle for small systems.

Block convention used everywhere: indices 1..N are the annihilation block,
N+1..2N the creation block; tau_x, tau_y, tau_z act on this two-block
structure.
"""

from .linalg import (
    BranchTrace,
    SpectralDecomposition,
    BranchAmbiguityError,
    NearDefectiveError,
    SingularMatrixError,
    eig_biorthonormal,
    matexp,
    solve,
    sqrt_det_along,
    sqrt_det_periodic,
    sqrt_det_analytic,
)
from .model import (
    KitaevParams,
    QuadraticModel,
    build_kitaev,
    quadratic_model,
    tau_x,
    tau_y,
    tau_z,
    validate,
    x_matrices,
)
from .propagator import (
    PropagatorSet,
    RapiditySpectrum,
    evolve_covariance,
    liouvillian_spectrum_from_rapidities,
    m_quadrature,
    propagators,
    rapidity_spectrum,
    response_function,
    retarded_gf,
    steady_m,
)
from .correlators import (
    AuxiliaryMatrices,
    CorrelatorResult,
    GaussianOperator,
    StringMatrix,
    anyon_greater,
    anyon_greater_negative,
    anyon_lesser,
    anyon_lesser_negative,
    auxiliary_matrices,
    gaussian_state_from_thermal,
    gaussian_state_vacuum,
    steady_gaussian,
    string_k,
    typeI,
    typeII,
    typeI_result,
    typeII_result,
)
from .observables import (
    FcsResult,
    LoschmidtSeries,
    MomentumDistribution,
    bulk_dispersion,
    detect_cusps,
    fcs_chi,
    fcs_pn,
    fcs_steady,
    loschmidt,
    momentum_distribution,
)

__version__ = "0.1.0"

"""Dynamical maps of quadratic fermionic Lindblad evolution.

The generator is encoded in the damping matrix A = X_+ + iH acting on the
(c; c^dag) column.  Everything dynamical derives from it: the propagator
Q(t) = exp(-A t), its particle-hole reflection Qbar = tau_x Q^T tau_x, and
the inhomogeneous part M(t) = int_0^t Q(s) X_- Qbar(s) ds, evaluated in
closed form through the eigendecomposition of A.  Covariance matrices
follow the affine map C(t) = 1/2 + Q (C0 - 1/2) Qbar + M.

All matrices are 2N x 2N complex, with rows/columns 1..N the annihilation
block and N+1..2N the creation block.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import NearDefectiveError, eig_biorthonormal, matexp
from .model import SYMMETRY_TOL, tau_x

# Below this |z*t| the direct (1 - e^{-zt})/z loses digits to cancellation;
# an 8-term alternating series is exact to machine precision there.
SERIES_SWITCH = 1e-2
ZERO_RAPIDITY_SUM = 1e-8
GAP_FLOOR = 1e-12


@dataclass(frozen=True)
class RapiditySpectrum:
    """Rapidities (eigenvalues of X_+ + iH) and the dissipative gap.

    All 4^N Liouvillian eigenvalues are sums -sum_k nu_k lambda_k with
    nu_k in {0, 1}; the gap min_k Re lambda_k controls relaxation.
    """

    lambdas: np.ndarray
    gap: float


@dataclass(frozen=True)
class PropagatorSet:
    """Q(t), Qbar(t) and M(t) at a single time, units of 1/J."""

    t: float
    Q: np.ndarray
    Qbar: np.ndarray
    M: np.ndarray


def damping_matrix(model):
    """A = X_+ + iH, the generator of the quasiparticle decay."""
    return model.Xplus + 1j * model.H


def decompose(model):
    """Biorthonormal eigendecomposition of the damping matrix.

    Reusable across every time point of a sweep; pass the result to the
    `decomp` argument of the functions below to avoid recomputation.
    """
    return eig_biorthonormal(damping_matrix(model))


def _ph_reflect(Q):
    N2 = Q.shape[0]
    tx = tau_x(N2 // 2)
    return tx @ Q.T @ tx


def _f_factors(lambdas, t):
    # F_mn = (1 - e^{-(l_m + l_n) t}) / (l_m + l_n), with a series branch
    # where the sum of rapidities (times t) is too small for the quotient.
    z = lambdas[:, None] + lambdas[None, :]
    zt = z * t
    small = (np.abs(zt) < SERIES_SWITCH) | (np.abs(z) < ZERO_RAPIDITY_SUM)
    safe_z = np.where(small, 1.0, z)
    direct = -np.expm1(-zt) / safe_z
    series = np.zeros_like(z)
    term = np.full_like(z, t)
    for k in range(8):
        series = series + term / math.factorial(k + 1)
        term = term * (-zt)
    return np.where(small, series, direct)


def _m_from_decomp(decomp, Xminus, t):
    # M(t) = R (G o F) R^T tau_x with G = L X_- tau_x L^T; t=None gives the
    # steady-state limit F_mn = 1/(l_m + l_n).
    R = decomp.right_vectors
    L = decomp.left_vectors
    lam = decomp.eigenvalues
    N2 = lam.size
    tx = tau_x(N2 // 2)
    G = L @ Xminus @ tx @ L.T
    if t is None:
        F = 1.0 / (lam[:, None] + lam[None, :])
    else:
        F = _f_factors(lam, t)
    return R @ (G * F) @ R.T @ tx


def propagators(model, t, decomp=None):
    """Propagator set (Q, Qbar, M) at time t.

    Q comes from the matrix exponential, M from the eigendecomposition
    closed form with a series branch for near-zero rapidity sums.

    Parameters
    ----------
    model : QuadraticModel
    t : float
        Time, t >= 0.
    decomp : SpectralDecomposition, optional
        Precomputed decompose(model) output.
    """
    if t < 0:
        raise ValueError("propagators requires t >= 0")
    if decomp is None:
        decomp = decompose(model)
    Q = matexp(-damping_matrix(model) * t)
    M = _m_from_decomp(decomp, model.Xminus, t)
    return PropagatorSet(t=float(t), Q=Q, Qbar=_ph_reflect(Q), M=M)


def steady_m(model, decomp=None):
    """Steady-state M_inf, the t -> infinity limit of M(t).

    Requires a positive dissipative gap; without one the model has no
    unique steady state and a ValueError is raised.  Falls back to a
    direct Sylvester solve of A M + M (X_+ - iH) = X_- when the
    eigendecomposition is too ill conditioned to trust.
    """
    A = damping_matrix(model)
    gap = float(np.min(np.linalg.eigvals(A).real)) if decomp is None else float(
        np.min(decomp.eigenvalues.real)
    )
    if gap <= GAP_FLOOR:
        raise ValueError(
            "no unique steady state: dissipative gap %.3e is not positive" % gap
        )
    try:
        if decomp is None:
            decomp = decompose(model)
        return _m_from_decomp(decomp, model.Xminus, None)
    except NearDefectiveError:
        return scipy.linalg.solve_sylvester(
            A, model.Xplus - 1j * model.H, model.Xminus
        )


def evolve_covariance(model, C0, t, decomp=None):
    """Covariance at time t from initial covariance C0.

    C(t) = 1/2 + Q(t) (C0 - 1/2) Qbar(t) + M(t).  C0 must satisfy the
    covariance symmetry C0 + tau_x C0^T tau_x = 1.
    """
    C0 = np.asarray(C0, dtype=complex)
    N2 = C0.shape[0]
    eye = np.eye(N2)
    defect = np.max(np.abs(C0 + _ph_reflect(C0) - eye))
    if defect > SYMMETRY_TOL:
        raise ValueError(
            "C0 violates C + tau_x C^T tau_x = 1 by %.3e" % defect
        )
    p = propagators(model, t, decomp=decomp)
    return 0.5 * eye + p.Q @ (C0 - 0.5 * eye) @ p.Qbar + p.M


def rapidity_spectrum(model):
    """Sorted rapidities of the model and the dissipative gap."""
    lam = np.linalg.eigvals(damping_matrix(model))
    lam = lam[np.lexsort((lam.imag, lam.real))]
    return RapiditySpectrum(lambdas=lam, gap=float(lam.real.min()))


def liouvillian_spectrum_from_rapidities(spectrum, max_modes=8):
    """Full Liouvillian eigenvalue multiset {-sum_k nu_k lambda_k}.

    Enumerates all 2^(2N) occupation patterns nu in {0,1}^(2N); intended
    as a small-system test hook (N <= 4 by default).
    """
    lam = spectrum.lambdas
    if lam.size > max_modes:
        raise ValueError(
            "refusing to enumerate 2^%d eigenvalues; raise max_modes to force"
            % lam.size
        )
    vals = np.array(
        [-sum(nu * l for nu, l in zip(pattern, lam))
         for pattern in itertools.product((0, 1), repeat=lam.size)],
        dtype=complex,
    )
    return vals[np.lexsort((vals.imag, vals.real))]


def retarded_gf(model, t, decomp=None):
    """Retarded Green function G^R(t) = -i Q(t) for t >= 0.

    The step function convention includes the origin: G^R(0) = -i.
    """
    if t < 0:
        raise ValueError("retarded_gf is defined for t >= 0 only")
    return -1j * matexp(-damping_matrix(model) * t)


def response_function(model, i, j, t, decomp=None, minf=None):
    """Retarded density-density response D_ij(t) in the steady state.

    D_ij(t) = -i theta(t) < [n_i(t), n_j] >, evaluated from Q(t), Qbar(t)
    and M_inf.  Sites i, j are 1-based.
    """
    if t < 0:
        raise ValueError("response_function is defined for t >= 0 only")
    N = model.N
    if not (1 <= i <= N and 1 <= j <= N):
        raise ValueError("site indices must lie in 1..N")
    if decomp is None:
        decomp = decompose(model)
    if minf is None:
        minf = steady_m(model, decomp=decomp)
    Q = matexp(-damping_matrix(model) * t)
    Qbar = _ph_reflect(Q)
    QM = Q @ minf
    MQ = minf @ Qbar
    a, b = i - 1, j - 1
    return -1j * (
        QM[a, b] * Qbar[b, a]
        - Q[a, b] * MQ[b, a]
        - QM[a + N, b] * Qbar[b, a + N]
        + Q[a + N, b] * MQ[b, a + N]
    )


def m_quadrature(model, t, tol=1e-10, max_depth=10):
    """M(t) by adaptive composite Gauss-Legendre quadrature of Eq. M.

    Independent of the closed form: evaluates Q(s) X_- Qbar(s) with a
    fresh matrix exponential at every node and refines the subdivision
    until the result is stable to `tol`.  Test oracle; O(nodes) matexp
    calls, so keep N small.
    """
    if t < 0:
        raise ValueError("m_quadrature requires t >= 0")
    if t == 0:
        return np.zeros_like(model.H)
    A = damping_matrix(model)
    Xm = model.Xminus

    nodes, weights = np.polynomial.legendre.leggauss(12)

    def integrand(s):
        Q = matexp(-A * s)
        return Q @ Xm @ _ph_reflect(Q)

    def composite(n_sub):
        edges = np.linspace(0.0, t, n_sub + 1)
        total = np.zeros_like(A)
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
            for x, w in zip(nodes, weights):
                total = total + (w * half) * integrand(mid + half * x)
        return total

    prev = composite(4)
    n_sub = 8
    for _ in range(max_depth):
        cur = composite(n_sub)
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev, n_sub = cur, n_sub * 2
    raise RuntimeError("quadrature did not stabilize to %.1e" % tol)

"""Nonlocal dynamical correlators of Gaussian operators, exactly.

Two families are covered.  Type I is a trace of the evolved product of
Gaussian operators, Tr{G1 exp(Lt)[G2 rho0]}, and reduces to a pair of
determinants.  Type II inserts one creation and one annihilation operator
around the Gaussians and yields a full 2N x 2N matrix of single-particle
correlators; evolved with the fermionic-sign Liouvillian it gives the
hard-core anyon Green functions for any statistical angle phi through
string operators exp(+-i phi tau_z D_j).

States and string insertions are carried in covariance (B) form, so
projector-like states such as the vacuum are exact inputs; no formula
below ever inverts B0 or forms exp(K0).  Square roots of determinants are
analytically continued along the affine family (1-lam) 1 + lam A, one
factor per determinant, and the continuation diagnostics are reported in
CorrelatorResult.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .linalg import (
    BranchAmbiguityError,
    BranchTrace,
    SingularMatrixError,
    matexp,
    solve_with_rcond,
    sqrt_det_along,
)
from .model import SYMMETRY_TOL, tau_x
from .propagator import propagators, steady_m

# Reciprocal-condition floor below which string-matrix solves are deemed
# singular and the caller retries at a nudged statistical angle.
RCOND_FLOOR = 1e-12
PHI_NUDGE = 1e-7
# After the nudge the determinant path passes within ~phi*PHI_NUDGE of a
# zero; resolving that passage needs continuation steps far below the
# default floor.
DEEP_BRANCH_DEPTH = 26


@dataclass(frozen=True)
class GaussianOperator:
    """A Gaussian operator in covariance form.

    Represents exp(log_weight) times the unit-trace Gaussian with
    covariance matrix B = <(c;c+)(c+,c)>.  B-form admits projector
    limits (vacuum, fully occupied modes) that no finite K matrix of
    Gamma_2(K) = exp[(c+,c) K (c;c+) / 2] reaches; when B is invertible
    with invertible 1-B the two forms interconvert via B = (1+e^K)^{-1}.
    """

    B: np.ndarray
    log_weight: complex = 0.0

    def __post_init__(self):
        B = np.asarray(self.B, dtype=complex)
        object.__setattr__(self, "B", B)
        N2 = B.shape[0]
        tx = tau_x(N2 // 2)
        defect = np.max(np.abs(B + tx @ B.T @ tx - np.eye(N2)))
        if defect > SYMMETRY_TOL:
            raise ValueError(
                "B violates B + tau_x B^T tau_x = 1 by %.3e" % defect
            )

    @classmethod
    def from_k(cls, K, log_weight=0.0):
        """Build from the exponent matrix K of Gamma_2(K).

        The returned operator is exp(log_weight) times the normalized
        Gaussian; the bare Gamma_2(K) itself has trace
        sqrt(det(1 + e^K)), so pass log_weight = log Tr to represent it.
        """
        K = np.asarray(K, dtype=complex)
        N2 = K.shape[0]
        tx = tau_x(N2 // 2)
        defect = np.max(np.abs(K + tx @ K.T @ tx))
        if defect > SYMMETRY_TOL:
            raise ValueError(
                "K violates K + tau_x K^T tau_x = 0 by %.3e" % defect
            )
        B = np.linalg.inv(np.eye(N2) + matexp(K))
        return cls(B=B, log_weight=log_weight)

    def k_matrix(self):
        """Recover K = log(B^{-1} - 1); fails on projector-like B."""
        N2 = self.B.shape[0]
        arg = np.linalg.inv(self.B) - np.eye(N2)
        return scipy.linalg.logm(arg)

    def trace(self):
        return np.exp(self.log_weight)


@dataclass(frozen=True)
class StringMatrix:
    """Diagonal string operator data exp(sign * i * phi * tau_z D).

    D projects onto sites m <= j (integer cutoff) or onto an explicit
    site set; sites are 1-based.
    """

    sites: tuple
    phi: float
    sign: int
    k: np.ndarray
    matrix: np.ndarray


def string_k(N, sites, phi, sign=1):
    """String-operator matrices for cutoff site or site set.

    Parameters
    ----------
    N : int
        Chain length.
    sites : int or iterable of int
        Cutoff j (meaning sites 1..j) or an explicit 1-based site set.
    phi : float
        Statistical angle.
    sign : +1 or -1
        Sign of the exponent.
    """
    if np.isscalar(sites):
        members = tuple(range(1, int(sites) + 1))
    else:
        members = tuple(sorted(int(s) for s in sites))
    if members and not (1 <= members[0] and members[-1] <= N):
        raise ValueError("string sites must lie in 1..N")
    d = np.zeros(N)
    for s in members:
        d[s - 1] = 1.0
    tz = np.concatenate([d, -d])
    k = np.diag(sign * 1j * phi * tz)
    return StringMatrix(
        sites=members,
        phi=float(phi),
        sign=int(sign),
        k=k,
        matrix=np.diag(np.exp(sign * 1j * phi * tz)),
    )


@dataclass(frozen=True)
class AuxiliaryMatrices:
    """Intermediate matrices of a correlator evaluation, for inspection."""

    R20: np.ndarray = None
    S20: np.ndarray = None
    B20: np.ndarray = None
    W20: np.ndarray = None
    R02: np.ndarray = None
    S02: np.ndarray = None
    B02: np.ndarray = None
    W02: np.ndarray = None


@dataclass(frozen=True)
class CorrelatorResult:
    """Correlator value plus evaluation metadata.

    value is a complex scalar (type I) or a 2N x 2N matrix (type II);
    branch_traces records one determinant-continuation trace per factor.
    """

    value: object
    t: float
    sites: tuple = None
    phi: float = None
    branch_traces: tuple = ()
    aux: AuxiliaryMatrices = None


def gaussian_state_from_thermal(H0, beta):
    """Normalized thermal Gaussian state of a quadratic Hamiltonian.

    B = (1 + e^{-beta H0})^{-1}, computed through the Hermitian
    eigendecomposition of H0 so large beta stays finite.
    """
    H0 = np.asarray(H0, dtype=complex)
    N2 = H0.shape[0]
    tx = tau_x(N2 // 2)
    herm = np.max(np.abs(H0 - H0.conj().T))
    symm = np.max(np.abs(H0 + tx @ H0.T @ tx))
    if herm > SYMMETRY_TOL or symm > SYMMETRY_TOL:
        raise ValueError(
            "H0 must be Hermitian and particle-hole symmetric "
            "(defects %.3e, %.3e)" % (herm, symm)
        )
    eps, V = scipy.linalg.eigh(H0)
    occ = scipy.special.expit(beta * eps)  # 1/(1+e^{-beta eps})
    B = (V * occ) @ V.conj().T
    return GaussianOperator(B=B, log_weight=0.0)


def gaussian_state_vacuum(N):
    """The fermionic vacuum: <c c+> = 1, <c+ c> = 0."""
    B = np.diag(np.concatenate([np.ones(N), np.zeros(N)])).astype(complex)
    return GaussianOperator(B=B, log_weight=0.0)


def steady_gaussian(model, minf=None):
    """Steady state of the model as a Gaussian operator, B0 = 1/2 + M_inf."""
    if minf is None:
        minf = steady_m(model)
    N2 = 2 * model.N
    return GaussianOperator(B=0.5 * np.eye(N2) + minf, log_weight=0.0)


def _k_is_zero(K):
    if K is None:
        return True
    if isinstance(K, StringMatrix):
        return K.phi == 0.0 or not K.sites
    return not np.any(np.asarray(K))


def _exp_scaler(K, N2):
    """Callable u -> e^{uK}, as a diagonal vector when K is diagonal."""
    if _k_is_zero(K):
        return lambda u: np.ones(N2)
    if isinstance(K, StringMatrix):
        kd = np.diag(K.k).copy()
        return lambda u: np.exp(u * kd)
    K = np.asarray(K, dtype=complex)
    kd = np.diag(K)
    if np.count_nonzero(K - np.diag(kd)) == 0:
        return lambda u: np.exp(u * kd)
    return lambda u: matexp(u * K)


def _lmul(E, X):
    # E @ X with E either a diagonal (1d) or a full matrix
    return E[:, None] * X if E.ndim == 1 else E @ X


def _rmul(X, E):
    return X * E[None, :] if E.ndim == 1 else X @ E


def _solve(A, B):
    X, rcond = solve_with_rcond(A, B)
    if rcond < RCOND_FLOOR:
        raise SingularMatrixError(rcond)
    return X


def _right_divide(C, A):
    # C A^{-1} via a transposed solve
    return _solve(A.T, C.T).T


def _aux_pair(B0, eK1, eK2, props, order):
    """R, S, B_mid for the requested operator ordering.

    order "left" places the K2 Gaussian left of the state (W = e^K2 e^K0),
    "right" places it right (W = e^K0 e^K2).  Everything is affine in B0.
    """
    N2 = B0.shape[0]
    eye = np.eye(N2)
    if order == "left":
        R = B0 + _lmul(eK2, eye - B0)
        ratio = _right_divide(2.0 * B0 - R, R)
    else:
        R = B0 + _rmul(eye - B0, eK2)
        ratio = _solve(R, 2.0 * B0 - R)
    Bmid = 0.5 * eye + 0.5 * props.Q @ ratio @ props.Qbar + props.M
    S = Bmid + _rmul(eye - Bmid, eK1)
    return R, S, Bmid


_TRIVIAL_TRACE = BranchTrace(steps=1, final_value=1.0 + 0.0j, min_step_det=1.0)


def _factor_sqrt_dets(B0, props, K1, K2, order, branch_depth):
    """sqrt(det R) and sqrt(det S) continued along u -> e^{uK} scaling.

    The branch of each square root is anchored at the trivial point
    K1 = K2 = 0, where both matrices are the identity, and followed along
    the physical family of operators Gamma_2(u K); this keeps the product
    of the two factors continuous in the string angles, which a straight
    matrix interpolation does not guarantee once an eigenvalue of R or S
    crosses the negative real axis.
    """
    if _k_is_zero(K1) and _k_is_zero(K2):
        return 1.0 + 0.0j, 1.0 + 0.0j, (_TRIVIAL_TRACE, _TRIVIAL_TRACE)
    N2 = B0.shape[0]
    eye = np.eye(N2)
    e1_of = _exp_scaler(K1, N2)
    e2_of = _exp_scaler(K2, N2)

    def r_of(u):
        E2 = e2_of(u)
        if order == "left":
            return B0 + _lmul(E2, eye - B0)
        return B0 + _rmul(eye - B0, E2)

    def s_of(u):
        R = r_of(u)
        if order == "left":
            ratio = _right_divide(2.0 * B0 - R, R)
        else:
            ratio = _solve(R, 2.0 * B0 - R)
        Bmid = 0.5 * eye + 0.5 * props.Q @ ratio @ props.Qbar + props.M
        return Bmid + _rmul(eye - Bmid, e1_of(u))

    zR, trR = sqrt_det_along(r_of, 1.0, max_depth=branch_depth)
    zS, trS = sqrt_det_along(s_of, 1.0, max_depth=branch_depth)
    return zR, zS, (trR, trS)


def typeI_result(model, K1, K2, state0, t, props=None, branch_depth=None):
    """Trace correlator Tr{G(K1) exp(Lt)[G(K2) rho0]} with diagnostics."""
    if props is None:
        props = propagators(model, t)
    B0 = state0.B
    N2 = B0.shape[0]
    eK1 = _exp_scaler(K1, N2)(1.0)
    eK2 = _exp_scaler(K2, N2)(1.0)
    R, S, Bmid = _aux_pair(B0, eK1, eK2, props, "left")
    zR, zS, traces = _factor_sqrt_dets(B0, props, K1, K2, "left", branch_depth)
    value = np.exp(state0.log_weight) * zR * zS
    return CorrelatorResult(
        value=value,
        t=float(t),
        branch_traces=traces,
        aux=AuxiliaryMatrices(R20=R, S20=S, B20=Bmid),
    )


def typeI(model, K1, K2, state0, t, props=None):
    """Tr{Gamma_2(K1) exp(Lt)[Gamma_2(K2) rho0]} for a normalized rho0.

    K1 = K2 = 0 returns 1 identically (trace preservation).  Evolution
    is under the standard (bosonic-sign) Liouvillian.
    """
    return typeI_result(model, K1, K2, state0, t, props=props).value


def typeII_result(model, K1, K2, state0, t, order="left", props=None,
                  branch_depth=None):
    """Matrix correlator with one (c;c+) and one (c+,c) insertion.

    order "left":  V[a,b] = Tr{(c;c+)_a G(K1) exp(L_f t)[G(K2) (c+,c)_b rho0]}
    order "right": V[a,b] = Tr{(c;c+)_a G(K1) exp(L_f t)[rho0 (c+,c)_b G(K2)]}

    Both orderings produce the scalar prefactor sqrt(det R det S) and an
    affine matrix factor; the right ordering ends in (1 - B0) and carries
    no trailing e^{K2}.
    """
    if order not in ("left", "right"):
        raise ValueError("order must be 'left' or 'right'")
    if props is None:
        props = propagators(model, t)
    B0 = state0.B
    N2 = B0.shape[0]
    eye = np.eye(N2)
    eK1 = _exp_scaler(K1, N2)(1.0)
    eK2 = _exp_scaler(K2, N2)(1.0)
    R, S, Bmid = _aux_pair(B0, eK1, eK2, props, order)
    zR, zS, traces = _factor_sqrt_dets(B0, props, K1, K2, order, branch_depth)
    scalar = np.exp(state0.log_weight) * zR * zS
    if order == "left":
        core = _rmul(props.Q @ _right_divide(B0, R), eK2)
    else:
        core = props.Q @ _solve(R, eye - B0)
    V = _lmul(eK1, _solve(S, core))
    if order == "left":
        aux = AuxiliaryMatrices(R20=R, S20=S, B20=Bmid)
    else:
        aux = AuxiliaryMatrices(R02=R, S02=S, B02=Bmid)
    return CorrelatorResult(
        value=scalar * V,
        t=float(t),
        branch_traces=traces,
        aux=aux,
    )


def typeII(model, K1, K2, state0, t, order="left", props=None):
    """All 2N x 2N single-particle nonlocal correlators at time t."""
    return typeII_result(model, K1, K2, state0, t, order=order,
                         props=props).value


def auxiliary_matrices(model, K1, K2, state0, t, props=None):
    """Both orderings' R, S, B matrices, plus W factors when B0 is regular."""
    if props is None:
        props = propagators(model, t)
    B0 = state0.B
    N2 = B0.shape[0]
    eye = np.eye(N2)
    eK1 = _exp_scaler(K1, N2)(1.0)
    eK2 = _exp_scaler(K2, N2)(1.0)
    R20, S20, B20 = _aux_pair(B0, eK1, eK2, props, "left")
    R02, S02, B02 = _aux_pair(B0, eK1, eK2, props, "right")
    W20 = W02 = None
    if np.linalg.cond(B0) < 1.0 / RCOND_FLOOR:
        eK0 = np.linalg.inv(B0) - eye
        W20, W02 = _lmul(eK2, eK0), _rmul(eK0, eK2)
    return AuxiliaryMatrices(
        R20=R20, S20=S20, B20=B20, W20=W20,
        R02=R02, S02=S02, B02=B02, W02=W02,
    )


def _steady_props(model, t, props, steady):
    if steady is None:
        steady = steady_gaussian(model)
    if props is None:
        props = propagators(model, t)
    return props, steady


def _anyon_eval(model, l, j, t, phi, props, steady, order, k1_site, k1_sign,
                k2_site, k2_sign, row, col):
    """Shared body of the four anyon Green functions.

    Evaluates the typeII matrix with string exponents K1, K2 built from
    (site, sign) pairs, extracts one element, and applies the scalar
    phases: the universal e^{i phi (j-l)/2} from the string traces, plus
    one uncancelled e^{i phi} from commuting a string across its fermion
    operator in the right-ordered cases.  Richardson-extrapolates in phi
    when the string matrices are too singular to solve (phi near pi).
    """
    N = model.N
    if not (1 <= l <= N and 1 <= j <= N):
        raise ValueError("site indices must lie in 1..N")

    def evaluate(angle, props_at, depth=None):
        K1 = string_k(N, k1_site, angle, k1_sign)
        K2 = string_k(N, k2_site, angle, k2_sign)
        res = typeII_result(model, K1, K2, steady, t, order=order,
                            props=props_at, branch_depth=depth)
        swap = 1.0 if order == "left" else np.exp(1j * angle)
        return swap * np.exp(1j * angle * (j - l) / 2.0) * res.value[row, col]

    props, steady = _steady_props(model, t, props, steady)
    try:
        return evaluate(phi, props)
    except (SingularMatrixError, BranchAmbiguityError):
        if phi == 0.0:
            raise
        eps = PHI_NUDGE
        near = evaluate(phi * (1.0 - eps), props, depth=DEEP_BRANCH_DEPTH)
        far = evaluate(phi * (1.0 - 2.0 * eps), props, depth=DEEP_BRANCH_DEPTH)
        return 2.0 * near - far


def anyon_greater(model, l, j, t, phi, props=None, steady=None):
    """iG^>_{lj}(t) = <f_l(t) f_j^+> for hard-core anyons, t >= 0.

    f_l = exp(-i phi sum_{m<=l} n_m) c_l.  At phi = 0 this is the
    fermionic [Q(t) B0]_{lj}; at phi = pi, hard-core bosons.
    """
    if t < 0:
        raise ValueError("use anyon_greater_negative for t < 0")
    return _anyon_eval(model, l, j, t, phi, props, steady, "left",
                       l, -1, j, +1, l - 1, j - 1)


def anyon_greater_negative(model, l, j, t, phi, props=None, steady=None):
    """iG^>_{lj}(-t) for t >= 0, the reversed-time branch."""
    if t < 0:
        raise ValueError("pass the magnitude of the time")
    N = model.N
    return _anyon_eval(model, l, j, t, phi, props, steady, "right",
                       j, +1, l, -1, N + j - 1, N + l - 1)


def anyon_lesser(model, l, j, t, phi, props=None, steady=None):
    """iG^<_{lj}(t) = <f_j^+ f_l(t)>, t >= 0.

    At t = 0 and phi = 0 this is the steady one-particle density matrix
    (1 - B0)_{lj}.
    """
    if t < 0:
        raise ValueError("use anyon_lesser_negative for t < 0")
    return _anyon_eval(model, l, j, t, phi, props, steady, "right",
                       l, -1, j, +1, l - 1, j - 1)


def anyon_lesser_negative(model, l, j, t, phi, props=None, steady=None):
    """iG^<_{lj}(-t) for t >= 0, the reversed-time branch."""
    if t < 0:
        raise ValueError("pass the magnitude of the time")
    N = model.N
    return _anyon_eval(model, l, j, t, phi, props, steady, "left",
                       j, +1, l, -1, N + j - 1, N + l - 1)

"""Dense complex matrix primitives.

Everything downstream rests on four operations: the matrix exponential, a
biorthonormal non-Hermitian eigendecomposition, linear solves with a
condition report, and the analytic branch of sqrt(det) needed by the
Gaussian-operator trace formulas.  Determinants are always handled as
(log-magnitude, phase) pairs so that 256 x 256 determinants neither overflow
nor lose their sign.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Continuation defaults: 16 initial lambda steps, halve on a phase jump of
# the determinant larger than pi/2 or a magnitude swing larger than a factor
# of e^2.3 (either one signals a zero close to the path), give up after 12
# halvings.
BRANCH_INITIAL_STEPS = 16
BRANCH_MAX_DEPTH = 12
BRANCH_PHASE_JUMP = np.pi / 2.0
BRANCH_MAG_JUMP = 2.3

# Periodic continuation: accept the winding while it lands within a quarter
# radian of the endpoint phase (the branch flips only at pi, a 12x margin),
# fall back to the endpoint phase alone once the determinant has decayed
# below the tail floor (sqrt puts the value below ~1e-8, where the branch
# parity is irrelevant), and skip the reconstruction entirely below the
# shortcut ratio.
PERIODIC_RESID_ACCEPT = 0.25
PERIODIC_TAIL_FLOOR = 1e-16
PERIODIC_SHORTCUT = 1e-19

# A spectral decomposition whose eigenvector matrix has condition number
# above this is reported as near-defective instead of silently returned.
NEAR_DEFECTIVE_CONDITION = 1e8


class NearDefectiveError(np.linalg.LinAlgError):
    """Eigendecomposition rejected: eigenvector condition number too large."""

    def __init__(self, condition_estimate):
        self.condition_estimate = condition_estimate
        super().__init__(
            "matrix is defective or near-defective: eigenvector condition "
            f"estimate {condition_estimate:.3e} exceeds {NEAR_DEFECTIVE_CONDITION:.0e}"
        )


class SingularMatrixError(np.linalg.LinAlgError):
    """Linear solve rejected: matrix singular to working precision."""

    def __init__(self, rcond):
        self.rcond = rcond
        super().__init__(
            f"matrix is singular to working precision (rcond estimate {rcond:.3e})"
        )


class BranchAmbiguityError(ValueError):
    """sqrt-det continuation failed: det vanishes at interior lambda."""

    def __init__(self, lam, min_step_det):
        self.lam = lam
        self.min_step_det = min_step_det
        super().__init__(
            "analytic continuation of sqrt(det) is ambiguous: determinant "
            f"vanishes near lambda={lam:.6f} with the step size at floor "
            f"(smallest |det| seen: {min_step_det:.3e})"
        )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Biorthonormal eigendecomposition A = sum_k lambda_k |r_k><l_k|.

    eigenvalues are sorted by (Re, Im) ascending.  right_vectors holds the
    right eigenvectors as columns, left_vectors the left eigenvectors as
    rows, normalized so that left_vectors @ right_vectors = identity.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    condition_estimate: float


@dataclass(frozen=True)
class BranchTrace:
    """Diagnostics of one sqrt-det analytic continuation.

    steps counts the lambda points actually evaluated, final_value is the
    continued square root at lambda=1, min_step_det the smallest |det|
    encountered along the path, and vanished marks an (exactly) zero
    determinant at the endpoint.  certified is cleared when the branch
    parity rests on the endpoint phase alone (determinant too small for
    the reconstruction to check it): the magnitude is still right but the
    sign may not be.
    """

    steps: int
    final_value: complex
    min_step_det: float
    vanished: bool = False
    certified: bool = True


def _require_square(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def matexp(A):
    """Matrix exponential e^A of a square complex matrix.

    Scaling-and-squaring with Pade approximants.  Raises on non-square or
    non-finite input, and reports overflow instead of clamping it.
    """
    A = _require_square(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix exponential of non-finite input")
    E = scipy.linalg.expm(A)
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix exponential overflowed for extreme input norm")
    return E


def eig_biorthonormal(A):
    """Eigendecomposition with a biorthonormal left/right pairing.

    Returns a SpectralDecomposition with eigenvalues sorted by (Re, Im)
    ascending.  The left vectors are the rows of the inverse of the
    right-vector matrix, so <l_k|r_q> = delta_kq holds by construction and
    A = R diag(lambda) L reconstructs the input.  A condition estimate of
    the right-vector matrix is reported; above NEAR_DEFECTIVE_CONDITION the
    decomposition is rejected as near-defective.
    """
    A = _require_square(A)
    lam, R = scipy.linalg.eig(A)
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    R = R[:, order]
    cond = float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > NEAR_DEFECTIVE_CONDITION:
        raise NearDefectiveError(cond if np.isfinite(cond) else np.inf)
    L = np.linalg.inv(R)
    return SpectralDecomposition(
        eigenvalues=lam, right_vectors=R, left_vectors=L, condition_estimate=cond
    )


def _rcond_estimate(lu, anorm):
    # LAPACK 1-norm reciprocal condition estimate from an LU factorization.
    rcond, info = scipy.linalg.lapack.zgecon(lu, anorm, norm="1")
    if info < 0:
        raise ValueError(f"internal error in condition estimation (info={info})")
    return float(rcond)


def solve(A, B, rcond_floor=1e-14):
    """Solve A X = B by partial-pivoted LU.

    Raises SingularMatrixError carrying the reciprocal condition estimate
    when that estimate falls below rcond_floor.  Use solve_with_rcond to
    get the estimate alongside the solution.
    """
    X, _ = solve_with_rcond(A, B, rcond_floor=rcond_floor)
    return X


def solve_with_rcond(A, B, rcond_floor=1e-14):
    """Like solve, additionally returning the reciprocal condition estimate."""
    A = _require_square(A)
    B = np.asarray(B, dtype=complex)
    anorm = np.linalg.norm(A, 1)
    lu, piv = scipy.linalg.lu_factor(A)
    if anorm == 0.0:
        raise SingularMatrixError(0.0)
    rcond = _rcond_estimate(lu, anorm)
    if rcond < rcond_floor or not np.isfinite(rcond):
        raise SingularMatrixError(rcond)
    X = scipy.linalg.lu_solve((lu, piv), B)
    return X, rcond


def _slogdet(A):
    # (phase on the unit circle or 0, log|det|); LU based, overflow safe.
    sign, logabs = np.linalg.slogdet(A)
    return sign, logabs


def _principal(angle):
    # map an angle difference to (-pi, pi]
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def sqrt_det_analytic(kind, A, N, max_depth=None):
    """Analytic-branch square root of a determinant.

    kind="gaussian-trace": continue Z(lam) = sqrt(det[1 + e^(lam A)]) from
    Z(0) = 2^N to lam = 1; this is the trace of the Gaussian operator with
    exponent matrix A.  kind="affine": continue
    Z(lam) = sqrt(det[(1-lam) 1 + lam A]) from Z(0) = 1; this is the branch
    prescription for a determinant whose argument is affine in a B-type
    matrix.  Returns (value, BranchTrace); see sqrt_det_along for the
    continuation mechanics and failure modes.
    """
    A = _require_square(A)
    n2 = A.shape[0]
    if n2 != 2 * N:
        raise ValueError(f"expected a {2*N}x{2*N} matrix for N={N}, got {A.shape}")
    eye = np.eye(n2, dtype=complex)

    if kind == "gaussian-trace":
        def family(lam):
            return eye + scipy.linalg.expm(lam * A)
        z0 = 2.0 ** N
    elif kind == "affine":
        def family(lam):
            return (1.0 - lam) * eye + lam * A
        z0 = 1.0
    else:
        raise ValueError(f"unknown branch-form kind {kind!r}")
    return sqrt_det_along(family, z0, max_depth=max_depth)


def sqrt_det_along(family, z0, max_depth=None):
    """Continue sqrt(det family(lam)) along lam in [0, 1] by adaptive steps.

    family maps lam to a square matrix; z0 is the square root of
    det family(0), which anchors the branch.  The branch is fixed by
    continuity: walk lam from 0 to 1 on an adaptive grid (initial
    BRANCH_INITIAL_STEPS steps, halving whenever the phase of the
    determinant jumps by more than pi/2, at most max_depth halvings,
    default BRANCH_MAX_DEPTH), accumulating the unwrapped phase of det.
    Returns (value, BranchTrace).  A determinant that vanishes exactly at
    lam = 1 yields value 0 with the vanished flag set; vanishing at
    interior lam with the step at floor raises BranchAmbiguityError.
    Callers facing a zero that sits very close to (but off) the path, such
    as string matrices at statistical angles nudged away from pi, may pass
    a larger max_depth to resolve the passage.
    """
    if max_depth is None:
        max_depth = BRANCH_MAX_DEPTH

    sign0, logabs0 = _slogdet(family(0.0))
    # det at lam=0 is 4^N (gaussian-trace) or 1 (affine); both are safely
    # nonzero, so sign0 is a pure phase.
    phase_prev = float(np.angle(sign0))
    logabs_prev = logabs0
    theta = 0.0
    min_step_det = float(np.exp(min(logabs0, 700.0)))
    steps = 1

    min_step = 1.0 / (BRANCH_INITIAL_STEPS * 2 ** max_depth)
    lam = 0.0
    step = 1.0 / BRANCH_INITIAL_STEPS
    while lam < 1.0 - 1e-15:
        step = min(step, 1.0 - lam)
        trial = lam + step
        sign_t, logabs_t = _slogdet(family(trial))
        steps += 1
        if sign_t == 0 or not np.isfinite(logabs_t):
            # exactly singular point
            if trial >= 1.0 - 1e-15:
                trace = BranchTrace(steps, 0.0 + 0.0j, 0.0, vanished=True)
                return 0.0 + 0.0j, trace
            if step / 2.0 < min_step:
                raise BranchAmbiguityError(trial, 0.0)
            step /= 2.0
            continue
        jump = _principal(float(np.angle(sign_t)) - phase_prev)
        swing = abs(logabs_t - logabs_prev)
        if (abs(jump) > BRANCH_PHASE_JUMP or swing > BRANCH_MAG_JUMP) \
                and step / 2.0 >= min_step:
            # a fast magnitude swing means the path is closing in on a zero
            # whose phase winding a coarse step would alias away
            step /= 2.0
            continue
        if abs(jump) > BRANCH_PHASE_JUMP:
            # step at floor and the phase still rotates too fast: det passes
            # through (or very near) zero inside the interval
            raise BranchAmbiguityError(trial, float(np.exp(min(logabs_t, 700.0))))
        lam = trial
        theta += jump
        phase_prev = float(np.angle(sign_t))
        logabs_prev = logabs_t
        min_step_det = min(min_step_det, float(np.exp(min(logabs_t, 700.0))))
        # gently re-open the step so an early refinement does not force a
        # tiny grid all the way to lam=1
        step *= 2.0
        step = min(step, 1.0 / BRANCH_INITIAL_STEPS)

    # anchored ratio: Z(1) = Z(0) * sqrt(det(1)/det(0)) on the traced branch,
    # which makes the A = 0 case exactly 2^N
    value = z0 * np.exp(0.5 * (logabs_prev - logabs0) + 0.5j * theta)
    trace = BranchTrace(steps, complex(value), min_step_det, vanished=False)
    return complex(value), trace


def _poly_sqrt(P, scale):
    """Square root of a near-perfect-square polynomial (descending coeffs).

    P has odd length 2w + 1; returns (R, residual) with R of length w + 1
    and residual = max |conv(R, R) - P|.  Seeded from pairing the roots of
    P (an exact square has every root doubled; rounding splits the pairs
    but their midpoints stay second-order accurate), then polished by
    Gauss-Newton on the coefficients, which restores the edge coefficients
    that ill-conditioned far roots scatter.
    """
    w = len(P) // 2
    roots = list(np.roots(P))
    centers = []
    while len(roots) >= 2:
        z0 = roots.pop(0)
        sep = [abs(z0 - r) for r in roots]
        centers.append(0.5 * (z0 + roots.pop(int(np.argmin(sep)))))
    R = np.sqrt(P[0] + 0.0j) * np.poly(centers)
    if len(R) < w + 1:  # np.roots drops exact-zero leading coefficients
        R = np.concatenate([np.zeros(w + 1 - len(R), dtype=complex), R])

    def residual(Rc):
        return np.convolve(Rc, Rc) - P

    best = R
    best_err = float(np.max(np.abs(residual(R))))
    for _ in range(60):
        if best_err <= 1e-12 * scale:
            break
        conv = np.zeros((2 * w + 1, w + 1), dtype=complex)
        for col in range(w + 1):
            conv[col:col + w + 1, col] = 2.0 * best
        step, *_ = np.linalg.lstsq(conv, -residual(best), rcond=None)
        trial = best + step
        err = float(np.max(np.abs(residual(trial))))
        if err >= 0.7 * best_err:  # stalled at the noise floor
            if err < best_err:
                best, best_err = trial, err
            break
        best, best_err = trial, err
    return best, best_err


def sqrt_det_periodic(family, z0, degree, omega):
    """Continue sqrt(det family(lam)) along lam in [0, 1] without stepping.

    Requires det family(lam) to be a Laurent polynomial of order at most
    degree in e^{i omega lam} with 0 < omega <= pi, which holds whenever
    family(lam) = 1 + V (e^{lam D} - 1) with D diagonal carrying entries
    +/- i omega, at most degree of either sign.  The determinant is
    reconstructed exactly from 2 degree + 1 samples, so phase windings
    that concentrate near a zero cannot be aliased away by step-size
    heuristics.

    The caller must also guarantee that det family is c * T(lam)^2 with
    T a trigonometric polynomial of half the order (traces of Gaussian
    operator products are, T being the trace itself).  The determinant
    coefficients are then an exact polynomial square, the square root is
    recovered by root pairing plus Gauss-Newton polishing, and the
    winding comes from the simple, well-conditioned roots of T.  Branch
    safety does not rest on classifying those roots: mistaking one side
    of the unit circle for the other shifts the winding by 4 pi, which
    leaves sqrt(det) unchanged.  What can flip the sign is a winding off
    by an odd multiple of 2 pi, so the accumulated winding is checked
    against the endpoint phase computed directly from the endpoint
    matrix and snapped onto it; the parity of the snap is trusted only
    while the residual stays far below pi.  Failing that certificate
    (or the squareness one) raises BranchAmbiguityError, unless the
    endpoint determinant is so small that sqrt(det) lies below any
    useful magnitude and the branch cannot matter.  Returns
    (value, BranchTrace).
    """
    if not 0.0 < omega <= np.pi + 1e-12:
        raise ValueError(f"omega must lie in (0, pi], got {omega}")
    sign0, logabs0 = _slogdet(family(0.0))
    sign1, logabs1 = _slogdet(family(1.0))
    det1 = sign1 * np.exp(min(logabs1, 700.0))
    if sign1 == 0:
        trace = BranchTrace(2, 0.0 + 0.0j, 0.0, vanished=True)
        return 0.0 + 0.0j, trace
    phase_diff = float(np.angle(sign1) - np.angle(sign0))
    if logabs1 - logabs0 < np.log(PERIODIC_SHORTCUT):
        # magnitude this small puts the value below the reconstruction's
        # reach; take it from the endpoint alone and flag the parity as
        # unchecked (callers that go on to amplify it must re-derive)
        value = z0 * np.exp(0.5 * (logabs1 - logabs0) + 0.5j * phase_diff)
        trace = BranchTrace(2, complex(value), float(np.abs(det1)),
                            vanished=False, certified=False)
        return complex(value), trace

    n = 2 * degree + 1
    period = 2.0 * np.pi / omega
    samples = np.array(
        [np.linalg.det(family(period * m / n)) for m in range(n)]
    )
    coeffs = np.fft.fft(samples) / n  # index r holds the z^r coefficient mod n
    scale = np.abs(coeffs).max()
    ks = np.where(np.arange(n) <= degree, np.arange(n), np.arange(n) - n)

    def series(u):
        return np.sum(coeffs * np.exp(1j * omega * u * ks))

    u_mid = 0.5 / np.e + 0.3  # off the sampling grid
    if (
        abs(series(1.0) - det1) > 1e-8 * scale
        or abs(series(u_mid) - np.linalg.det(family(u_mid))) > 1e-8 * scale
    ):
        raise BranchAmbiguityError(1.0, float(np.abs(det1)))

    # det(u) = z^{-degree} P(z) with z = e^{i omega u} and P = c T^2
    poly = coeffs[ks.argsort()[::-1]]  # c_degree, ..., c_-degree
    half, square_err = _poly_sqrt(poly, scale)
    if square_err > 1e-9 * scale:
        raise BranchAmbiguityError(1.0, float(np.abs(det1)))
    roots = np.roots(half)

    # winding of arg(z - root) along the arc, doubled: monotone increasing
    # for roots inside the circle (the positive 2 pi branch), subtending
    # less than pi for roots outside (the principal branch)
    rho = np.abs(roots)
    end = np.exp(1j * omega)
    raw = np.angle(end - roots) - np.angle(1.0 - roots)
    principal = np.angle(np.exp(1j * raw))
    delta = np.where(rho < 1.0, np.mod(raw, 2.0 * np.pi), principal)
    cand = 2.0 * float(delta.sum()) - degree * omega
    resid = _principal(cand - phase_diff)
    # snapping onto the endpoint phase removes the continuous part of the
    # root-position error; what remains is the parity bit, which rounding
    # decided with a margin of (pi - |resid|)
    winding = cand - resid
    certified = abs(resid) <= PERIODIC_RESID_ACCEPT
    if not certified and np.abs(det1) >= PERIODIC_TAIL_FLOOR * scale:
        raise BranchAmbiguityError(1.0, float(np.abs(det1)))

    value = z0 * np.exp(0.5 * (logabs1 - logabs0) + 0.5j * winding)
    min_det = float(min(np.abs(samples).min(), np.abs(det1)))
    trace = BranchTrace(n + 4, complex(value), min_det, vanished=False,
                        certified=certified)
    return complex(value), trace

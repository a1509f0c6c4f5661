import numpy as np
import pytest
import scipy.linalg

from lindblad_cf.linalg import (
    BranchAmbiguityError,
    NearDefectiveError,
    SingularMatrixError,
    _poly_sqrt,
    eig_biorthonormal,
    matexp,
    solve,
    sqrt_det_along,
    sqrt_det_analytic,
    sqrt_det_periodic,
)
from lindblad_cf.model import tau_x


def random_valid_k(rng, N, strength=0.4):
    A = strength * (rng.standard_normal((2 * N, 2 * N))
                    + 1j * rng.standard_normal((2 * N, 2 * N)))
    tx = tau_x(N)
    return A - tx @ A.T @ tx


def test_matexp_times_inverse_is_identity(rng):
    for n in (2, 5, 9):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A *= 10.0 / np.linalg.norm(A, 2)
        prod = matexp(A) @ matexp(-A)
        assert np.max(np.abs(prod - np.eye(n))) < 1e-10


def test_matexp_nilpotent():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(matexp(A), np.array([[1.0, 1.0], [0.0, 1.0]]),
                       atol=1e-14)


def test_matexp_rejects_nonsquare_and_nonfinite():
    with pytest.raises(ValueError):
        matexp(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        matexp(np.array([[np.nan, 0.0], [0.0, 0.0]]))


def test_solve_identity_returns_rhs():
    B = np.arange(6.0).reshape(2, 3)
    assert np.allclose(solve(np.eye(2), B), B)


def test_solve_diagonal():
    X = solve(np.diag([2.0, 4.0]), np.eye(2))
    assert np.allclose(X, np.diag([0.5, 0.25]))


def test_solve_residual(rng):
    A = rng.standard_normal((10, 10)) + 3.0 * np.eye(10)
    B = rng.standard_normal((10, 4))
    X = solve(A, B)
    assert np.max(np.abs(A @ X - B)) < 1e-11


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_solve_singular_carries_condition():
    with pytest.raises(SingularMatrixError) as err:
        solve(np.ones((3, 3)), np.eye(3))
    assert err.value.rcond < 1e-14


def test_eig_biorthonormal_invariants(rng):
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    d = eig_biorthonormal(A)
    eye = d.left_vectors @ d.right_vectors
    assert np.max(np.abs(eye - np.eye(6))) < 1e-10
    recon = d.right_vectors @ np.diag(d.eigenvalues) @ d.left_vectors
    assert np.max(np.abs(recon - A)) < 1e-9
    assert np.all(np.diff(d.eigenvalues.real) >= -1e-12)


def test_eig_biorthonormal_rejects_defective():
    with pytest.raises(NearDefectiveError):
        eig_biorthonormal(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_sqrt_det_analytic_squares_to_det(rng):
    for N in (1, 2, 3):
        for _ in range(10):
            K = random_valid_k(rng, N)
            z, trace = sqrt_det_analytic("gaussian-trace", K, N)
            det = np.linalg.det(np.eye(2 * N) + scipy.linalg.expm(K))
            assert abs(z * z - det) < 1e-8 * abs(det)
            assert trace.steps >= 2


def test_sqrt_det_analytic_zero_matrix_exact():
    for N in (1, 2, 3):
        z, _ = sqrt_det_analytic("gaussian-trace", np.zeros((2 * N, 2 * N)), N)
        assert z == 2.0 ** N


def test_sqrt_det_analytic_affine(rng):
    # branch continuation from det = 1 along the affine family
    N = 2
    A = np.eye(2 * N) + 0.3 * (rng.standard_normal((2 * N, 2 * N))
                               + 1j * rng.standard_normal((2 * N, 2 * N)))
    z, _ = sqrt_det_analytic("affine", A, N)
    det = np.linalg.det(A)
    assert abs(z * z - det) < 1e-8 * abs(det)


def test_sqrt_det_along_tracks_winding():
    # det walks three half turns; the principal square root of the
    # endpoint would sit on the wrong branch
    theta = 1.5 * np.pi

    def family(lam):
        return np.array([[np.exp(1j * theta * lam)]])

    z, _ = sqrt_det_along(family, 1.0)
    assert abs(z - np.exp(0.5j * theta)) < 1e-10


def test_sqrt_det_along_interior_zero_raises():
    def family(lam):
        return np.array([[lam - 0.497]])

    with pytest.raises(BranchAmbiguityError):
        sqrt_det_along(family, np.sqrt(0.497) * 1j)


def test_poly_sqrt_recovers_half(rng):
    for deg in (1, 3, 6):
        half = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        P = np.convolve(half, half)
        R, resid = _poly_sqrt(P, float(np.abs(P).max()))
        assert resid < 1e-10 * np.abs(P).max()
        back = np.convolve(R, R)
        assert np.max(np.abs(back - P)) < 1e-9 * np.abs(P).max()


def _square_family(roots, c, omega):
    # det(u) = c z^{-w} prod (z - r)^2 with z = e^{i omega u}: a perfect
    # square Laurent polynomial, the shape sqrt_det_periodic is built for
    w = len(roots)

    def family(u):
        z = np.exp(1j * omega * u)
        val = c * z ** (-w)
        for r in roots:
            val = val * (z - r) ** 2
        return np.array([[val]])

    def continued(u):
        # sqrt continued from u=0: every factor is linear in z, hence
        # single valued; only sqrt(c) needs a fixed branch
        z = np.exp(1j * omega * u)
        val = np.sqrt(c) * z ** (-w / 2.0)
        for r in roots:
            val = val * (z - r)
        return val

    return family, continued


def test_sqrt_det_periodic_winding_both_sides(rng):
    # roots crowding the unit circle force windings that stepping
    # heuristics alias; the polynomial route must get them all
    cases = [
        ([0.9 * np.exp(0.4j)], np.pi / 2),
        ([1.08 * np.exp(1.1j), 0.93 * np.exp(-2.0j)], np.pi),
        ([0.5, 2.0, 0.95 * np.exp(2.8j)], 2.2),
        ([1.05 * np.exp(1j * a) for a in (0.3, 1.7, -2.1, 2.9)], np.pi),
    ]
    for roots, omega in cases:
        c = np.exp(1j * rng.uniform(-np.pi, np.pi)) * rng.uniform(0.5, 2.0)
        family, continued = _square_family(roots, c, omega)
        z0 = continued(0.0)
        z, trace = sqrt_det_periodic(family, z0, len(roots), omega)
        expected = continued(1.0)
        assert abs(z - expected) < 1e-8 * abs(expected)
        assert trace.certified


def test_sqrt_det_periodic_shortcut_flags_uncertified():
    # endpoint determinant far below reach: magnitude kept, parity flagged
    def family(u):
        return np.array([[(1e-25) ** u]])

    z, trace = sqrt_det_periodic(family, 1.0, 1, np.pi)
    assert not trace.certified
    assert abs(abs(z) - np.sqrt(1e-25)) < 1e-15


def test_sqrt_det_periodic_vanished_endpoint():
    def family(u):
        return np.array([[1.0 - u]])

    z, trace = sqrt_det_periodic(family, 1.0, 1, np.pi)
    assert z == 0.0
    assert trace.vanished


def test_sqrt_det_periodic_rejects_non_square_det():
    # det linear in z is band limited but not a perfect square
    def family(u):
        return np.array([[2.0 + np.exp(1j * np.pi * u)]])

    with pytest.raises(BranchAmbiguityError):
        sqrt_det_periodic(family, np.sqrt(3.0), 1, np.pi)

import numpy as np
import pytest
import scipy.linalg

from lindblad_cf.linalg import sqrt_det_analytic
from lindblad_cf.model import KitaevParams, build_kitaev, quadratic_model
from lindblad_cf.oracle import (
    OracleWorkspace,
    annihilation_ops,
    charge_op,
    fock_build,
    gamma2_fock,
    liouvillian,
    number_op,
    oracle_evolve,
    oracle_steady,
    parity_op,
    string_op,
)
from test_linalg import random_valid_k
from test_model import random_model


def test_car_relations():
    N = 3
    c = annihilation_ops(N)
    dim = 2 ** N
    for i in range(N):
        for j in range(N):
            anti = c[i] @ c[j].conj().T + c[j].conj().T @ c[i]
            expected = np.eye(dim) if i == j else np.zeros((dim, dim))
            assert np.array_equal(anti, expected)
            assert np.array_equal(c[i] @ c[j], -c[j] @ c[i])


def test_single_site_hamiltonian():
    # mu-only chain, smallest case: H = -mu n up to a scalar offset
    m = quadratic_model(np.diag([-0.8, 0.8]), [])
    H, _, c = fock_build(m)
    n1 = number_op(c, 1)
    shifted = H - H[0, 0] * np.eye(2)
    assert np.allclose(shifted, -0.8 * n1, atol=1e-12)


def test_kitaev_fock_matches_bilinear():
    m = build_kitaev(KitaevParams(N=2, J=1.0, Delta=0.4, mu=0.7))
    H, _, c = fock_build(m)
    row = [op.conj().T for op in c] + list(c)
    col = list(c) + [op.conj().T for op in c]
    direct = sum(
        0.5 * m.H[a, b] * (row[a] @ col[b])
        for a in range(4) for b in range(4)
    )
    assert np.max(np.abs(H - direct)) < 1e-12


def test_liouvillian_preserves_trace(rng):
    m = random_model(rng, 2)
    L = liouvillian(m)
    dim = 2 ** m.N
    rho = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal(
        (dim, dim))
    drho = (L @ rho.reshape(-1)).reshape(dim, dim)
    assert abs(np.trace(drho)) < 1e-10
    # the left null vector is the vectorized identity
    assert np.max(np.abs(np.eye(dim).reshape(-1) @ L)) < 1e-10


def test_liouvillian_annihilates_steady():
    m = build_kitaev(KitaevParams(N=3, J=1.0, Delta=0.5, mu=1.0,
                                  gamma_minus=0.3, gamma_plus=0.1))
    ws = OracleWorkspace(m)
    rho_s = ws.steady_state()
    resid = (ws.superoperator() @ rho_s.reshape(-1)).reshape(rho_s.shape)
    assert np.max(np.abs(resid)) < 1e-9


def test_parity_identity(rng):
    # P_F e^{L_f t}[P_F rho] = e^{L t}[rho] on random operators
    m = random_model(rng, 2)
    ws = OracleWorkspace(m)
    P = parity_op(2)
    t = 0.7
    for _ in range(5):
        rho = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        lhs = P @ ws.evolve(P @ rho, t, fermionic_sign=True)
        rhs = ws.evolve(rho, t)
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_fermionic_liouvillian_not_trace_preserving():
    m = build_kitaev(KitaevParams(N=2, J=1.0, Delta=0.3, gamma_minus=0.4))
    Lf = liouvillian(m, fermionic_sign=True)
    dim = 2 ** m.N
    assert np.max(np.abs(np.eye(dim).reshape(-1) @ Lf)) > 1e-3


def test_anyon_exchange_relations():
    # f_l f_m^+ + e^{-i phi sgn(l - m)} f_m^+ f_l = delta_lm
    N = 3
    c = annihilation_ops(N)
    dim = 2 ** N
    for phi in (np.pi / 5, np.pi / 2, np.pi):
        f = [string_op(c, l, phi, sign=-1) @ c[l - 1]
             for l in range(1, N + 1)]
        for l in range(1, N + 1):
            for m in range(1, N + 1):
                phase = np.exp(-1j * phi * np.sign(l - m))
                lhs = f[l - 1] @ f[m - 1].conj().T \
                    + phase * f[m - 1].conj().T @ f[l - 1]
                expected = np.eye(dim) if l == m else np.zeros((dim, dim))
                assert np.max(np.abs(lhs - expected)) < 1e-13


def test_gamma2_trace_matches_sqrt_det(rng):
    for N in (1, 2, 3):
        c = annihilation_ops(N)
        for _ in range(5):
            K = random_valid_k(rng, N)
            lhs = np.trace(gamma2_fock(c, K))
            rhs, _ = sqrt_det_analytic("gaussian-trace", K, N)
            assert abs(lhs - rhs) < 1e-8 * abs(rhs)


def test_oracle_evolve_basics(rng):
    m = build_kitaev(KitaevParams(N=2, J=1.0, Delta=0.5, mu=0.4,
                                  gamma_minus=0.2, gamma_plus=0.1))
    dim = 4
    rho0 = rng.standard_normal((dim, dim))
    rho0 = rho0 @ rho0.T
    rho0 = (rho0 / np.trace(rho0)).astype(complex)
    assert np.max(np.abs(oracle_evolve(m, rho0, 0.0) - rho0)) < 1e-12
    rho_t = oracle_evolve(m, rho0, 1.3)
    assert abs(np.trace(rho_t) - 1.0) < 1e-10
    assert np.linalg.eigvalsh((rho_t + rho_t.conj().T) / 2).min() > -1e-9


def test_gamma_zero_evolution_is_unitary(rng):
    m = build_kitaev(KitaevParams(N=2, J=1.0, Delta=0.5, mu=0.4))
    H, _, _ = fock_build(m)
    dim = 4
    rho0 = rng.standard_normal((dim, dim))
    rho0 = (rho0 @ rho0.T).astype(complex)
    rho0 /= np.trace(rho0)
    t = 0.9
    U = scipy.linalg.expm(-1j * H * t)
    expected = U @ rho0 @ U.conj().T
    assert np.max(np.abs(oracle_evolve(m, rho0, t) - expected)) < 1e-10


def test_long_time_evolution_reaches_steady():
    m = build_kitaev(KitaevParams(N=2, J=1.0, Delta=0.5, mu=0.4,
                                  gamma_minus=0.5, gamma_plus=0.2))
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    far = oracle_evolve(m, rho0, 80.0)
    assert np.max(np.abs(far - oracle_steady(m))) < 1e-9


def test_charge_op_spectrum():
    c = annihilation_ops(3)
    Q = charge_op(c, (1, 3))
    vals = np.sort(np.real(np.diag(Q)))
    assert set(np.rint(vals).astype(int)) == {0, 1, 2}


def test_fock_cap():
    with pytest.raises(ValueError):
        annihilation_ops(13)

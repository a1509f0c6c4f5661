import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from lindblad_cf.model import KitaevParams, build_kitaev, tau_x
from lindblad_cf.oracle import OracleWorkspace, number_op
from lindblad_cf.propagator import (
    damping_matrix,
    decompose,
    evolve_covariance,
    liouvillian_spectrum_from_rapidities,
    m_quadrature,
    propagators,
    rapidity_spectrum,
    response_function,
    retarded_gf,
    steady_m,
)
from lindblad_cf.correlators import gaussian_state_vacuum
from test_model import random_model


def kitaev3():
    return build_kitaev(KitaevParams(N=3, J=1.0, Delta=0.5, mu=1.0,
                                     gamma_minus=0.3, gamma_plus=0.1))


def test_propagator_set_invariants():
    m = kitaev3()
    tx = tau_x(m.N)
    decomp = decompose(m)
    for t in (0.1, 0.5, 1.0, 3.0, 10.0):
        p = propagators(m, t, decomp=decomp)
        assert np.max(np.abs(p.Qbar - tx @ p.Q.T @ tx)) < 1e-12
        assert np.max(np.abs(p.M + tx @ p.M.T @ tx)) < 1e-10


def test_propagators_identity_at_zero():
    m = kitaev3()
    p = propagators(m, 0.0)
    assert np.max(np.abs(p.Q - np.eye(6))) < 1e-14
    assert np.max(np.abs(p.M)) < 1e-12


def test_semigroup_composition(rng):
    for _ in range(10):
        m = random_model(rng, 3)
        vac = gaussian_state_vacuum(3)
        t1, t2 = rng.uniform(0.1, 1.5, size=2)
        once = evolve_covariance(m, vac.B, t1 + t2)
        twice = evolve_covariance(m, evolve_covariance(m, vac.B, t1), t2)
        assert np.max(np.abs(once - twice)) < 1e-9


def test_evolved_covariance_symmetry(rng):
    m = random_model(rng, 3)
    tx = tau_x(3)
    C = evolve_covariance(m, gaussian_state_vacuum(3).B, 0.8)
    assert np.max(np.abs(C + tx @ C.T @ tx - np.eye(6))) < 1e-10


def test_long_time_limits():
    m = kitaev3()
    gap = rapidity_spectrum(m).gap
    t = 40.0 / gap
    p = propagators(m, t)
    assert np.linalg.norm(p.Q, 2) < 1e-6
    assert np.max(np.abs(p.M - steady_m(m))) < 1e-6


def test_m_quadrature_matches_closed_form():
    m = kitaev3()
    for t in (0.3, 1.1):
        direct = propagators(m, t).M
        quad = m_quadrature(m, t)
        assert np.max(np.abs(direct - quad)) < 1e-9


def test_covariance_evolution_matches_oracle():
    m = kitaev3()
    ws = OracleWorkspace(m)
    dim = 2 ** m.N
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[0, 0] = 1.0
    vac = gaussian_state_vacuum(m.N)
    for t in (0.0, 0.5, 2.0):
        C = evolve_covariance(m, vac.B, t)
        C_o = ws.covariance(ws.evolve(rho0, t))
        assert np.max(np.abs(C - C_o)) < 1e-9


def test_steady_covariance_matches_oracle():
    m = kitaev3()
    ws = OracleWorkspace(m)
    C = 0.5 * np.eye(6) + steady_m(m)
    C_o = ws.covariance(ws.steady_state())
    assert np.max(np.abs(C - C_o)) < 1e-9


def test_steady_requires_gap():
    m = build_kitaev(KitaevParams(N=3, J=1.0, Delta=0.5))
    with pytest.raises(ValueError):
        steady_m(m)


def test_rapidity_liouvillian_spectrum():
    m = build_kitaev(KitaevParams(N=2, J=1.0, Delta=0.5, mu=1.0,
                                  gamma_minus=0.3, gamma_plus=0.1))
    mine = liouvillian_spectrum_from_rapidities(rapidity_spectrum(m))
    dense = OracleWorkspace(m).liouvillian_eigenvalues()
    cost = np.abs(mine[:, None] - dense[None, :])
    r, c = linear_sum_assignment(cost)
    assert cost[r, c].max() < 1e-8


def test_liouvillian_spectrum_cap():
    m = build_kitaev(KitaevParams(N=5, J=1.0, gamma_minus=0.1))
    with pytest.raises(ValueError):
        liouvillian_spectrum_from_rapidities(rapidity_spectrum(m))


def test_retarded_gf_at_zero():
    m = kitaev3()
    assert np.max(np.abs(retarded_gf(m, 0.0) + 1j * np.eye(6))) < 1e-12
    with pytest.raises(ValueError):
        retarded_gf(m, -0.1)


def test_retarded_gf_is_damped_exponential():
    m = kitaev3()
    t = 1.7
    from lindblad_cf.linalg import matexp
    expected = -1j * matexp(-damping_matrix(m) * t)
    assert np.max(np.abs(retarded_gf(m, t) - expected)) < 1e-12


def test_response_zero_at_equal_time():
    m = kitaev3()
    for i in (1, 2):
        for j in (1, 3):
            assert abs(response_function(m, i, j, 0.0)) < 1e-10


def test_response_matches_oracle():
    m = kitaev3()
    ws = OracleWorkspace(m)
    rho_s = ws.steady_state()
    for (i, j, t) in ((1, 2, 1.0), (2, 2, 0.6), (3, 1, 2.5)):
        d = response_function(m, i, j, t)
        ni = number_op(ws.c_ops, i)
        nj = number_op(ws.c_ops, j)
        fwd = ws.evolve(nj @ rho_s, t)
        bwd = ws.evolve(rho_s @ nj, t)
        d_o = -1j * (np.trace(ni @ fwd) - np.trace(ni @ bwd))
        assert abs(d - d_o) < 1e-8


def test_response_decays():
    m = build_kitaev(KitaevParams(N=3, J=1.0, Delta=0.5, mu=0.4,
                                  gamma_minus=1.5, gamma_plus=0.7))
    assert abs(response_function(m, 1, 2, 60.0)) < 1e-10

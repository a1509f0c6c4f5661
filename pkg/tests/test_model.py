import numpy as np
import pytest

from lindblad_cf.model import (
    KitaevParams,
    build_kitaev,
    quadratic_model,
    tau_x,
    tau_y,
    tau_z,
    validate,
    x_matrices,
)
from lindblad_cf.propagator import rapidity_spectrum


def random_model(rng, N, n_jumps=3, strength=0.5):
    """Random quadratic model honoring the structural constraints."""
    M = rng.standard_normal((2 * N, 2 * N)) + 1j * rng.standard_normal(
        (2 * N, 2 * N))
    M = M + M.conj().T
    tx = tau_x(N)
    H = M - tx @ M.T @ tx
    diss = [strength * (rng.standard_normal(2 * N)
                        + 1j * rng.standard_normal(2 * N))
            for _ in range(n_jumps)]
    return quadratic_model(H, diss)


def test_tau_matrices_algebra():
    N = 3
    tx, ty, tz = tau_x(N), tau_y(N), tau_z(N)
    eye = np.eye(2 * N)
    assert np.allclose(tx @ tx, eye)
    assert np.allclose(ty @ ty, eye)
    assert np.allclose(tz @ tz, eye)
    assert np.allclose(tx @ ty, 1j * tz)


def test_kitaev_structure():
    m = build_kitaev(KitaevParams(N=3, J=1.0, Delta=0.4, mu=0.7,
                                  gamma_minus=0.3, gamma_plus=0.1))
    assert validate(m) == []
    # hopping and pairing blocks
    assert m.H[0, 1] == 1.0
    assert m.H[0, 0] == -0.7
    assert m.H[0, 4] == -0.4
    assert m.H[1, 3] == 0.4
    assert m.H[4, 3] == pytest.approx(-1.0)
    # boundary dissipation only: sites 1 and N
    assert len(m.dissipators) == 4
    occupied = {int(np.argmax(np.abs(l))) for l in m.dissipators}
    assert occupied == {0, 2, 3, 5}


def test_kitaev_site_rate_overrides():
    p = KitaevParams(N=4, gamma_minus_site=(0.1, 0.2, 0.0, 0.3))
    m = build_kitaev(p)
    assert len(m.dissipators) == 3
    with pytest.raises(ValueError):
        KitaevParams(N=4, gamma_minus_site=(0.1, 0.2))
    with pytest.raises(ValueError):
        KitaevParams(N=4, gamma_plus=-0.1)
    with pytest.raises(ValueError):
        KitaevParams(N=1)


def test_x_matrices_symmetries(rng):
    N = 3
    diss = [rng.standard_normal(2 * N) + 1j * rng.standard_normal(2 * N)
            for _ in range(4)]
    Xp, Xm = x_matrices(diss, N)
    tx = tau_x(N)
    assert np.max(np.abs(Xp - Xp.conj().T)) < 1e-12
    assert np.max(np.abs(tx @ Xp.T @ tx - Xp)) < 1e-12
    assert np.max(np.abs(tx @ Xm.T @ tx + Xm)) < 1e-12
    assert np.linalg.eigvalsh(Xp).min() > -1e-12
    with pytest.raises(ValueError):
        x_matrices([np.ones(3)], N)


def test_validate_flags_broken_symmetry():
    m = build_kitaev(KitaevParams(N=3, J=1.0, Delta=0.2, gamma_minus=0.1))
    H = m.H.copy()
    H[0, 1] += 1e-3
    bad = dict(validate(quadratic_model(H, m.dissipators, check=False)))
    assert "H_hermiticity" in bad
    assert bad["H_hermiticity"] == pytest.approx(1e-3, rel=1e-6)
    with pytest.raises(ValueError):
        quadratic_model(H, m.dissipators)


def test_rapidities_nonnegative_real(rng):
    for _ in range(10):
        m = random_model(rng, 3)
        spec = rapidity_spectrum(m)
        assert spec.lambdas.real.min() >= -1e-10


def test_rapidities_ph_reflection(rng):
    # X+ + iH and X+ - iH share their spectrum (Qbar = tau_x Q^T tau_x)
    from scipy.optimize import linear_sum_assignment

    m = random_model(rng, 3)
    a = np.linalg.eigvals(m.Xplus + 1j * m.H)
    b = np.linalg.eigvals(m.Xplus - 1j * m.H)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    assert cost[r, c].max() < 1e-9


def test_kitaev_edge_modes_inside_topological_window():
    # two real rapidities (edge modes) for |mu| <= 2J at Delta != 0; the
    # finite chain splits them exponentially, so probe well inside
    for mu in (0.0, 0.5, 1.0, 1.5):
        m = build_kitaev(KitaevParams(N=64, J=1.0, Delta=0.5, mu=mu,
                                      gamma_minus=0.5, gamma_plus=0.2))
        lam = rapidity_spectrum(m).lambdas
        n_real = int(np.sum(np.abs(lam.imag) < 1e-8))
        assert n_real >= 2, "mu=%g: %d real rapidities" % (mu, n_real)


def test_no_edge_modes_outside_window():
    m = build_kitaev(KitaevParams(N=64, J=1.0, Delta=0.5, mu=2.5,
                                  gamma_minus=0.5, gamma_plus=0.2))
    lam = rapidity_spectrum(m).lambdas
    assert int(np.sum(np.abs(lam.imag) < 1e-8)) == 0


def test_quadratic_model_shape_errors():
    with pytest.raises(ValueError):
        quadratic_model(np.zeros((3, 3)), [])
    with pytest.raises(ValueError):
        quadratic_model(np.zeros((2, 4)), [])

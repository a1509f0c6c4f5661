"""Brute-force Fock-space reference implementation for small chains.

Everything here is built directly on dense 2^N x 2^N matrices and the
vectorized 4^N x 4^N superoperators, independent of the closed-form modules,
so that the two routes can be compared as ground truth against each other.

Conventions, fixed once: the occupation basis is ordered site-1-fastest
(basis index b has n_j = (b >> (j-1)) & 1), and the Jordan-Wigner form of the
annihilation operator is c_j = (prod_{m<j} sigma^z_m) sigma^-_j with
sigma^- = [[0, 1], [0, 0]] and sigma^z = diag(1, -1) on {|0>, |1>}.

Density matrices are vectorized row-major, so vec(A rho B) =
(A kron B^T) vec(rho).
"""

import numpy as np
import scipy.linalg

FOCK_CAP = 12       # operator construction cap (memory)
SUPEROP_CAP = 5     # dense 4^N exponentiation cap

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


def _kron_chain(site_ops):
    # site_ops[j] acts on site j+1; site 1 must vary fastest, which with
    # row-major kron means it sits in the last factor
    out = site_ops[-1]
    for op in reversed(site_ops[:-1]):
        out = np.kron(out, op)
    return out


def annihilation_ops(N):
    """List [c_1, ..., c_N] of Jordan-Wigner annihilation operators."""
    if N > FOCK_CAP:
        raise ValueError(f"N={N} exceeds the Fock-space cap {FOCK_CAP}")
    ops = []
    for j in range(1, N + 1):
        site_ops = []
        for m in range(1, N + 1):
            if m < j:
                site_ops.append(_SIGMA_Z)
            elif m == j:
                site_ops.append(_SIGMA_MINUS)
            else:
                site_ops.append(_ID2)
        ops.append(_kron_chain(site_ops))
    return ops


def number_op(c_ops, j):
    """n_j = c_j^+ c_j (1-based site index)."""
    c = c_ops[j - 1]
    return c.conj().T @ c


def total_number(c_ops):
    return sum(number_op(c_ops, j) for j in range(1, len(c_ops) + 1))


def parity_op(N):
    """P_F = exp(i pi N_total); diagonal +-1 in the occupation basis."""
    dim = 2 ** N
    diag = np.array([(-1.0) ** bin(b).count("1") for b in range(dim)])
    return np.diag(diag.astype(complex))


def charge_op(c_ops, sites):
    """Q_A = sum_{j in A} n_j for a 1-based site set A."""
    N = len(c_ops)
    out = np.zeros((2 ** N, 2 ** N), dtype=complex)
    for j in sites:
        out += number_op(c_ops, j)
    return out


def string_op(c_ops, j, phi, sign=+1):
    """exp(sign * i phi sum_{m<=j} n_m), diagonal in the occupation basis."""
    Qj = charge_op(c_ops, range(1, j + 1))
    return scipy.linalg.expm(1j * sign * phi * Qj)


def row_vector(c_ops):
    """(c^+, c): list of the 2N row-side operators, creation block first."""
    return [c.conj().T for c in c_ops] + list(c_ops)


def column_vector(c_ops):
    """(c; c^+): list of the 2N column-side operators, annihilation first."""
    return list(c_ops) + [c.conj().T for c in c_ops]


def fock_build(model):
    """Hamiltonian and jump operators of a quadratic model in Fock space.

    H = (1/2) sum_{mn} (c^+, c)_m HH_{mn} (c; c^+)_n, and each jump vector
    l gives the operator sum_m conj(l_m) (c; c^+)_m.  Returns
    (H, [L_1, ...], c_ops).
    """
    N = model.N
    c_ops = annihilation_ops(N)
    row = row_vector(c_ops)
    col = column_vector(c_ops)
    dim = 2 ** N
    H = np.zeros((dim, dim), dtype=complex)
    for m in range(2 * N):
        for n in range(2 * N):
            h = model.H[m, n]
            if h != 0.0:
                H += 0.5 * h * (row[m] @ col[n])
    Ls = []
    for l in model.dissipators:
        L = np.zeros((dim, dim), dtype=complex)
        for m in range(2 * N):
            if l[m] != 0.0:
                L += np.conj(l[m]) * col[m]
        Ls.append(L)
    return H, Ls, c_ops


def gamma2_fock(c_ops, K):
    """Gaussian operator Gamma_2(K) = exp[(1/2) (c^+, c) K (c; c^+)]."""
    N = len(c_ops)
    row = row_vector(c_ops)
    col = column_vector(c_ops)
    dim = 2 ** N
    X = np.zeros((dim, dim), dtype=complex)
    for m in range(2 * N):
        for n in range(2 * N):
            k = K[m, n]
            if k != 0.0:
                X += 0.5 * k * (row[m] @ col[n])
    return scipy.linalg.expm(X)


def liouvillian(model, fermionic_sign=False):
    """Dense vectorized superoperator of the master equation.

    fermionic_sign=False builds L(rho) = -i[H, rho]
    + sum_mu (2 L rho L^+ - {L^+ L, rho}); fermionic_sign=True flips the
    sandwich term to -2 L rho L^+, the form required by quantum regression
    for operators of odd fermion parity.
    """
    if model.N > SUPEROP_CAP:
        raise ValueError(f"N={model.N} exceeds the superoperator cap {SUPEROP_CAP}")
    H, Ls, _ = fock_build(model)
    dim = H.shape[0]
    eye = np.eye(dim, dtype=complex)
    sup = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    sandwich = -2.0 if fermionic_sign else 2.0
    for L in Ls:
        LdL = L.conj().T @ L
        sup += sandwich * np.kron(L, L.conj())
        sup -= np.kron(LdL, eye) + np.kron(eye, LdL.T)
    return sup


class OracleWorkspace:
    """Per-model cache of Fock operators and superoperator exponentials.

    Holds H, the jump operators, c_ops, both Liouvillians (built lazily),
    the dense exp(L t) propagators keyed by time, and the steady state.
    Exponentials are taken directly (no spectral decomposition) so defective
    Liouvillians are handled exactly too.  All methods are pure in their
    reported values.
    """

    def __init__(self, model):
        self.model = model
        self.N = model.N
        self.H, self.Ls, self.c_ops = fock_build(model)
        self.dim = 2 ** self.N
        self._sup = {}
        self._props = {}
        self._eigvals = {}
        self._steady = None

    def superoperator(self, fermionic_sign=False):
        key = bool(fermionic_sign)
        if key not in self._sup:
            self._sup[key] = liouvillian(self.model, fermionic_sign=key)
        return self._sup[key]

    def _propagator(self, t, fermionic_sign):
        key = (float(t), bool(fermionic_sign))
        if key not in self._props:
            self._props[key] = scipy.linalg.expm(self.superoperator(fermionic_sign) * t)
        return self._props[key]

    def evolve(self, rho0, t, fermionic_sign=False):
        """exp(L t)[rho0] (or exp(L_f t) with fermionic_sign=True)."""
        vec = self._propagator(t, fermionic_sign) @ np.asarray(rho0, dtype=complex).reshape(-1)
        return vec.reshape(self.dim, self.dim)

    def liouvillian_eigenvalues(self, fermionic_sign=False):
        key = bool(fermionic_sign)
        if key not in self._eigvals:
            self._eigvals[key] = np.linalg.eigvals(self.superoperator(key))
        return self._eigvals[key].copy()

    def steady_state(self):
        """Null vector of the Liouvillian, Hermitized, unit trace."""
        if self._steady is None:
            ns = scipy.linalg.null_space(self.superoperator(False))
            if ns.shape[1] == 0:
                raise ValueError("no steady state found (empty null space)")
            rho = ns[:, 0].reshape(self.dim, self.dim)
            rho = (rho + rho.conj().T) / 2.0
            rho = rho / np.trace(rho)
            self._steady = rho
        return self._steady

    def covariance(self, rho):
        """C = <(c; c^+) (c^+, c)> under rho, a 2N x 2N matrix."""
        row = row_vector(self.c_ops)
        col = column_vector(self.c_ops)
        n2 = 2 * self.N
        C = np.zeros((n2, n2), dtype=complex)
        for a in range(n2):
            for b in range(n2):
                C[a, b] = np.trace(col[a] @ row[b] @ rho)
        return C


def oracle_evolve(model, rho0, t):
    """Reshaped exp(L t) vec(rho0) for N <= SUPEROP_CAP."""
    return OracleWorkspace(model).evolve(rho0, t)


def oracle_steady(model):
    return OracleWorkspace(model).steady_state()


# -- direct trace evaluation of the closed-form targets ------------------

def oracle_typeI(ws, K1, K2, rho0, t):
    """Tr{Gamma_2(K1) exp(L t)[Gamma_2(K2) rho0]}."""
    g1 = gamma2_fock(ws.c_ops, K1)
    g2 = gamma2_fock(ws.c_ops, K2)
    evolved = ws.evolve(g2 @ rho0, t)
    return complex(np.trace(g1 @ evolved))


def oracle_typeII(ws, K1, K2, rho0, t, order="left"):
    """The 2N x 2N matrix of single-particle nonlocal correlators.

    order="left":  Tr{(c; c^+)_a Gamma_2(K1) exp(L_f t)[Gamma_2(K2) (c^+, c)_b rho0]}
    order="right": Tr{(c; c^+)_a Gamma_2(K1) exp(L_f t)[rho0 (c^+, c)_b Gamma_2(K2)]}
    """
    N = ws.N
    g1 = gamma2_fock(ws.c_ops, K1)
    g2 = gamma2_fock(ws.c_ops, K2)
    row = row_vector(ws.c_ops)
    col = column_vector(ws.c_ops)
    out = np.zeros((2 * N, 2 * N), dtype=complex)
    for b in range(2 * N):
        if order == "left":
            seed = g2 @ row[b] @ rho0
        elif order == "right":
            seed = rho0 @ row[b] @ g2
        else:
            raise ValueError(f"unknown order {order!r}")
        evolved = ws.evolve(seed, t, fermionic_sign=True)
        for a in range(2 * N):
            out[a, b] = np.trace(col[a] @ g1 @ evolved)
    return out


def oracle_anyon_greater(ws, l, j, t, phi):
    """iG^>_lj(t) = <f_l(t) f_j^+> in the steady state, t >= 0."""
    rho_s = ws.steady_state()
    c = ws.c_ops
    f_l = string_op(c, l, phi, sign=-1) @ c[l - 1]
    f_j_dag = c[j - 1].conj().T @ string_op(c, j, phi, sign=+1)
    evolved = ws.evolve(f_j_dag @ rho_s, t, fermionic_sign=True)
    return complex(np.trace(f_l @ evolved))


def oracle_anyon_greater_negative(ws, l, j, t, phi):
    """iG^>_lj(-t) = <f_l f_j^+(t)> in the steady state, t >= 0."""
    rho_s = ws.steady_state()
    c = ws.c_ops
    f_l = string_op(c, l, phi, sign=-1) @ c[l - 1]
    f_j_dag = c[j - 1].conj().T @ string_op(c, j, phi, sign=+1)
    evolved = ws.evolve(rho_s @ f_l, t, fermionic_sign=True)
    return complex(np.trace(f_j_dag @ evolved))


def oracle_anyon_lesser(ws, l, j, t, phi):
    """iG^<_lj(t) = <f_j^+ f_l(t)> in the steady state, t >= 0."""
    rho_s = ws.steady_state()
    c = ws.c_ops
    f_l = string_op(c, l, phi, sign=-1) @ c[l - 1]
    f_j_dag = c[j - 1].conj().T @ string_op(c, j, phi, sign=+1)
    evolved = ws.evolve(rho_s @ f_j_dag, t, fermionic_sign=True)
    return complex(np.trace(f_l @ evolved))


def oracle_anyon_lesser_negative(ws, l, j, t, phi):
    """iG^<_lj(-t) = <f_j^+(t) f_l> in the steady state, t >= 0."""
    rho_s = ws.steady_state()
    c = ws.c_ops
    f_l = string_op(c, l, phi, sign=-1) @ c[l - 1]
    f_j_dag = c[j - 1].conj().T @ string_op(c, j, phi, sign=+1)
    evolved = ws.evolve(f_l @ rho_s, t, fermionic_sign=True)
    return complex(np.trace(f_j_dag @ evolved))


def oracle_fcs_chi(ws, rho0, sites, lam, t):
    """Tr{exp(lam Q_A) exp(L t)[rho0]}."""
    QA = charge_op(ws.c_ops, sites)
    evolved = ws.evolve(rho0, t)
    return complex(np.trace(scipy.linalg.expm(lam * QA) @ evolved))


def oracle_fcs_pn(ws, rho0, sites, t):
    """P_n = Tr{Pi_n exp(L t)[rho0]} from the spectral projectors of Q_A."""
    QA = charge_op(ws.c_ops, sites)
    evolved = ws.evolve(rho0, t)
    nvals = np.rint(np.real(np.diag(QA))).astype(int)
    pn = np.zeros(len(sites) + 1)
    probs = np.real(np.diag(evolved))
    for b, n in enumerate(nvals):
        pn[n] += probs[b]
    return pn


def oracle_loschmidt(ws, rho0, t):
    """L(t) = Tr[rho0 rho(t)]."""
    evolved = ws.evolve(rho0, t)
    return float(np.real(np.trace(rho0 @ evolved)))


def oracle_correlator(model, spec):
    """Dispatch a named oracle computation; ground truth for small N.

    spec is a mapping with a "kind" key selecting one of: typeI, typeII,
    anyon_greater, anyon_greater_negative, anyon_lesser,
    anyon_lesser_negative, fcs_chi, fcs_pn, loschmidt, covariance; the
    remaining keys are that kind's arguments.  States are passed as dense
    density matrices under "rho0", or omitted to use the steady state.
    """
    ws = OracleWorkspace(model)
    kind = spec["kind"]
    rho0 = spec.get("rho0")
    if rho0 is None and kind in ("typeI", "typeII", "fcs_chi", "fcs_pn", "loschmidt", "covariance"):
        rho0 = ws.steady_state()
    if kind == "typeI":
        return oracle_typeI(ws, spec["K1"], spec["K2"], rho0, spec["t"])
    if kind == "typeII":
        return oracle_typeII(ws, spec["K1"], spec["K2"], rho0, spec["t"],
                             order=spec.get("order", "left"))
    if kind == "anyon_greater":
        return oracle_anyon_greater(ws, spec["l"], spec["j"], spec["t"], spec["phi"])
    if kind == "anyon_greater_negative":
        return oracle_anyon_greater_negative(ws, spec["l"], spec["j"], spec["t"], spec["phi"])
    if kind == "anyon_lesser":
        return oracle_anyon_lesser(ws, spec["l"], spec["j"], spec["t"], spec["phi"])
    if kind == "anyon_lesser_negative":
        return oracle_anyon_lesser_negative(ws, spec["l"], spec["j"], spec["t"], spec["phi"])
    if kind == "fcs_chi":
        return oracle_fcs_chi(ws, rho0, spec["sites"], spec["lam"], spec["t"])
    if kind == "fcs_pn":
        return oracle_fcs_pn(ws, rho0, spec["sites"], spec["t"])
    if kind == "loschmidt":
        return oracle_loschmidt(ws, rho0, spec["t"])
    if kind == "covariance":
        return ws.covariance(ws.evolve(rho0, spec["t"]))
    raise ValueError(f"unknown oracle correlator kind {spec['kind']!r}")

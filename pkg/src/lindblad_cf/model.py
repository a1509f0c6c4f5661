"""Quadratic Lindbladian models.

A model is the pair (HH, {L_mu}) written in the fixed block convention:
row vector (c^+, c) = (c_1^+ .. c_N^+, c_1 .. c_N), column vector
(c; c^+) = (c_1 .. c_N, c_1^+ .. c_N^+), so indices 1..N form the
annihilation block and N+1..2N the creation block.  The Hamiltonian is
H = (1/2) (c^+, c) HH (c; c^+) with HH Hermitian and HH + tau_x HH^T tau_x = 0;
each jump operator is L_mu = l_mu^+ (c; c^+) with l_mu a 2N column vector.
The dissipator data enters the dynamics only through

    X_pm = sum_mu [ l_mu l_mu^+ +- tau_x (l_mu l_mu^+)^* tau_x ],

which are cached on the model.
"""

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-9


def tau_x(N):
    """Pauli x in particle-hole space: swaps the two N-blocks."""
    t = np.zeros((2 * N, 2 * N), dtype=complex)
    t[:N, N:] = np.eye(N)
    t[N:, :N] = np.eye(N)
    return t


def tau_y(N):
    t = np.zeros((2 * N, 2 * N), dtype=complex)
    t[:N, N:] = -1j * np.eye(N)
    t[N:, :N] = 1j * np.eye(N)
    return t


def tau_z(N):
    t = np.zeros((2 * N, 2 * N), dtype=complex)
    t[:N, :N] = np.eye(N)
    t[N:, N:] = -np.eye(N)
    return t


def ph_flip(A):
    """tau_x A^T tau_x for a 2N x 2N matrix."""
    n2 = A.shape[0]
    N = n2 // 2
    tx = tau_x(N)
    return tx @ A.T @ tx


@dataclass(frozen=True)
class QuadraticModel:
    """Immutable quadratic Lindbladian: site count, HH, jump vectors, X_pm."""

    N: int
    H: np.ndarray
    dissipators: tuple
    Xplus: np.ndarray
    Xminus: np.ndarray


@dataclass(frozen=True)
class KitaevParams:
    """Open Kitaev chain parameters.

    Hopping J, pairing Delta, chemical potential mu; gain/loss rates
    gamma_plus / gamma_minus act on the two boundary sites 1 and N by
    default.  Per-site rate overrides, when given, are length-N arrays that
    replace the boundary defaults entirely.
    """

    N: int
    J: float = 1.0
    Delta: float = 0.0
    mu: float = 0.0
    gamma_plus: float = 0.0
    gamma_minus: float = 0.0
    gamma_plus_site: tuple = None
    gamma_minus_site: tuple = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("Kitaev chain needs N >= 2 sites")
        for g in self.site_rates_plus() + self.site_rates_minus():
            if g < 0:
                raise ValueError("dissipation rates must be nonnegative")

    def site_rates_plus(self):
        if self.gamma_plus_site is not None:
            rates = list(self.gamma_plus_site)
            if len(rates) != self.N:
                raise ValueError("gamma_plus_site must have length N")
            return rates
        rates = [0.0] * self.N
        rates[0] = rates[-1] = self.gamma_plus
        return rates

    def site_rates_minus(self):
        if self.gamma_minus_site is not None:
            rates = list(self.gamma_minus_site)
            if len(rates) != self.N:
                raise ValueError("gamma_minus_site must have length N")
            return rates
        rates = [0.0] * self.N
        rates[0] = rates[-1] = self.gamma_minus
        return rates


def x_matrices(dissipators, N):
    """X_plus, X_minus from the jump vectors.

    X_pm = sum_mu [ l l^+ +- tau_x (l l^+)^* tau_x ].  X_plus is Hermitian
    positive semidefinite; X_minus changes sign under the particle-hole
    flip.
    """
    Xp = np.zeros((2 * N, 2 * N), dtype=complex)
    Xm = np.zeros((2 * N, 2 * N), dtype=complex)
    tx = tau_x(N)
    for l in dissipators:
        l = np.asarray(l, dtype=complex).reshape(-1)
        if l.shape[0] != 2 * N:
            raise ValueError(
                f"jump vector has length {l.shape[0]}, expected {2 * N}"
            )
        ll = np.outer(l, l.conj())
        flipped = tx @ ll.conj() @ tx
        Xp += ll + flipped
        Xm += ll - flipped
    return Xp, Xm


def validate(model):
    """Check the model invariants; return a list of (name, magnitude).

    Diagnoses rather than raises: Hermiticity of HH, the particle-hole
    symmetry HH + tau_x HH^T tau_x = 0, Hermiticity and positive
    semidefiniteness of X_plus, and the flip (anti)symmetries of X_pm.
    Entries appear only for violations above SYMMETRY_TOL (PSD is checked
    against -SYMMETRY_TOL on the lowest eigenvalue).
    """
    out = []
    H, Xp, Xm = model.H, model.Xplus, model.Xminus

    def check(name, magnitude):
        if magnitude > SYMMETRY_TOL:
            out.append((name, float(magnitude)))

    check("H_hermiticity", np.max(np.abs(H - H.conj().T)))
    check("H_ph_symmetry", np.max(np.abs(H + ph_flip(H))))
    check("Xplus_hermiticity", np.max(np.abs(Xp - Xp.conj().T)))
    check("Xplus_flip_symmetry", np.max(np.abs(ph_flip(Xp) - Xp)))
    check("Xminus_flip_antisymmetry", np.max(np.abs(ph_flip(Xm) + Xm)))
    w = np.linalg.eigvalsh((Xp + Xp.conj().T) / 2.0)
    if w.size and w[0] < -SYMMETRY_TOL:
        out.append(("Xplus_not_psd", float(-w[0])))
    return out


def quadratic_model(H, dissipators, check=True):
    """Build a QuadraticModel from HH and jump vectors, caching X_pm.

    With check=True (default) the type invariants are enforced and a
    ValueError listing the violations is raised if any fail.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % 2 != 0:
        raise ValueError(f"HH must be 2N x 2N, got {H.shape}")
    N = H.shape[0] // 2
    diss = tuple(np.asarray(l, dtype=complex).reshape(-1).copy() for l in dissipators)
    Xp, Xm = x_matrices(diss, N)
    model = QuadraticModel(N=N, H=H.copy(), dissipators=diss, Xplus=Xp, Xminus=Xm)
    if check:
        bad = validate(model)
        if bad:
            msg = ", ".join(f"{name} ({mag:.3e})" for name, mag in bad)
            raise ValueError(f"invalid quadratic model: {msg}")
    return model


def build_kitaev(p):
    """Open Kitaev chain as a QuadraticModel.

    The chain Hamiltonian

        H_K = sum_{l<N} [ (J c_l^+ c_{l+1} + Delta c_l c_{l+1}) + h.c. ]
              - mu sum_l c_l^+ c_l

    is rewritten in the bilinear form with blocks HH = [[T, P], [P^+, -T^T]]:
    T real symmetric tridiagonal with diagonal -mu and off-diagonal J, and
    P antisymmetric with P[l+1, l] = Delta = -P[l, l+1].  The scalar offset
    from reordering c c^+ is dropped; it affects no commutator.  Loss
    sqrt(gamma_minus) c_j puts the rate at position j of the jump vector
    (annihilation block), gain sqrt(gamma_plus) c_j^+ at position N + j
    (creation block).
    """
    N = p.N
    T = np.zeros((N, N), dtype=complex)
    P = np.zeros((N, N), dtype=complex)
    for l in range(N):
        T[l, l] = -p.mu
    for l in range(N - 1):
        T[l, l + 1] = p.J
        T[l + 1, l] = p.J
        P[l + 1, l] = p.Delta
        P[l, l + 1] = -p.Delta
    H = np.zeros((2 * N, 2 * N), dtype=complex)
    H[:N, :N] = T
    H[:N, N:] = P
    H[N:, :N] = P.conj().T
    H[N:, N:] = -T.T

    dissipators = []
    for j, g in enumerate(p.site_rates_minus()):
        if g > 0.0:
            l = np.zeros(2 * N, dtype=complex)
            l[j] = np.sqrt(g)
            dissipators.append(l)
    for j, g in enumerate(p.site_rates_plus()):
        if g > 0.0:
            l = np.zeros(2 * N, dtype=complex)
            l[N + j] = np.sqrt(g)
            dissipators.append(l)
    return quadratic_model(H, dissipators)

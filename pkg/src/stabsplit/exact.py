"""Exact reference results in the fully symmetric collective sector.

The Hamiltonian conserves total spin and spin-flip parity, and its ground
state lives in the maximal J = N/2 multiplet, in the parity sector connected
to M = -N/2 (all spins down, i.e. |1...1>).  States in that sector are held
as real amplitude vectors over the spin-up counts k = 0, 2, 4, ..., giving
O(N) scaling, while a dense 2^N diagonalization stays available as an
independent cross-check for small N.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .lmg import LmgParams, build_lmg
from .pauli import ResourceLimitError, canonical_phase

DENSE_GROUND_LIMIT = 12
STATEVECTOR_LIMIT = 14


@dataclass(frozen=True)
class DickeVector:
    """Real amplitudes over collective |J = n/2, M = k - n/2> states.

    ``ks`` lists the spin-up counts carrying amplitude, ascending.  The
    ground-state parity sector uses even k only; the full multiplet uses all
    k = 0..n.
    """

    n: int
    ks: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=float)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if len(self.ks) != len(amps):
            raise ValueError("ks and amplitudes length mismatch")
        if any(not 0 <= k <= self.n for k in self.ks):
            raise ValueError("spin-up counts outside 0..n")
        if sorted(set(self.ks)) != list(self.ks):
            raise ValueError("ks must be strictly ascending")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def full_amps(self) -> np.ndarray:
        out = np.zeros(self.n + 1)
        out[list(self.ks)] = self.amps
        return out


def sector_ks(n: int) -> tuple[int, ...]:
    """Spin-up counts of the ground-state parity sector (even k)."""
    return tuple(range(0, n + 1, 2))


def _collective_matrix(params: LmgParams, ks) -> np.ndarray:
    """Matrix of H over |J, M = k - J> for the given spin-up counts.

    H = J_z - vbar/(n-1) [ (1+chi)/2 (J^2 - J_z^2)
                           + (1-chi)/4 (J_+^2 + J_-^2) ]
        + vbar n (1+chi) / (4 (n-1)),

    the constant arising from sum_{i<j} X_i X_j = 2 J_x^2 - n/2 (and likewise
    for Y).
    """
    n, vbar, chi = params.n, params.vbar, params.chi
    j = n / 2.0
    ks = list(ks)
    dim = len(ks)
    pos = {k: i for i, k in enumerate(ks)}
    shift = vbar * n * (1 + chi) / (4.0 * (n - 1))
    mat = np.zeros((dim, dim))
    for i, k in enumerate(ks):
        m = k - j
        mat[i, i] = (
            m - (vbar / (n - 1)) * 0.5 * (1 + chi) * (j * (j + 1) - m * m) + shift
        )
        if k + 2 in pos:
            amp = np.sqrt((j - m) * (j + m + 1)) * np.sqrt((j - m - 1) * (j + m + 2))
            val = -(vbar / (n - 1)) * 0.25 * (1 - chi) * amp
            mat[i, pos[k + 2]] = val
            mat[pos[k + 2], i] = val
    return mat


def dicke_hamiltonian(params: LmgParams) -> np.ndarray:
    """H restricted to the ground-state parity sector of the J = n/2 multiplet."""
    return _collective_matrix(params, sector_ks(params.n))


def dicke_hamiltonian_full(params: LmgParams) -> np.ndarray:
    """H over the whole J = n/2 multiplet, both parity sectors, (n+1)^2."""
    return _collective_matrix(params, range(params.n + 1))


def ground_state(params: LmgParams) -> tuple[float, DickeVector]:
    """Sector ground energy and state; the M = -n/2 amplitude is made positive."""
    mat = dicke_hamiltonian(params)
    evals, evecs = np.linalg.eigh(mat)
    vec = evecs[:, 0]
    anchor = vec[0] if abs(vec[0]) > 1e-12 else vec[np.argmax(np.abs(vec))]
    if anchor < 0:
        vec = -vec
    return float(evals[0]), DickeVector(params.n, sector_ks(params.n), vec)


def dense_ground_state(params: LmgParams) -> tuple[float, np.ndarray]:
    """Ground energy and state from the full 2^n matrix (independent route).

    When the lowest two levels are quasi-degenerate the eigenspace is
    resolved by spin-flip parity, keeping the (-1)^n sector representative.
    """
    n = params.n
    if n > DENSE_GROUND_LIMIT:
        raise ResourceLimitError(f"dense diagonalization guarded at n <= {DENSE_GROUND_LIMIT}")
    h = build_lmg(params).dense_real()
    evals, evecs = np.linalg.eigh(h)
    energy = float(evals[0])
    degenerate = np.nonzero(evals - evals[0] < 1e-8)[0]
    if len(degenerate) > 1:
        # Diagonalize parity inside the quasi-degenerate block.
        par = _parity_diagonal(n)
        block = evecs[:, degenerate]
        pmat = block.T @ (par[:, None] * block)
        pvals, pvecs = np.linalg.eigh(pmat)
        want = (-1.0) ** n
        col = int(np.argmin(np.abs(pvals - want)))
        vec = block @ pvecs[:, col]
    else:
        vec = evecs[:, 0]
    return energy, canonical_phase(vec.astype(complex))


def _parity_diagonal(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    bits = np.zeros(1 << n, dtype=np.int64)
    for p in range(n):
        bits ^= (idx >> p) & 1
    return 1.0 - 2.0 * bits


def dicke_to_statevector(state: DickeVector) -> np.ndarray:
    """Expand collective amplitudes over the 2^n computational basis.

    |J, M = k - n/2> is the normalized uniform superposition of the basis
    states with k spin-ups (k zero bits).
    """
    n = state.n
    if n > STATEVECTOR_LIMIT:
        raise ResourceLimitError(f"statevector expansion guarded at n <= {STATEVECTOR_LIMIT}")
    idx = np.arange(1 << n)
    ones = np.zeros(1 << n, dtype=np.int64)
    for p in range(n):
        ones += (idx >> p) & 1
    k_of_b = n - ones
    out = np.zeros(1 << n, dtype=complex)
    for k, amp in zip(state.ks, state.amps):
        mask = k_of_b == k
        out[mask] = amp / np.sqrt(comb(n, k))
    return out


def stab_state_dicke_amplitudes(n: int, family: str) -> DickeVector:
    """Collective amplitudes of the selected stabilizer states.

    The product state is pure k = 0.  The pair state weights each allowed k
    by sqrt(C(n, k) / 2^(n-1)).
    """
    ks = sector_ks(n)
    if family == "s1":
        amps = np.zeros(len(ks))
        amps[0] = 1.0
    elif family == "s2":
        amps = np.array([np.sqrt(comb(n, k) / 2.0 ** (n - 1)) for k in ks])
    else:
        raise ValueError(f"no collective amplitudes for family {family!r}")
    return DickeVector(n, ks, amps)


def fidelity(a, b) -> float:
    """|<a|b>| for two statevectors or two collective vectors.

    Collective vectors are aligned on spin-up counts, so sector and full
    multiplet vectors compare directly.  Mixing representations raises.
    """
    if isinstance(a, DickeVector) and isinstance(b, DickeVector):
        if a.n != b.n:
            raise ValueError("qubit count mismatch")
        return float(abs(np.dot(a.full_amps(), b.full_amps())))
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        if a.shape != b.shape:
            raise ValueError("statevector length mismatch")
        return float(abs(np.vdot(a, b)))
    raise TypeError("fidelity needs two statevectors or two collective vectors")

"""Complexity diagnostics: magic, collective entanglement, and parity.

Magic is measured by the stabilizer Renyi entropy, zero exactly on
stabilizer states.  Entanglement diagnostics target permutation-symmetric
states: the one-spin entropy uses the diagonal reduced density matrix valid
in a definite parity sector, and the n-tangle measures multipartite
spin-flip correlations.  Dicke-basis variants keep both available for large
collective systems where no statevector exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exact import DickeVector
from .pauli import PauliString, ResourceLimitError, num_qubits

SRE_QUBIT_LIMIT = 10
_RANGE_TOL = 1e-9


def _require_normalized(state: np.ndarray):
    if abs(np.linalg.norm(state) - 1.0) > 1e-10:
        raise ValueError("state is not normalized")


def _walsh_last_axis(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    d = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < d:
        a = a.reshape(lead + (d // (2 * h), 2, h))
        top = a[..., 0, :] + a[..., 1, :]
        bot = a[..., 0, :] - a[..., 1, :]
        a = np.stack((top, bot), axis=-2).reshape(lead + (d,))
        h *= 2
    return a


def sre(state: np.ndarray, alpha: float = 2.0) -> float:
    """Stabilizer Renyi entropy of order alpha, in bits.

    M_alpha = -log2(d) + log2(sum_P Xi_P^alpha) / (1 - alpha) with
    Xi_P = <P>^2 / d over all 4^n phase-free Pauli strings.  The sum is
    taken by bit-indexed traversal: for each X-part x the amplitudes
    w_b = conj(psi_{b xor x}) psi_b are Walsh-Hadamard transformed, which
    yields <P(x, z)> for every Z-part z at once.
    """
    n = num_qubits(state)
    if n > SRE_QUBIT_LIMIT:
        raise ResourceLimitError(f"Pauli sum guarded at n <= {SRE_QUBIT_LIMIT}")
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    _require_normalized(state)
    d = 1 << n
    idx = np.arange(d)
    # Row x holds conj(psi[b ^ x]) * psi[b]; the Y phase i^|x&z| drops out
    # because each expectation is real and enters through an even power.
    cross = np.conj(state)[idx[:, None] ^ idx[None, :]] * state[None, :]
    expect_sq = np.abs(_walsh_last_axis(cross)) ** 2
    total = float(np.sum(expect_sq**alpha))
    result = -n + np.log2(total) / (1.0 - alpha) - alpha * n / (1.0 - alpha)
    if -1e-12 < result < 0.0:
        result = 0.0
    return float(result)


def _single_qubit_rdm(state: np.ndarray, n: int, qubit: int) -> np.ndarray:
    block = state.reshape(1 << (qubit - 1), 2, 1 << (n - qubit))
    return np.einsum("abc,adc->bd", block, np.conj(block))


def _binary_entropy(p: float) -> float:
    p = min(max(p, 0.0), 1.0)
    out = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            out -= q * np.log2(q)
    return out


def one_spin_entropy(state: np.ndarray) -> float:
    """Single-spin von Neumann entropy of a permutation-symmetric state.

    Uses the diagonal reduced density matrix diag(1 - p, p) with
    p = <N_up>/N = 1/2 + <J_z>/N, the form valid for symmetric states of
    definite spin-flip parity.  Symmetry is checked by comparing the
    one-qubit reduced density matrices of the first and last spins.
    """
    n = num_qubits(state)
    _require_normalized(state)
    if n > 1:
        gap = np.max(
            np.abs(_single_qubit_rdm(state, n, 1) - _single_qubit_rdm(state, n, n))
        )
        if gap > 1e-8:
            raise ValueError("state is not permutation-symmetric")
    idx = np.arange(1 << n)
    down = np.zeros(1 << n, dtype=np.int64)
    for p in range(n):
        down += (idx >> p) & 1
    jz = float(np.sum(np.abs(state) ** 2 * (n / 2.0 - down)))
    return _binary_entropy(0.5 + jz / n)


def one_spin_entropy_dicke(state: DickeVector) -> float:
    """One-spin entropy from collective amplitudes (symmetric by construction)."""
    weights = np.abs(state.amps) ** 2
    p_up = float(np.dot(weights, np.array(state.ks)) / state.n)
    return _binary_entropy(p_up)


def n_tangle(state: np.ndarray, n: int, qubits: tuple[int, ...] | None = None) -> float:
    """n-tangle tau_n = |<psi| Y^(x n) |psi*>|^2.

    Acts on the first n qubits unless an explicit qubit subset is given;
    conjugation is taken in the computational basis.
    """
    total = num_qubits(state)
    if not 1 <= n <= total:
        raise ValueError(f"tangle order {n} outside 1..{total}")
    if qubits is None:
        qubits = tuple(range(1, n + 1))
    if len(set(qubits)) != n:
        raise ValueError("qubit subset size must match the tangle order")
    flip = PauliString.from_ops(total, {q: "Y" for q in qubits})
    return float(abs(np.vdot(state, flip.apply(np.conj(state)))) ** 2)


def n_tangle_dicke(state: DickeVector) -> float:
    """Full-system tangle tau_N from collective amplitudes.

    For real symmetric states tau_N = |sum_k (-1)^(N-k) a_k a_(N-k)|^2;
    it vanishes identically for odd N.
    """
    full = state.full_amps()
    signs = np.array([(-1.0) ** (state.n - k) for k in range(state.n + 1)])
    return float(np.dot(signs * full, full[::-1]) ** 2)


def parity_expectation(state: np.ndarray) -> float:
    """Expectation of the spin-flip parity operator, the product of all Z."""
    n = num_qubits(state)
    flip = PauliString.from_ops(n, {q: "Z" for q in range(1, n + 1)})
    return float(np.real(np.vdot(state, flip.apply(state))))


@dataclass(frozen=True)
class MetricsReport:
    """Bundle of the diagnostics for one state.

    ``m2`` is the order-2 stabilizer Renyi entropy (None when skipped by the
    resource guard), ``tangles`` maps tangle order to tau_n.
    """

    m2: float | None
    s1: float
    tangles: dict[int, float] = field(default_factory=dict)
    parity: float = 1.0

    def __post_init__(self):
        if self.m2 is not None and self.m2 < -_RANGE_TOL:
            raise ValueError("negative magic")
        if not -_RANGE_TOL <= self.s1 <= 1.0 + _RANGE_TOL:
            raise ValueError("one-spin entropy outside [0, 1]")
        for order, value in self.tangles.items():
            if not -_RANGE_TOL <= value <= 1.0 + _RANGE_TOL:
                raise ValueError(f"tangle tau_{order} outside [0, 1]")
        if not -1.0 - _RANGE_TOL <= self.parity <= 1.0 + _RANGE_TOL:
            raise ValueError("parity outside [-1, 1]")


def metrics_report(
    state: np.ndarray,
    tangle_orders: tuple[int, ...] | None = None,
    include_magic: bool = True,
) -> MetricsReport:
    """All diagnostics for one permutation-symmetric statevector."""
    n = num_qubits(state)
    if tangle_orders is None:
        tangle_orders = tuple(range(1, n + 1))
    return MetricsReport(
        m2=sre(state) if include_magic else None,
        s1=one_spin_entropy(state),
        tangles={order: n_tangle(state, order) for order in tangle_orders},
        parity=parity_expectation(state),
    )

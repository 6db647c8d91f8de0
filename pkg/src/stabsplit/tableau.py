"""Signed stabilizer tableaux: expectations, Clifford conjugation, states.

A stabilizer group on n qubits is held as n signed, pairwise commuting,
independent Hermitian Pauli generators.  Membership queries run over GF(2)
with exact sign tracking, so Pauli expectations in a stabilizer state are
returned exactly as -1, 0, or +1.  Statevector extraction multiplies the
projectors (1 + g)/2 onto a compatible computational basis state, and the
graph-state reduction brings the generator matrix to (identity | adjacency)
form with tracked local Cliffords.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .pauli import (
    PauliString,
    PauliHamiltonian,
    ResourceLimitError,
    canonical_phase,
    _indices,
    _sign_vector,
)

STATEVECTOR_QUBIT_LIMIT = 14

_H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S2 = np.array([[1, 0], [0, 1j]], dtype=complex)
_LOCAL_MATS = {
    "I": np.eye(2, dtype=complex),
    "H": _H2,
    "S": _S2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_SINGLE_QUBIT_GATES = frozenset("HSXYZ")
_TWO_QUBIT_GATES = frozenset({"CX", "CZ"})


@dataclass(frozen=True)
class CliffordGate:
    """A gate from the generating set {H, S, X, Y, Z, CX, CZ}, 1-based qubits."""

    name: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.name in _SINGLE_QUBIT_GATES:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.name} takes one qubit")
        elif self.name in _TWO_QUBIT_GATES:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.name} takes two distinct qubits")
        else:
            raise ValueError(f"unknown gate {self.name!r}")

    def render(self) -> str:
        return " ".join([self.name, *map(str, self.qubits)])


def conjugate_pauli(p: PauliString, gate: CliffordGate) -> PauliString:
    """Return U p U^dag for a generating-set Clifford gate U."""
    n = p.n
    x, z, k = p.x_bits, p.z_bits, p.phase_exp
    if gate.name in _SINGLE_QUBIT_GATES:
        t = 1 << (n - gate.qubits[0])
        xt, zt = bool(x & t), bool(z & t)
        if gate.name == "H":
            k += 2 * (xt and zt)
            if xt != zt:
                x ^= t
                z ^= t
        elif gate.name == "S":
            k += 2 * (xt and zt)
            if xt:
                z ^= t
        elif gate.name == "X":
            k += 2 * zt
        elif gate.name == "Y":
            k += 2 * (xt != zt)
        elif gate.name == "Z":
            k += 2 * xt
    else:
        c = 1 << (n - gate.qubits[0])
        t = 1 << (n - gate.qubits[1])
        xc, zc, xt, zt = bool(x & c), bool(z & c), bool(x & t), bool(z & t)
        if gate.name == "CX":
            k += 2 * (xc and zt and (xt == zc))
            if xc:
                x ^= t
            if zt:
                z ^= c
        else:  # CZ
            k += 2 * (xc and xt and (zc != zt))
            if xc:
                z ^= t
            if xt:
                z ^= c
    return PauliString(n, x, z, k)


def _apply_single_qubit(vec: np.ndarray, n: int, qubit: int, mat: np.ndarray) -> np.ndarray:
    shaped = vec.reshape(1 << (qubit - 1), 2, 1 << (n - qubit))
    return np.einsum("ab,hbl->hal", mat, shaped).reshape(-1)


def apply_gate(vec: np.ndarray, n: int, gate: CliffordGate) -> np.ndarray:
    """Dense statevector action of a generating-set Clifford gate."""
    if gate.name in _SINGLE_QUBIT_GATES:
        return _apply_single_qubit(vec, n, gate.qubits[0], _LOCAL_MATS[gate.name])
    idx = _indices(n)
    cbit = (idx >> (n - gate.qubits[0])) & 1
    tmask = 1 << (n - gate.qubits[1])
    if gate.name == "CX":
        return vec[idx ^ (cbit * tmask)]
    tbit = (idx >> (n - gate.qubits[1])) & 1
    return vec * (1.0 - 2.0 * (cbit & tbit))


def apply_circuit(vec: np.ndarray, n: int, gates) -> np.ndarray:
    for gate in gates:
        vec = apply_gate(vec, n, gate)
    return vec


def apply_local_label(vec: np.ndarray, n: int, qubit: int, label: str) -> np.ndarray:
    """Apply a single-qubit operator written as a letter product, for example
    "HZ" meaning the matrix H @ Z (Z acts first)."""
    mat = np.eye(2, dtype=complex)
    for letter in label:
        mat = mat @ _LOCAL_MATS[letter]
    return _apply_single_qubit(vec, n, qubit, mat)


@dataclass(frozen=True)
class StabilizerGroup:
    """n independent, commuting, Hermitian generators with signs +/-1."""

    n: int
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if len(gens) != self.n:
            raise ValueError(f"need exactly {self.n} generators, got {len(gens)}")
        for g in gens:
            if g.n != self.n:
                raise ValueError("generator qubit count mismatch")
            if g.phase_exp % 2:
                raise ValueError(f"generator {g.render()} is not Hermitian")
            if g.x_bits == 0 and g.z_bits == 0:
                raise ValueError("identity cannot be a generator")
        for i, a in enumerate(gens):
            for b in gens[i + 1 :]:
                if not a.commutes(b):
                    raise ValueError(f"generators {a.render()} and {b.render()} anticommute")
        # Independence: the reduced basis construction fails on dependence.
        self._basis  # noqa: B018

    @classmethod
    def from_labels(cls, labels, n: int) -> "StabilizerGroup":
        return cls(n, tuple(PauliString.parse(s, n) for s in labels))

    def render_lines(self) -> str:
        return "\n".join(g.render() for g in self.generators)

    @classmethod
    def parse_lines(cls, text: str, n: int) -> "StabilizerGroup":
        labels = [line.strip() for line in text.splitlines() if line.strip()]
        return cls.from_labels(labels, n)

    # -- GF(2) machinery -----------------------------------------------------

    @cached_property
    def _basis(self) -> dict[int, tuple[int, PauliString]]:
        """Row-reduced symplectic basis: pivot bit -> (vector, group element).

        Vectors pack (x_bits << n) | z_bits.  Each stored element is the exact
        signed product of original generators whose vectors XOR to ``vector``.
        """
        basis: dict[int, tuple[int, PauliString]] = {}
        for g in self.generators:
            vec, prod = (g.x_bits << self.n) | g.z_bits, g
            while vec:
                pivot = vec.bit_length() - 1
                if pivot not in basis:
                    basis[pivot] = (vec, prod)
                    break
                bvec, bprod = basis[pivot]
                vec ^= bvec
                prod = prod * bprod
            else:
                raise ValueError("generators are not independent")
        return basis

    def expectation(self, p: PauliString) -> int:
        """Exact expectation of a Hermitian Pauli in the stabilized state.

        Returns +1 or -1 when +/-p lies in the group, else 0.
        """
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        if not p.is_hermitian:
            raise ValueError("expectation needs a Hermitian string")
        if p.x_bits == 0 and p.z_bits == 0:
            return 1 if p.phase_exp == 0 else -1
        vec = (p.x_bits << self.n) | p.z_bits
        prod = PauliString.identity(self.n)
        while vec:
            pivot = vec.bit_length() - 1
            if pivot not in self._basis:
                return 0
            bvec, bprod = self._basis[pivot]
            vec ^= bvec
            prod = prod * bprod
        return 1 if prod.phase_exp == p.phase_exp else -1

    def energy(self, h: PauliHamiltonian) -> float:
        """Stabilizer energy: sum of coefficients times exact expectations."""
        if h.n != self.n:
            raise ValueError("qubit count mismatch")
        return float(sum(c * self.expectation(s) for c, s in h.terms))

    # -- Clifford action -----------------------------------------------------

    def conjugate(self, gate: CliffordGate) -> "StabilizerGroup":
        return StabilizerGroup(self.n, tuple(conjugate_pauli(g, gate) for g in self.generators))

    def conjugate_circuit(self, gates) -> "StabilizerGroup":
        group = self
        for gate in gates:
            group = group.conjugate(gate)
        return group

    # -- states ----------------------------------------------------------------

    def to_statevector(self) -> np.ndarray:
        """The unique stabilized state, global phase canonicalized."""
        if self.n > STATEVECTOR_QUBIT_LIMIT:
            raise ResourceLimitError(
                f"statevector extraction guarded at n <= {STATEVECTOR_QUBIT_LIMIT}"
            )
        b = self._compatible_basis_state()
        vec = np.zeros(1 << self.n, dtype=complex)
        vec[b] = 1.0
        for g in self.generators:
            vec = (vec + g.apply(vec)) / 2.0
        norm = np.linalg.norm(vec)
        if norm < 1e-9:
            raise ValueError("projector product annihilated the seed state")
        return canonical_phase(vec / norm)

    def _compatible_basis_state(self) -> int:
        """A basis index with nonzero amplitude, from the Z-only subgroup."""
        rows = list(self.generators)
        r = 0
        for qubit in range(1, self.n + 1):
            mask = 1 << (self.n - qubit)
            hit = next((i for i in range(r, len(rows)) if rows[i].x_bits & mask), None)
            if hit is None:
                continue
            rows[r], rows[hit] = rows[hit], rows[r]
            for i in range(len(rows)):
                if i != r and rows[i].x_bits & mask:
                    rows[i] = rows[i] * rows[r]
            r += 1
        # Rows r.. are Z-only; each demands (-1)^(z.b) equal its sign.
        constraints = [(g.z_bits, g.phase_exp // 2) for g in rows[r:]]
        solved: dict[int, tuple[int, int]] = {}
        for zmask, rhs in constraints:
            for pivot, (pz, prhs) in solved.items():
                if (zmask >> pivot) & 1:
                    zmask ^= pz
                    rhs ^= prhs
            if zmask == 0:
                if rhs:
                    raise ValueError("group contains minus identity")
                continue
            pivot = zmask.bit_length() - 1
            for other_pivot in list(solved):
                oz, orhs = solved[other_pivot]
                if (oz >> pivot) & 1:
                    solved[other_pivot] = (oz ^ zmask, orhs ^ rhs)
            solved[pivot] = (zmask, rhs)
        b = 0
        for pivot, (_, rhs) in solved.items():
            if rhs:
                b |= 1 << pivot
        return b

    def to_graph_state(self) -> "GraphStateForm":
        return _reduce_to_graph(self)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Binary (X | Z) view of a generator list with a sign vector."""

    n: int
    x: np.ndarray
    z: np.ndarray
    signs: np.ndarray

    @classmethod
    def from_generators(cls, gens, n: int) -> "GeneratorMatrix":
        x = np.zeros((len(gens), n), dtype=np.uint8)
        z = np.zeros((len(gens), n), dtype=np.uint8)
        signs = np.ones(len(gens), dtype=np.int8)
        for i, g in enumerate(gens):
            for qubit in range(1, n + 1):
                pos = n - qubit
                x[i, qubit - 1] = (g.x_bits >> pos) & 1
                z[i, qubit - 1] = (g.z_bits >> pos) & 1
            signs[i] = 1 if g.phase_exp == 0 else -1
        return cls(n, x, z, signs)


@dataclass
class GraphStateForm:
    """A graph-state presentation of a stabilizer state.

    ``adjacency`` is the symmetric zero-diagonal edge matrix of the graph,
    and ``local_cliffords[q]`` is a single-qubit operator written as a letter
    product (leftmost letter outermost) such that applying them to the graph
    state recovers the original stabilizer state.
    """

    n: int
    adjacency: np.ndarray
    local_cliffords: tuple[str, ...]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [
            (i + 1, j + 1)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.adjacency[i, j]
        ]

    def to_statevector(self) -> np.ndarray:
        vec = prepare_graph_state(self.adjacency)
        for qubit, label in enumerate(self.local_cliffords, start=1):
            if label != "I":
                vec = apply_local_label(vec, self.n, qubit, label)
        return canonical_phase(vec)


_INVERSE_LETTERS = {"H": "H", "Z": "Z", "X": "X", "Y": "Y", "S": "SZ"}


def _rref_x(rows: list[PauliString], n: int) -> tuple[list[PauliString], list[int]]:
    """Gauss-Jordan over the X block; row operations are group products."""
    rows = list(rows)
    pivots = []
    r = 0
    for qubit in range(1, n + 1):
        mask = 1 << (n - qubit)
        hit = next((i for i in range(r, len(rows)) if rows[i].x_bits & mask), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i].x_bits & mask:
                rows[i] = rows[i] * rows[r]
        pivots.append(qubit)
        r += 1
    return rows, pivots

def _reduce_to_graph(group: StabilizerGroup) -> GraphStateForm:
    n = group.n
    rows = list(group.generators)
    applied: list[tuple[str, int]] = []

    for _ in range(n + 1):
        rows, pivots = _rref_x(rows, n)
        if len(pivots) == n:
            break
        deficient = rows[len(pivots)]
        free = [q for q in range(1, n + 1) if q not in pivots]
        target = next(
            (q for q in free if deficient.z_bits & (1 << (n - q))), None
        )
        if target is None:
            raise ValueError("generator matrix cannot be completed to a graph form")
        gate = CliffordGate("H", (target,))
        rows = [conjugate_pauli(g, gate) for g in rows]
        applied.append(("H", target))
    else:
        raise ValueError("graph reduction failed to reach full X rank")

    # Clear the Z diagonal with S; with X = identity, S on qubit q only
    # touches row q.
    for qubit in range(1, n + 1):
        if rows[qubit - 1].z_bits & (1 << (n - qubit)):
            gate = CliffordGate("S", (qubit,))
            rows = [conjugate_pauli(g, gate) for g in rows]
            applied.append(("S", qubit))

    # Fix signs with Z; Z on qubit q flips exactly row q.
    for qubit in range(1, n + 1):
        if rows[qubit - 1].phase_exp == 2:
            gate = CliffordGate("Z", (qubit,))
            rows = [conjugate_pauli(g, gate) for g in rows]
            applied.append(("Z", qubit))

    gm = GeneratorMatrix.from_generators(rows, n)
    if not np.array_equal(gm.x, np.eye(n, dtype=np.uint8)):
        raise AssertionError("graph reduction left a non-identity X block")
    if not np.array_equal(gm.z, gm.z.T) or gm.z.diagonal().any():
        raise AssertionError("graph reduction left an invalid adjacency block")
    if not (gm.signs == 1).all():
        raise AssertionError("graph reduction left unresolved signs")

    # The applied gates U map the input group onto the graph group, so the
    # original state is U^dag applied to the graph state.
    inverses: list[str] = ["" for _ in range(n)]
    for name, qubit in applied:
        inverses[qubit - 1] = inverses[qubit - 1] + _INVERSE_LETTERS[name]
    labels = tuple(lbl.replace("SS", "Z") if lbl else "I" for lbl in inverses)
    return GraphStateForm(n, gm.z.astype(np.int8), labels)


def prepare_graph_state(adjacency: np.ndarray) -> np.ndarray:
    """|G> = prod_edges CZ applied to the uniform |+...+> state."""
    adjacency = np.asarray(adjacency)
    n = adjacency.shape[0]
    if adjacency.shape != (n, n):
        raise ValueError("adjacency must be square")
    if not np.array_equal(adjacency, adjacency.T) or adjacency.diagonal().any():
        raise ValueError("adjacency must be symmetric with zero diagonal")
    if n > STATEVECTOR_QUBIT_LIMIT:
        raise ResourceLimitError(f"graph state guarded at n <= {STATEVECTOR_QUBIT_LIMIT}")
    vec = np.full(1 << n, 1.0 / np.sqrt(1 << n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            if adjacency[i, j]:
                vec = apply_gate(vec, n, CliffordGate("CZ", (i + 1, j + 1)))
    return vec


def graph_state_group(adjacency: np.ndarray) -> StabilizerGroup:
    """The stabilizer group X_i prod_{j in neighborhood(i)} Z_j of a graph."""
    adjacency = np.asarray(adjacency)
    n = adjacency.shape[0]
    gens = []
    for i in range(n):
        ops = {i + 1: "X"}
        for j in range(n):
            if adjacency[i, j]:
                ops[j + 1] = "Z"
        gens.append(PauliString.from_ops(n, ops))
    return StabilizerGroup(n, tuple(gens))

"""Symplectic Pauli strings and real Pauli-sum Hamiltonians.

Conventions used throughout the package:

* Qubits are numbered 1..n.  Qubit j maps to bit position (n - j) of the
  ``x_bits`` / ``z_bits`` integers, so qubit 1 is the most significant bit.
* A computational basis label ``b1 b2 ... bn`` (qubit 1 leftmost) therefore
  corresponds to statevector index ``int(label, 2)``, and dense matrices are
  Kronecker products taken in qubit order, ``kron(op_1, kron(op_2, ...))``.
* A string is the operator ``i**phase_exp * prod_j sigma(x_j, z_j)`` where
  ``sigma(1,0) = X``, ``sigma(0,1) = Z`` and ``sigma(1,1) = Y``.  The factor
  ``Y = i X Z`` is absorbed into the phase bookkeeping, which stays in pure
  integer arithmetic: the phase is always exactly one of {1, i, -1, -i}.
* Bit rows are Python ints, so there is no fixed word-size qubit limit; the
  practical caps live on dense-vector operations (``dense`` guards n <= 14).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
}

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}
_SIGN_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}

DENSE_QUBIT_LIMIT = 14

_TOKEN_RE = re.compile(r"([IXYZ])(\d+)")
_LABEL_RE = re.compile(r"^([+-])(i)?((?:[IXYZ]\d+)+|I)$")


class ResourceLimitError(ValueError):
    """Raised when an operation would exceed its dense-resource guard."""


def _popcount(value: int) -> int:
    return bin(value).count("1")


@lru_cache(maxsize=32)
def _indices(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _sign_vector(mask: int, n: int) -> np.ndarray:
    """(-1)**popcount(b & mask) for every basis index b, as a float array."""
    par = np.zeros(1 << n, dtype=np.int64)
    idx = _indices(n)
    for p in range(n):
        if (mask >> p) & 1:
            par ^= (idx >> p) & 1
    return 1.0 - 2.0 * par


def canonical_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rescale a state so its first nonzero amplitude is real and positive."""
    for a in vec:
        if abs(a) > tol:
            return vec * (abs(a) / a)
    return vec


def num_qubits(vec: np.ndarray) -> int:
    n = int(round(np.log2(len(vec))))
    if 1 << n != len(vec):
        raise ValueError("statevector length is not a power of two")
    return n


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator in symplectic (x|z) form with an i**k phase.

    Immutable.  ``phase_exp`` is the exponent k in i**k, always reduced
    mod 4.  Hermitian strings have even ``phase_exp``.
    """

    n: int
    x_bits: int
    z_bits: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        limit = 1 << self.n
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise ValueError("bit rows out of range for qubit count")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str], phase_exp: int = 0) -> "PauliString":
        """Build from a {qubit: letter} map, qubits 1-based.

        Example: from_ops(3, {1: "X", 3: "Y"}) is X1 Y3 on three qubits.
        """
        x = z = 0
        for qubit, letter in ops.items():
            if not 1 <= qubit <= n:
                raise ValueError(f"qubit {qubit} outside 1..{n}")
            xb, zb = _LETTER_TO_BITS[letter]
            pos = n - qubit
            if (x >> pos) & 1 or (z >> pos) & 1:
                raise ValueError(f"qubit {qubit} assigned twice")
            x |= xb << pos
            z |= zb << pos
        return cls(n, x, z, phase_exp)

    @classmethod
    def parse(cls, text: str, n: int) -> "PauliString":
        """Parse labels like '+X1X2', '-Z1Z2Z3', '+iY2', '-I'."""
        m = _LABEL_RE.match(text.strip())
        if not m:
            raise ValueError(f"unparseable Pauli label: {text!r}")
        sign, imag, body = m.groups()
        k = (2 if sign == "-" else 0) + (1 if imag else 0)
        ops: dict[int, str] = {}
        if body != "I":
            for letter, idx in _TOKEN_RE.findall(body):
                qubit = int(idx)
                if letter == "I":
                    if not 1 <= qubit <= n:
                        raise ValueError(f"qubit {qubit} outside 1..{n}")
                    continue
                ops[qubit] = letter
        return cls.from_ops(n, ops, k)

    # -- presentation ------------------------------------------------------

    def letter(self, qubit: int) -> str:
        pos = self.n - qubit
        return _BITS_TO_LETTER[((self.x_bits >> pos) & 1, (self.z_bits >> pos) & 1)]

    def render(self) -> str:
        body = "".join(
            f"{self.letter(q)}{q}" for q in range(1, self.n + 1) if self.letter(q) != "I"
        )
        return _SIGN_TEXT[self.phase_exp] + (body or "I")

    def __str__(self) -> str:
        return self.render()

    # -- algebra -----------------------------------------------------------

    @property
    def phase(self) -> complex:
        return 1j ** self.phase_exp

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def weight(self) -> int:
        return _popcount(self.x_bits | self.z_bits)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        x3 = self.x_bits ^ other.x_bits
        z3 = self.z_bits ^ other.z_bits
        # Per qubit: sigma(x1,z1) sigma(x2,z2) = i**d sigma(x1^x2, z1^z2) with
        # d = x1 z1 + x2 z2 + 2 z1 x2 - x3 z3, summed here via popcounts.
        d = (
            _popcount(self.x_bits & self.z_bits)
            + _popcount(other.x_bits & other.z_bits)
            + 2 * _popcount(self.z_bits & other.x_bits)
            - _popcount(x3 & z3)
        )
        return PauliString(self.n, x3, z3, self.phase_exp + other.phase_exp + d)

    def commutes(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        overlap = _popcount(self.x_bits & other.z_bits) + _popcount(self.z_bits & other.x_bits)
        return overlap % 2 == 0

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.x_bits, self.z_bits, self.phase_exp + 2)

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x_bits, self.z_bits, 0)

    # -- dense realizations --------------------------------------------------

    def dense(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; equals phase times the Kronecker product of
        single-qubit Pauli matrices in qubit order."""
        if self.n > DENSE_QUBIT_LIMIT:
            raise ResourceLimitError(f"dense matrix guarded at n <= {DENSE_QUBIT_LIMIT}")
        out = np.array([[self.phase]], dtype=complex)
        for q in range(1, self.n + 1):
            pos = self.n - q
            out = np.kron(out, _SINGLE[((self.x_bits >> pos) & 1, (self.z_bits >> pos) & 1)])
        return out

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to a statevector of length 2^n without forming the matrix."""
        if len(vec) != 1 << self.n:
            raise ValueError("statevector length mismatch")
        factor = 1j ** ((self.phase_exp + _popcount(self.x_bits & self.z_bits)) % 4)
        signed = vec * _sign_vector(self.z_bits, self.n)
        if self.x_bits:
            signed = signed[_indices(self.n) ^ self.x_bits]
        return factor * signed


@dataclass(frozen=True)
class PauliHamiltonian:
    """A real linear combination of Hermitian, phase +1 Pauli strings.

    ``terms`` holds (coefficient, string) pairs with unique unsigned strings;
    signs are folded into the coefficients at construction.
    """

    n: int
    terms: tuple[tuple[float, PauliString], ...]

    @classmethod
    def from_terms(cls, n: int, terms) -> "PauliHamiltonian":
        merged: dict[tuple[int, int], float] = {}
        for coeff, string in terms:
            if string.n != n:
                raise ValueError("string qubit count differs from Hamiltonian")
            if not string.is_hermitian:
                raise ValueError(f"non-Hermitian term {string.render()} in Hamiltonian")
            if abs(complex(coeff).imag) > 0:
                raise ValueError("Hamiltonian coefficients must be real")
            c = float(np.real(coeff)) * (1.0 if string.phase_exp == 0 else -1.0)
            key = (string.x_bits, string.z_bits)
            merged[key] = merged.get(key, 0.0) + c
        kept = tuple(
            (c, PauliString(n, x, z, 0)) for (x, z), c in merged.items() if c != 0.0
        )
        return cls(n, kept)

    def __len__(self) -> int:
        return len(self.terms)

    def dense(self) -> np.ndarray:
        if self.n > DENSE_QUBIT_LIMIT:
            raise ResourceLimitError(f"dense matrix guarded at n <= {DENSE_QUBIT_LIMIT}")
        dim = 1 << self.n
        idx = _indices(self.n)
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, s in self.terms:
            w = _popcount(s.x_bits & s.z_bits)
            vals = (coeff * 1j**w) * _sign_vector(s.z_bits, self.n)
            out[idx ^ s.x_bits, idx] += vals
        return out

    def dense_real(self) -> np.ndarray:
        """Real float64 dense matrix; valid because every Hermitian phase +1
        string with an even number of Y sites is a real matrix and real
        coefficients keep the sum real.  Raises if any term is odd in Y."""
        if self.n > DENSE_QUBIT_LIMIT:
            raise ResourceLimitError(f"dense matrix guarded at n <= {DENSE_QUBIT_LIMIT}")
        dim = 1 << self.n
        idx = _indices(self.n)
        out = np.zeros((dim, dim), dtype=float)
        for coeff, s in self.terms:
            w = _popcount(s.x_bits & s.z_bits)
            if w % 2:
                raise ValueError("term with odd Y count has an imaginary matrix")
            vals = (coeff * (-1.0) ** (w // 2)) * _sign_vector(s.z_bits, self.n)
            out[idx ^ s.x_bits, idx] += vals
        return out

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros(len(vec), dtype=complex)
        for coeff, s in self.terms:
            out += coeff * s.apply(vec)
        return out

    def expectation(self, vec: np.ndarray) -> float:
        val = np.vdot(vec, self.apply(vec))
        return float(val.real)

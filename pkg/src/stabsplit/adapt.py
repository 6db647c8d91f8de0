"""Adaptive variational ansatz growth over a symmetry-preserving pool.

The pool holds the two-spin generators T = X_i Y_j + sign Y_i X_j (both
signs, all i < j). Each commutes with the global parity product Z_1..Z_n,
and exp(i theta T) is real orthogonal in the computational basis, so an
ansatz grown from a real reference stays real and never leaves the
reference parity sector. Layers are selected by largest energy gradient
and all angles are re-optimized after every addition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .evolve import _golden_section
from .pauli import PauliHamiltonian, PauliString, ResourceLimitError

ADAPT_QUBIT_LIMIT = 10

# phi = 2 theta grid for the per-layer trig objective; values at phi = 0
# come first so flat directions resolve to angle zero.
_PHI_GRID = np.linspace(0.0, 2.0 * math.pi, 96, endpoint=False)
_COS1 = np.cos(_PHI_GRID)
_SIN1 = np.sin(_PHI_GRID)
_COS2 = np.cos(2.0 * _PHI_GRID)
_SIN2 = np.sin(2.0 * _PHI_GRID)


class AdaptError(RuntimeError):
    """Optimizer failure during ansatz growth; carries the partial trace."""

    def __init__(self, message: str, trace: "AdaptTrace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class PoolOperator:
    """Generator T = X_i Y_j + sign * Y_i X_j on qubits i < j.

    T is nonzero only between |00> and |11> of the pair (sign +1) or
    between |01> and |10> (sign -1), so exp(i theta T) is an exact
    two-qubit kernel: a plane rotation by 2 theta in that pair of
    amplitudes, identity elsewhere.
    """

    n: int
    i: int
    j: int
    sign: int

    def __post_init__(self):
        if not 1 <= self.i < self.j <= self.n:
            raise ValueError("need 1 <= i < j <= n")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def label(self) -> str:
        middle = "+" if self.sign > 0 else "-"
        return f"X{self.i}Y{self.j}{middle}Y{self.i}X{self.j}"

    @cached_property
    def strings(self) -> tuple[PauliString, PauliString]:
        first = PauliString.from_ops(self.n, {self.i: "X", self.j: "Y"})
        second = PauliString.from_ops(self.n, {self.i: "Y", self.j: "X"})
        return first, second

    def as_hamiltonian(self) -> PauliHamiltonian:
        first, second = self.strings
        return PauliHamiltonian.from_terms(self.n, [(1.0, first), (float(self.sign), second)])

    def apply(self, state: np.ndarray) -> np.ndarray:
        """T|psi> via the two Pauli strings."""
        first, second = self.strings
        return first.apply(state) + self.sign * second.apply(state)

    @cached_property
    def _indices(self) -> tuple[np.ndarray, np.ndarray]:
        # sel holds the pair states (00 for sign +, 01 for sign -) and par
        # their bit-flipped partners (11 and 10).
        bit_i = self.n - self.i
        bit_j = self.n - self.j
        idx = np.arange(1 << self.n)
        want_j = 0 if self.sign > 0 else 1
        mask = (((idx >> bit_i) & 1) == 0) & (((idx >> bit_j) & 1) == want_j)
        sel = idx[mask]
        par = sel ^ ((1 << bit_i) | (1 << bit_j))
        return sel, par

    def generator_action(self, state: np.ndarray) -> np.ndarray:
        """R|psi> with R = -iT, a real antisymmetric matrix."""
        sel, par = self._indices
        out = np.zeros_like(state)
        if self.sign > 0:
            out[sel] = -2.0 * state[par]
            out[par] = 2.0 * state[sel]
        else:
            out[sel] = 2.0 * state[par]
            out[par] = -2.0 * state[sel]
        return out

    def rotated(self, state: np.ndarray, theta: float) -> np.ndarray:
        """exp(i theta T) applied along the first axis of state.

        Works on vectors and on matrices (each column rotates), which is
        what the re-optimization sweep uses to conjugate the Hamiltonian.
        """
        sel, par = self._indices
        c = math.cos(2.0 * theta)
        s = math.sin(2.0 * theta)
        out = np.array(state, copy=True)
        a = state[sel]
        b = state[par]
        if self.sign > 0:
            out[sel] = c * a + s * b
            out[par] = c * b - s * a
        else:
            out[sel] = c * a - s * b
            out[par] = c * b + s * a
        return out

    def conjugated(self, mat: np.ndarray, theta: float) -> np.ndarray:
        """K(theta)^T mat K(theta) for symmetric mat, K = exp(i theta T)."""
        half = self.rotated(mat, -theta)
        return self.rotated(half.T, -theta)

    def conjugate_inplace(self, mat: np.ndarray, theta: float) -> None:
        """K(theta)^T mat K(theta), overwriting mat (must be symmetric).

        Congruence mixes rows and columns with the same coefficient
        pattern, so only the four affected blocks are touched.
        """
        sel, par = self._indices
        c = math.cos(2.0 * theta)
        s = math.sin(2.0 * theta) * (1.0 if self.sign > 0 else -1.0)
        rows_a = mat[sel].copy()
        rows_b = mat[par].copy()
        mat[sel] = c * rows_a - s * rows_b
        mat[par] = s * rows_a + c * rows_b
        cols_a = mat[:, sel].copy()
        cols_b = mat[:, par].copy()
        mat[:, sel] = c * cols_a - s * cols_b
        mat[:, par] = s * cols_a + c * cols_b


def pool(n: int) -> list[PoolOperator]:
    """All n(n-1) two-spin generators, (i, j, sign) ascending, + before -."""
    if n < 2:
        raise ValueError("pool needs at least two qubits")
    ops = []
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            ops.append(PoolOperator(n, i, j, 1))
            ops.append(PoolOperator(n, i, j, -1))
    return ops


def gradient(state: np.ndarray, t, h: PauliHamiltonian) -> float:
    """dE/dtheta at theta = 0 for the layer exp(i theta T) appended to state.

    Equals -i <[T, H]> = -2 Im <H psi | T psi>; analytic, no finite
    differences. t may be a PoolOperator, PauliString, or PauliHamiltonian
    (anything exposing apply).
    """
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    h_psi = h.apply(np.asarray(state, dtype=complex))
    t_psi = t.apply(np.asarray(state, dtype=complex))
    return float(-2.0 * np.imag(np.vdot(h_psi, t_psi)))


@dataclass(frozen=True)
class AdaptConfig:
    """Growth and convergence knobs.

    reference names the stabilizer starting state for driver code: "s2"
    is the X-pair state, "s1" the all-down product state. run_adapt takes
    the reference vector explicitly, so the label is only consumed by
    callers that build the state themselves.
    """

    max_layers: int = 120
    grad_threshold: float = 1e-6
    vqe_tol: float = 1e-8
    reference: str = "s2"

    def __post_init__(self):
        if self.max_layers < 1:
            raise ValueError("max_layers must be positive")
        if self.grad_threshold <= 0 or self.vqe_tol <= 0:
            raise ValueError("thresholds must be positive")
        if self.reference not in ("s1", "s2"):
            raise ValueError("reference must be 's1' or 's2'")


@dataclass(frozen=True)
class AdaptLayer:
    """One trace row; layer 0 is the bare reference (empty label)."""

    layer: int
    label: str
    gradient: float
    energy: float
    fidelity: float
    angles: tuple[float, ...]


@dataclass
class AdaptTrace:
    exact_energy: float
    layers: list[AdaptLayer] = field(default_factory=list)
    converged: bool = False
    state: np.ndarray | None = None

    @property
    def energies(self) -> list[float]:
        return [record.energy for record in self.layers]

    def rel_energy_errors(self) -> list[float]:
        scale = abs(self.exact_energy)
        return [abs(record.energy - self.exact_energy) / scale for record in self.layers]


def apply_ansatz(reference: np.ndarray, operators, angles) -> np.ndarray:
    """Layered state K_L(theta_L) ... K_1(theta_1)|reference>."""
    state = np.array(reference, copy=True)
    for op, theta in zip(operators, angles):
        state = op.rotated(state, theta)
    return state


def _as_real_state(state: np.ndarray) -> np.ndarray:
    vec = np.asarray(state)
    if np.iscomplexobj(vec):
        if np.max(np.abs(vec.imag)) > 1e-10:
            raise ValueError("reference must be a real vector for this ansatz")
        vec = vec.real
    vec = vec.astype(float)
    if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
        raise ValueError("reference must be normalized")
    return vec


def _parity_signs(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    counts = np.array([bin(v).count("1") for v in idx])
    return np.where(counts % 2 == 0, 1.0, -1.0)


def _exact_target(dense: np.ndarray, n: int, reference: np.ndarray):
    """Ground energy plus the comparison eigenvector for fidelity rows.

    When the Hamiltonian conserves parity and the reference has definite
    parity, the comparison state is the lowest eigenvector in that parity
    sector; the pool cannot leave it, and near-degenerate opposite-parity
    doublets would otherwise make the fidelity column meaningless.
    """
    evals, evecs = np.linalg.eigh(dense)
    ground_energy = float(evals[0])
    signs = _parity_signs(n)
    plus = signs > 0
    minus = ~plus
    conserves = np.max(np.abs(dense[np.ix_(plus, minus)])) < 1e-12
    ref_parity = float(np.dot(reference, signs * reference))
    if conserves and abs(abs(ref_parity) - 1.0) < 1e-8:
        mask = plus if ref_parity > 0 else minus
        sub_vals, sub_vecs = np.linalg.eigh(dense[np.ix_(mask, mask)])
        target = np.zeros(len(signs))
        target[mask] = sub_vecs[:, 0]
        return ground_energy, target
    return ground_energy, evecs[:, 0].astype(float)


def _select(dense: np.ndarray, state: np.ndarray, ops) -> tuple[int, float]:
    """Index and signed gradient of the max-|gradient| pool element.

    Ties resolve to the earliest pool position, i.e. lowest (i, j, sign).
    """
    h_psi = dense @ state
    best_idx, best_val = 0, 0.0
    for pos, op in enumerate(ops):
        value = -2.0 * float(np.dot(op.generator_action(state), h_psi))
        if abs(value) > abs(best_val) + 1e-15:
            best_idx, best_val = pos, value
    return best_idx, best_val


def _optimize_layer(heff: np.ndarray, chi: np.ndarray, op: PoolOperator):
    """Exact single-angle minimum for one layer against heff.

    K chi = x0 + cos(2t) P + sin(2t) Q with x0 the untouched amplitudes, so
    three matvecs reduce E(theta) to a two-harmonic trig form in phi = 2t:
    E = const + 2 e0p cos phi + 2 e0q sin phi + d cos 2phi + f sin 2phi.
    A vectorized grid scan localizes the minimum and Newton polishes it.
    Returns (theta, energy).
    """
    sel, par = op._indices
    a = chi[sel]
    b = chi[par]
    x0 = np.array(chi, copy=True)
    x0[sel] = 0.0
    x0[par] = 0.0
    p_vec = np.zeros_like(chi)
    p_vec[sel] = a
    p_vec[par] = b
    q_vec = np.zeros_like(chi)
    if op.sign > 0:
        q_vec[sel] = b
        q_vec[par] = -a
    else:
        q_vec[sel] = -b
        q_vec[par] = a
    h_x0 = heff @ x0
    h_p = heff @ p_vec
    h_q = heff @ q_vec
    e00 = float(x0 @ h_x0)
    e0p = float(x0 @ h_p)
    e0q = float(x0 @ h_q)
    epp = float(p_vec @ h_p)
    eqq = float(q_vec @ h_q)
    epq = float(p_vec @ h_q)
    base = e00 + 0.5 * (epp + eqq)
    d_coef = 0.5 * (epp - eqq)

    def value(phi: float) -> float:
        return (
            base
            + 2.0 * e0p * math.cos(phi)
            + 2.0 * e0q * math.sin(phi)
            + d_coef * math.cos(2.0 * phi)
            + epq * math.sin(2.0 * phi)
        )

    grid_vals = base + 2.0 * e0p * _COS1 + 2.0 * e0q * _SIN1 + d_coef * _COS2 + epq * _SIN2
    best = int(np.argmin(grid_vals))
    phi = float(_PHI_GRID[best])
    best_val = float(grid_vals[best])
    for _ in range(8):
        grad = (
            -2.0 * e0p * math.sin(phi)
            + 2.0 * e0q * math.cos(phi)
            - 2.0 * d_coef * math.sin(2.0 * phi)
            + 2.0 * epq * math.cos(2.0 * phi)
        )
        curv = (
            -2.0 * e0p * math.cos(phi)
            - 2.0 * e0q * math.sin(phi)
            - 4.0 * d_coef * math.cos(2.0 * phi)
            - 4.0 * epq * math.sin(2.0 * phi)
        )
        if curv <= 1e-14 or abs(grad) < 1e-14:
            break
        step = grad / curv
        if abs(step) > 0.2:
            break
        phi -= step
    candidate = value(phi)
    if candidate < best_val:
        best_val = candidate
    else:
        phi = float(_PHI_GRID[best])
    return 0.5 * phi, best_val


_MAX_SWEEPS = 40


def _reoptimize(dense, reference, chosen, angles, vqe_tol: float) -> float:
    """Coordinate sweeps over all angles until the energy stalls.

    Each backward sweep keeps prefix states for layers below the active one
    and conjugates the Hamiltonian through the layers above it, so every
    single-angle problem is an exact closed form. After each sweep the
    energy is also probed along the aggregate angle displacement; repeated
    operators carve curved degenerate valleys where plain coordinate
    descent slows to a crawl, and the extrapolation rides them out.
    Descent is monotone, so hitting the sweep cap returns the partial
    optimum (later growth steps resume it) rather than failing.
    """
    state = apply_ansatz(reference, chosen, angles)
    previous = float(state @ dense @ state)
    for _ in range(_MAX_SWEEPS):
        before = np.array(angles)
        prefixes = [reference]
        for op, theta in zip(chosen[:-1], angles[:-1]):
            prefixes.append(op.rotated(prefixes[-1], theta))
        heff = dense.copy()
        current = previous
        for level in reversed(range(len(chosen))):
            op = chosen[level]
            theta, current = _optimize_layer(heff, prefixes[level], op)
            angles[level] = theta
            if level > 0:
                op.conjugate_inplace(heff, theta)
        delta = np.array(angles) - before
        if np.linalg.norm(delta) > 1e-14:

            def along(scale: float) -> float:
                trial = apply_ansatz(reference, chosen, before + scale * delta)
                return float(trial @ dense @ trial)

            best_scale, best_val = 1.0, current
            for scale in (2.0, 4.0, 8.0, 16.0, 32.0):
                trial_val = along(scale)
                if trial_val < best_val:
                    best_scale, best_val = scale, trial_val
            if best_scale > 1.0:
                refined, refined_val = _golden_section(
                    along, best_scale / 2.0, min(2.0 * best_scale, 48.0), tol=0.05
                )
                if refined_val < best_val:
                    best_scale, best_val = refined, refined_val
                moved = before + best_scale * delta
                angles[:] = [float(v) for v in moved]
                current = best_val
        if not math.isfinite(current):
            raise AdaptError("angle re-optimization produced a non-finite energy")
        if previous - current < vqe_tol:
            return current
        previous = current
    return previous


def run_adapt(
    h: PauliHamiltonian, reference: np.ndarray, config: AdaptConfig | None = None
) -> AdaptTrace:
    """Grow the ansatz until gradients vanish or the layer budget runs out.

    Loop: score every pool element by its gradient, add the largest in
    magnitude as a new layer at angle zero, re-optimize all angles, record
    energy and fidelity against the exact (parity-matched) ground state.
    """
    if config is None:
        config = AdaptConfig()
    n = h.n
    if n > ADAPT_QUBIT_LIMIT:
        raise ResourceLimitError(f"adaptive ansatz capped at {ADAPT_QUBIT_LIMIT} qubits")
    ref = _as_real_state(reference)
    dense = h.dense_real()
    exact_energy, target = _exact_target(dense, n, ref)
    ops = pool(n)
    trace = AdaptTrace(exact_energy=exact_energy)
    chosen: list[PoolOperator] = []
    angles: list[float] = []
    state = ref

    def record(label: str, grad: float, energy: float):
        trace.layers.append(
            AdaptLayer(
                layer=len(chosen),
                label=label,
                gradient=grad,
                energy=energy,
                fidelity=float(abs(np.dot(target, state))),
                angles=tuple(angles),
            )
        )

    sel_idx, sel_grad = _select(dense, state, ops)
    record("", sel_grad, float(state @ dense @ state))
    trace.converged = abs(sel_grad) < config.grad_threshold
    while not trace.converged and len(chosen) < config.max_layers:
        op = ops[sel_idx]
        chosen.append(op)
        angles.append(0.0)
        try:
            energy = _reoptimize(dense, ref, chosen, angles, config.vqe_tol)
        except AdaptError as err:
            trace.state = apply_ansatz(ref, chosen, angles)
            err.trace = trace
            raise
        state = apply_ansatz(ref, chosen, angles)
        record(op.label, sel_grad, energy)
        sel_idx, sel_grad = _select(dense, state, ops)
        trace.converged = abs(sel_grad) < config.grad_threshold
    trace.state = state
    return trace

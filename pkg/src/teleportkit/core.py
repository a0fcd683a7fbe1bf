"""Dense state-vector and density-matrix algebra for a handful of labelled qubits.

Basis ordering: the register is an ordered tuple of labels and the first label
is the most significant bit of the basis index. ``|0>_a (x) |1>_B`` on register
``("a", "B")`` is therefore index ``0b01``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from teleportkit import kernels

TOL = 1e-12
MAX_QUBITS = 4
# Branches below this Born weight are dropped instead of renormalised.
ZERO_PROB = 1e-14

_SQRT1_2 = 1 / math.sqrt(2)


class DomainError(ValueError):
    """Input outside the domain an operation is defined on."""


def _check_register(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise DomainError(f"duplicate labels in register {labels}")
    if not 1 <= len(labels) <= MAX_QUBITS:
        raise DomainError(f"register size must be 1..{MAX_QUBITS}, got {len(labels)}")
    return labels


def _positions(register: tuple[str, ...], targets: Sequence[str]) -> list[int]:
    try:
        pos = [register.index(t) for t in targets]
    except ValueError:
        missing = [t for t in targets if t not in register]
        raise DomainError(f"labels {missing} not in register {register}") from None
    if len(set(pos)) != len(pos):
        raise DomainError(f"duplicate target labels {tuple(targets)}")
    return pos


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BlochParams:
    """Polar angle ``theta`` in [0, pi/2] and relative phase ``phi`` in [0, 2pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2):
            raise DomainError(f"theta={self.theta} outside [0, pi/2]")
        if not (0.0 <= self.phi < 2 * math.pi):
            raise DomainError(f"phi={self.phi} outside [0, 2pi)")


@dataclass(frozen=True, eq=False)
class StateVector:
    labels: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        labels = _check_register(self.labels)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (1 << len(labels),):
            raise DomainError(f"{amps.shape[0]} amplitudes for {len(labels)} qubits")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL:
            raise DomainError(f"state norm^2 {norm} differs from 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def _trusted(cls, labels, amplitudes) -> "StateVector":
        # skips validation; only for outputs of norm-preserving internal steps
        obj = object.__new__(cls)
        object.__setattr__(obj, "labels", tuple(labels))
        object.__setattr__(obj, "amplitudes", _frozen(amplitudes))
        return obj

    @property
    def n(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"StateVector({self.labels}, {np.round(self.amplitudes, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        labels = _check_register(self.labels)
        mat = _frozen(self.matrix)
        dim = 1 << len(labels)
        if mat.shape != (dim, dim):
            raise DomainError(f"matrix shape {mat.shape} for {len(labels)} qubits")
        if np.max(np.abs(mat - mat.conj().T)) > TOL:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > TOL:
            raise DomainError(f"trace {np.trace(mat).real} differs from 1")
        if np.min(np.linalg.eigvalsh(mat)) < -TOL:
            raise DomainError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def _trusted(cls, labels, matrix) -> "DensityMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "labels", tuple(labels))
        object.__setattr__(obj, "matrix", _frozen(matrix))
        return obj

    @property
    def n(self) -> int:
        return len(self.labels)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def __repr__(self):
        return f"DensityMatrix({self.labels}, {np.round(self.matrix, 6).tolist()})"


State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.shape not in ((2, 2), (4, 4)):
            raise DomainError(f"gate {self.name!r} must act on 1 or 2 qubits")
        if np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))) > TOL:
            raise DomainError(f"gate {self.name!r} is not unitary")
        object.__setattr__(self, "matrix", mat)

    @property
    def arity(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2

    @cached_property
    def dagger(self) -> "Gate":
        return Gate(self.name + "^dag", self.matrix.conj().T)

    def __repr__(self):
        return f"Gate({self.name})"


I = Gate("I", np.eye(2))
X = Gate("X", [[0, 1], [1, 0]])
Y = Gate("Y", [[0, -1j], [1j, 0]])
Z = Gate("Z", [[1, 0], [0, -1]])
H = Gate("H", np.array([[1, 1], [1, -1]]) * _SQRT1_2)
# control is the first target label, flipped qubit the second
CNOT = Gate("CNOT", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Rank-one projective measurement given by an orthonormal basis.

    ``outcomes[i]`` labels the projector onto ``vectors[i]``, a state over
    ``arity`` qubits in the ordering of the measured targets.
    """

    kind: str
    outcomes: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vecs = _frozen(self.vectors)
        dim = vecs.shape[1]
        if vecs.shape[0] != dim or dim not in (2, 4) or len(self.outcomes) != dim:
            raise DomainError("basis must hold one outcome per dimension")
        if np.max(np.abs(vecs.conj() @ vecs.T - np.eye(dim))) > TOL:
            raise DomainError(f"{self.kind} basis is not orthonormal")
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "vectors", vecs)

    @property
    def arity(self) -> int:
        return 1 if self.vectors.shape[0] == 2 else 2

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(v, v.conj()) for v in self.vectors]


BELL_KINDS = ("Phi+", "Phi-", "Psi+", "Psi-")

_BELL_AMPS = {
    "Phi+": [_SQRT1_2, 0, 0, _SQRT1_2],
    "Phi-": [_SQRT1_2, 0, 0, -_SQRT1_2],
    "Psi+": [0, _SQRT1_2, _SQRT1_2, 0],
    "Psi-": [0, _SQRT1_2, -_SQRT1_2, 0],
}

Z_BASIS = MeasurementBasis("computational-z", ("0", "1"), np.eye(2))
X_BASIS = MeasurementBasis("x-basis", ("+", "-"), np.array([[1, 1], [1, -1]]) * _SQRT1_2)
BELL_BASIS = MeasurementBasis("bell", BELL_KINDS, np.array([_BELL_AMPS[k] for k in BELL_KINDS]))


def basis_state(label: str, bit: int | str) -> StateVector:
    amps = np.zeros(2)
    amps[int(bit)] = 1.0
    return StateVector((label,), amps)


def bloch_state(params: BlochParams, label: str = "a") -> StateVector:
    """``cos(theta)|0> + exp(i phi) sin(theta)|1>`` on a single qubit."""
    return StateVector(
        (label,),
        [math.cos(params.theta), np.exp(1j * params.phi) * math.sin(params.theta)],
    )


def bell_state(kind: str, labels: Sequence[str] = ("A", "B")) -> StateVector:
    if kind not in _BELL_AMPS:
        raise DomainError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    if len(labels) != 2:
        raise DomainError("a Bell state needs exactly two labels")
    return StateVector(tuple(labels), _BELL_AMPS[kind])


def density_from(state: State) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    v = state.amplitudes
    return DensityMatrix(state.labels, np.outer(v, v.conj()))


def tensor(s1: State, s2: State) -> State:
    """Kronecker product on the concatenated register.

    Mixed inputs promote the result to a density matrix.
    """
    labels = s1.labels + s2.labels
    if set(s1.labels) & set(s2.labels):
        raise DomainError(f"registers {s1.labels} and {s2.labels} overlap")
    if isinstance(s1, StateVector) and isinstance(s2, StateVector):
        return StateVector(labels, np.kron(s1.amplitudes, s2.amplitudes))
    return DensityMatrix(labels, np.kron(density_from(s1).matrix, density_from(s2).matrix))


def apply_gate(state: State, gate: Gate, targets: Sequence[str] | str) -> State:
    if isinstance(targets, str):
        targets = (targets,)
    if len(targets) != gate.arity:
        raise DomainError(f"{gate.name} acts on {gate.arity} qubit(s), got targets {tuple(targets)}")
    pos = _positions(state.labels, targets)
    n = state.n
    if isinstance(state, StateVector):
        return StateVector._trusted(state.labels, kernels.apply_matrix(state.amplitudes, n, gate.matrix, pos))
    # U rho U^dag: act with U on row qubits and conj(U) on column qubits of vec(rho)
    flat = kernels.apply_matrix(state.matrix.reshape(-1), 2 * n, gate.matrix, pos)
    flat = kernels.apply_matrix(flat, 2 * n, gate.matrix.conj(), [p + n for p in pos])
    return DensityMatrix._trusted(state.labels, flat.reshape(1 << n, 1 << n))


def apply_gates(state: State, gates: Iterable[Gate], target: str) -> State:
    for g in gates:
        state = apply_gate(state, g, target)
    return state


def _reorder(state: State, front: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Permute ``front`` to the leading axes; return the array with shape (2,)*n[*2]."""
    pos = _positions(state.labels, front)
    rest = [i for i in range(state.n) if i not in pos]
    order = pos + rest
    n = state.n
    if isinstance(state, StateVector):
        arr = state.amplitudes.reshape((2,) * n).transpose(order)
    else:
        arr = state.matrix.reshape((2,) * (2 * n)).transpose(order + [i + n for i in order])
    return arr, tuple(state.labels[i] for i in rest)


@dataclass(frozen=True)
class Branch:
    probability: float
    outcome: tuple[str, ...]
    state: State | None


@dataclass(frozen=True)
class BranchSet:
    branches: tuple[Branch, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.branches)

    def __len__(self):
        return len(self.branches)

    def total_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches)

    def by_outcome(self) -> dict[tuple[str, ...], Branch]:
        return {b.outcome: b for b in self.branches}


def _projections(state: State, basis: MeasurementBasis, targets: tuple[str, ...]):
    """Unnormalised post-states for every outcome, stacked, plus their Born weights."""
    if len(targets) != basis.arity:
        raise DomainError(f"{basis.kind} basis measures {basis.arity} qubit(s), got {targets}")
    arr, rest = _reorder(state, targets)
    sub = 1 << len(targets)
    rdim = 1 << len(rest)
    if isinstance(state, StateVector):
        posts = basis.vectors.conj() @ arr.reshape(sub, rdim)
        probs = np.einsum("kr,kr->k", posts.conj(), posts).real
    else:
        rho = arr.reshape(sub, rdim, sub, rdim)
        posts = np.einsum("ki,irjs,kj->krs", basis.vectors.conj(), rho, basis.vectors)
        probs = np.einsum("krr->k", posts).real
    return posts, probs, rest


def _post_state(post: np.ndarray, p: float, rest: tuple[str, ...]) -> State | None:
    if not rest or p <= ZERO_PROB:
        return None
    if post.ndim == 1:
        return StateVector._trusted(rest, post / math.sqrt(p))
    post = post / p
    return DensityMatrix._trusted(rest, (post + post.conj().T) / 2)


def outcome_probabilities(state: State, basis: MeasurementBasis, targets: Sequence[str]) -> list[tuple[float, State | None]]:
    """Born probability and renormalised post-state for every outcome of ``basis``.

    Measured labels are removed from the post-state register; if nothing remains,
    or the outcome is impossible, the post-state is ``None``.
    """
    posts, probs, rest = _projections(state, basis, tuple(targets))
    return [(float(p), _post_state(post, float(p), rest)) for post, p in zip(posts, probs)]


def measure(
    state: State,
    basis: MeasurementBasis,
    targets: Sequence[str] | str,
    mode: str = "enumerate",
    rng: np.random.Generator | None = None,
) -> BranchSet:
    """Projective measurement of ``targets``.

    ``enumerate`` returns every outcome with nonzero Born weight. ``sample``
    draws a single branch from ``rng`` and returns it as a one-element set,
    keeping its Born probability.
    """
    targets = (targets,) if isinstance(targets, str) else tuple(targets)
    posts, probs, rest = _projections(state, basis, targets)
    if mode == "enumerate":
        return BranchSet(
            tuple(
                Branch(float(p), (o,), _post_state(post, float(p), rest))
                for o, post, p in zip(basis.outcomes, posts, probs)
                if p > ZERO_PROB
            )
        )
    if mode == "sample":
        if rng is None:
            raise DomainError("sample mode needs a random generator")
        weights = np.where(probs > ZERO_PROB, probs, 0.0)
        i = kernels.pick_index(weights, rng.random() * weights.sum())
        p = float(probs[i])
        return BranchSet((Branch(p, (basis.outcomes[i],), _post_state(posts[i], p, rest)),))
    raise DomainError(f"unknown measurement mode {mode!r}")


def mix(weighted: Sequence[tuple[float, State]]) -> DensityMatrix:
    if not weighted:
        raise DomainError("nothing to mix")
    labels = weighted[0][1].labels
    weights = [float(w) for w, _ in weighted]
    if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > TOL:
        raise DomainError(f"mixture weights {weights} are not a probability vector")
    dim = 1 << len(labels)
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for w, s in weighted:
        if s.labels != labels:
            raise DomainError(f"register {s.labels} differs from {labels}")
        acc += w * density_from(s).matrix
    return DensityMatrix(labels, acc)


def partial_trace(rho: State, keep: Sequence[str] | str) -> DensityMatrix:
    if isinstance(keep, str):
        keep = (keep,)
    keep = tuple(keep)
    rho = density_from(rho)
    arr, rest = _reorder(rho, keep)
    kd = 1 << len(keep)
    rd = 1 << len(rest)
    red = np.einsum("irjr->ij", arr.reshape(kd, rd, kd, rd))
    return DensityMatrix(keep, (red + red.conj().T) / 2)


def reduced(state: State, keep: Sequence[str] | str) -> DensityMatrix:
    """Partial trace that accepts pure states and skips work when nothing is traced out."""
    keep = (keep,) if isinstance(keep, str) else tuple(keep)
    if keep == state.labels:
        return density_from(state)
    return partial_trace(state, keep)


def fidelity(rho: State, target: StateVector) -> float:
    """``<target|rho|target>`` for a pure target."""
    if rho.labels != target.labels:
        raise DomainError(f"register {rho.labels} does not match target {target.labels}")
    t = target.amplitudes
    if isinstance(rho, StateVector):
        return float(min(1.0, abs(np.vdot(t, rho.amplitudes)) ** 2))
    return float(np.clip(np.vdot(t, rho.matrix @ t).real, 0.0, 1.0))


def trace_distance(r1: State, r2: State) -> float:
    if r1.labels != r2.labels:
        raise DomainError(f"registers {r1.labels} and {r2.labels} differ")
    diff = density_from(r1).matrix - density_from(r2).matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


_YY = np.kron(Y.matrix, Y.matrix)


def concurrence(rho: State) -> float:
    """Wootters concurrence of a two-qubit state.

    Rank-one inputs use ``|<psi|YY|psi*>|`` so roundoff in the null space does
    not leak in through the square roots.
    """
    if rho.n != 2:
        raise DomainError(f"concurrence needs two qubits, got {rho.n}")
    if isinstance(rho, StateVector):
        psi = rho.amplitudes
    else:
        w, v = np.linalg.eigh(rho.matrix)
        psi = v[:, -1] if w[-1] > 1.0 - TOL else None
    if psi is not None:
        return float(min(1.0, abs(psi @ _YY @ psi)))
    m = rho.matrix
    tilde = _YY @ m.conj() @ _YY
    w, v = np.linalg.eigh(m)
    sqrt_m = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(sqrt_m @ tilde @ sqrt_m), 0.0, None))[::-1]
    return float(np.clip(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0))

"""Gates, taggant bases and projective measurement of the taggant."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .state import StateVector

UNITARY_TOL = 1e-12
ZERO_PROB = 1e-14


def _check_unitary(u: np.ndarray, tol: float) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > tol:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")


@dataclass(frozen=True, eq=False)
class Gate:
    """A single-qubit unitary on ``target`` or a c-NOT from ``control`` to ``target``."""

    kind: str
    target: int
    control: int | None = None
    matrix: np.ndarray | None = None
    label: str = ""

    @classmethod
    def single(cls, matrix, target: int, label: str = "u", tol: float = UNITARY_TOL) -> Gate:
        m = np.array(matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError(f"single-qubit gate must be 2x2, got {m.shape}")
        _check_unitary(m, tol)
        m.flags.writeable = False
        return cls("single_qubit", int(target), None, m, label)

    @classmethod
    def cnot(cls, control: int, target: int, label: str = "cnot") -> Gate:
        if control == target:
            raise ValueError("c-NOT control and target must differ")
        return cls("cnot", int(target), int(control), None, label)


def _check_index(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"qubit index {q} out of range for a {n}-qubit register")


def apply_single(s: StateVector, matrix: np.ndarray, target: int) -> StateVector:
    _check_index(target, s.n_qubits)
    t = np.tensordot(matrix, s.tensor(), axes=([1], [target]))
    t = np.moveaxis(t, 0, target)
    return StateVector(t.reshape(-1))


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    if g.kind == "single_qubit":
        return apply_single(s, g.matrix, g.target)
    if g.kind == "cnot":
        n = s.n_qubits
        _check_index(g.control, n)
        _check_index(g.target, n)
        t = np.array(s.tensor())
        sel = [slice(None)] * n
        sel[g.control] = 1
        sub = t[tuple(sel)]
        # target axis index shifts down once the control axis is sliced away
        axis = g.target - (1 if g.target > g.control else 0)
        t[tuple(sel)] = np.flip(sub, axis=axis)
        return StateVector(t.reshape(-1))
    raise ValueError(f"unknown gate kind {g.kind!r}")


def apply_circuit(s: StateVector, gates: Sequence[Gate]) -> StateVector:
    for g in gates:
        s = apply_gate(s, g)
    return s


def tagger(s: StateVector, controller: int, taggant: int) -> StateVector:
    """c-NOT from an AB qubit onto the taggant; dilutes AB entanglement into ABT."""
    return apply_gate(s, Gate.cnot(controller, taggant, label="tagger"))


def untagger(s: StateVector, controller: int, taggant: int) -> StateVector:
    """Inverse of :func:`tagger` (the same c-NOT); concentrates entanglement back into AB."""
    return apply_gate(s, Gate.cnot(controller, taggant, label="untagger"))


@dataclass(frozen=True)
class BasisParams:
    """Single-qubit basis angles: ``|0'> = cos(theta)|0> + e^{i phi} sin(theta)|1>``."""

    theta: float
    phi: float = 0.0

    @property
    def a(self) -> float:
        return float(np.cos(self.theta))

    @property
    def b(self) -> complex:
        return complex(np.exp(1j * self.phi) * np.sin(self.theta))

    @classmethod
    def from_a2(cls, a2: float, phi: float = 0.0) -> BasisParams:
        if not 0.0 <= a2 <= 1.0:
            raise ValueError(f"a^2 = {a2} outside [0, 1]")
        return cls(float(np.arccos(np.sqrt(a2))), phi)

    def canonical(self) -> BasisParams:
        """Equivalent parameters with theta in [0, pi/2] and phi in [0, 2 pi)."""
        a = np.cos(self.theta)
        b = np.exp(1j * self.phi) * np.sin(self.theta)
        theta = float(np.arctan2(abs(b), abs(a)))
        if abs(b) < 1e-15:
            return BasisParams(theta, 0.0)
        phi = float(np.angle(b) - (np.angle(a) if abs(a) > 0 else 0.0)) % (2 * np.pi)
        return BasisParams(theta, phi)


@dataclass(frozen=True, eq=False)
class TaggantBasis:
    """Orthonormal taggant basis; row ``i`` of ``u`` holds the coefficients of ``|i'>``."""

    u: np.ndarray
    params: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=np.complex128)
        d = u.shape[0] if u.ndim == 2 else 0
        if d < 2 or d & (d - 1):
            raise ValueError(f"taggant basis dimension must be a power of two >= 2, got {u.shape}")
        _check_unitary(u, UNITARY_TOL)
        u.flags.writeable = False
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    @classmethod
    def computational(cls, dim: int = 2) -> TaggantBasis:
        return cls(np.eye(dim))

    def __repr__(self) -> str:
        return f"TaggantBasis(u={self.u.tolist()!r})"


def taggant_basis(params: BasisParams) -> TaggantBasis:
    a, b = params.a, params.b
    u = np.array([[a, b], [-np.conj(b), np.conj(a)]], dtype=np.complex128)
    return TaggantBasis(u, params=(params.theta, params.phi))


def product_basis(single: TaggantBasis, count: int) -> TaggantBasis:
    """The same single-qubit basis on each of ``count`` taggant qubits."""
    u = np.array([[1.0]], dtype=np.complex128)
    for _ in range(count):
        u = np.kron(u, single.u)
    return TaggantBasis(u)


@dataclass(frozen=True, eq=False)
class MeasurementSpec:
    """Nondegenerate projective measurement of ``targets`` in ``basis``."""

    targets: tuple[int, ...]
    basis: TaggantBasis

    def __post_init__(self):
        targets = tuple(int(q) for q in self.targets)
        if not targets or len(set(targets)) != len(targets):
            raise ValueError("measurement targets must be nonempty and distinct")
        if self.basis.dim != 1 << len(targets):
            raise ValueError(
                f"basis dimension {self.basis.dim} does not match {len(targets)} target qubit(s)"
            )
        object.__setattr__(self, "targets", targets)

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(row, row.conj()) for row in self.basis.u]


@dataclass(frozen=True, eq=False)
class Outcome:
    index: int
    probability: float
    post_state: StateVector | None  # None when probability < ZERO_PROB


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    outcomes: tuple[Outcome, ...]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes])

    def nonzero(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.post_state is not None]


def measure(s: StateVector, spec: MeasurementSpec) -> MeasurementResult:
    """Project the targets onto each basis vector; the register keeps its size.

    Post-measurement states carry the measured qubits collapsed onto the
    corresponding basis vector.
    """
    n = s.n_qubits
    for q in spec.targets:
        _check_index(q, n)
    k = len(spec.targets)
    rest = [q for q in range(n) if q not in spec.targets]
    order = list(spec.targets) + rest
    m = np.transpose(s.tensor(), order).reshape(1 << k, -1)
    inverse = np.argsort(order)
    outcomes = []
    for j, row in enumerate(spec.basis.u):
        # <j'|_targets psi, then re-attach |j'> on the targets
        branch = row.conj() @ m
        q = float(np.vdot(branch, branch).real)
        if q < ZERO_PROB:
            outcomes.append(Outcome(j, 0.0, None))
            continue
        full = np.outer(row, branch).reshape((2,) * n)
        full = np.transpose(full, inverse)
        outcomes.append(Outcome(j, q, StateVector(full.reshape(-1), normalize=True)))
    total = sum(o.probability for o in outcomes)
    outcomes = [Outcome(o.index, o.probability / total, o.post_state) for o in outcomes]
    return MeasurementResult(tuple(outcomes))

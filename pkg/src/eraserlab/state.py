"""State vectors, density matrices, partial traces and Schmidt decompositions.

Registers are big-endian: qubit 0 is the most significant bit of a basis
state index, so ``|q0 q1 ... q(n-1)>`` has index ``sum(q_k << (n-1-k))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Sequence

import numpy as np

from .linalg import jacobi_eigh

MAX_QUBITS = 8
NORM_TOL = 1e-10
PSD_TOL = 1e-10
CLAMP_TOL = 1e-10
STATE_FILE_NORM_TOL = 1e-6


class StateFileError(ValueError):
    """Malformed state file."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``n_qubits`` qubits.

    Amplitudes whose squared norm is within ``NORM_TOL`` of one are accepted
    and rescaled to unit norm; pass ``normalize=True`` to rescale anything
    nonzero.
    """

    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray, normalize: bool = False):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        n = int(amps.size).bit_length() - 1
        if amps.size < 2 or (1 << n) != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two >= 2")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if normalize:
            if norm2 == 0.0:
                raise ValueError("cannot normalize the zero vector")
        elif abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps = amps / np.sqrt(norm2)
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def basis(cls, bits: str) -> StateVector:
        """Computational basis state from a bitstring such as ``"010"``."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length two per qubit."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def allclose(self, other: StateVector, atol: float = 1e-12, up_to_phase: bool = False) -> bool:
        if self.n_qubits != other.n_qubits:
            return False
        a, b = self.amplitudes, other.amplitudes
        if up_to_phase:
            overlap = np.vdot(b, a)
            if abs(overlap) > 0:
                b = b * (overlap / abs(overlap))
        return bool(np.max(np.abs(a - b)) <= atol)

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits}, amplitudes={self.amplitudes!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    entries: np.ndarray

    def __init__(self, entries: np.ndarray, check_psd: bool = True):
        m = np.array(entries, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        m = m / tr
        if check_psd:
            w, _ = jacobi_eigh(m)
            if w[-1] < -PSD_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {w[-1]!r}")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, entries={self.entries!r})"


@dataclass(frozen=True)
class PartitionSpec:
    """Assignment of register qubits to the subsystems A, B and taggant T."""

    a_qubits: tuple[int, ...]
    b_qubits: tuple[int, ...] = ()
    t_qubits: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("a_qubits", "b_qubits", "t_qubits"):
            object.__setattr__(self, name, tuple(int(q) for q in getattr(self, name)))
        everything = self.a_qubits + self.b_qubits + self.t_qubits
        if len(set(everything)) != len(everything):
            raise ValueError("partition lists overlap")
        if sorted(everything) != list(range(len(everything))):
            raise ValueError(f"partition does not cover qubits 0..{len(everything) - 1} exactly")

    @property
    def n_qubits(self) -> int:
        return len(self.a_qubits) + len(self.b_qubits) + len(self.t_qubits)

    @property
    def ab_qubits(self) -> tuple[int, ...]:
        return self.a_qubits + self.b_qubits

    def check_register(self, n_qubits: int) -> None:
        if n_qubits != self.n_qubits:
            raise ValueError(
                f"partition covers {self.n_qubits} qubits but the register has {n_qubits}"
            )


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_vectors: np.ndarray  # columns, A side
    right_vectors: np.ndarray  # columns, B side

    def reconstruct(self) -> np.ndarray:
        """Amplitude matrix sum_k c_k |l_k><r_k*| with A rows and B columns."""
        return (self.left_vectors * self.coefficients) @ self.right_vectors.T


@dataclass(frozen=True, eq=False)
class DecompositionView:
    """Weights and AB components of a mixed state read off a purification."""

    weights: np.ndarray
    components: tuple[StateVector | None, ...]


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    return StateVector(np.kron(s1.amplitudes, s2.amplitudes))


def density_matrix(s: StateVector) -> DensityMatrix:
    return DensityMatrix(np.outer(s.amplitudes, s.amplitudes.conj()), check_psd=False)


def amplitude_matrix(s: StateVector, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Reshape ``s`` into a matrix indexed by the ``rows`` qubits and ``cols`` qubits."""
    order = list(rows) + list(cols)
    if sorted(order) != list(range(s.n_qubits)):
        raise ValueError("rows and cols must partition the register")
    t = np.transpose(s.tensor(), order)
    return t.reshape(1 << len(rows), 1 << len(cols))


def reduced_density(s: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state, as a raw array."""
    rest = [q for q in range(s.n_qubits) if q not in keep]
    m = amplitude_matrix(s, keep, rest)
    return m @ m.conj().T


def partial_trace(rho: DensityMatrix, keep: Sequence[int], layout: PartitionSpec) -> DensityMatrix:
    """Trace out every qubit of ``layout`` not listed in ``keep``.

    Kept qubits appear in the order given by ``keep``.
    """
    n = layout.n_qubits
    if rho.dim != 1 << n:
        raise ValueError(f"density matrix of dimension {rho.dim} does not match a {n}-qubit layout")
    keep = [int(q) for q in keep]
    if len(set(keep)) != len(keep) or any(q < 0 or q >= n for q in keep):
        raise ValueError(f"invalid kept qubits {keep}")
    if not keep:
        raise ValueError("must keep at least one qubit")
    rest = [q for q in range(n) if q not in keep]
    t = rho.entries.reshape((2,) * (2 * n))
    t = np.transpose(t, keep + rest + [n + q for q in keep] + [n + q for q in rest])
    dk, dr = 1 << len(keep), 1 << len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return DensityMatrix(np.einsum("arbr->ab", t))


def eigensolve_hermitian(m: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (nonincreasing, clamped into [0, 1]) and eigenvector columns."""
    w, v = jacobi_eigh(m.entries)
    if np.any(w < -CLAMP_TOL) or np.any(w > 1.0 + CLAMP_TOL):
        raise ValueError(f"eigenvalues {w} fall outside [0, 1]")
    return np.clip(w, 0.0, 1.0), v


def _complete_columns(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to ``dim`` columns by Gram-Schmidt on unit vectors."""
    cols = [vectors[:, k] for k in range(vectors.shape[1])]
    for e in np.eye(dim, dtype=np.complex128):
        if len(cols) == dim:
            break
        u = e.copy()
        for c in cols:
            u = u - np.vdot(c, u) * c
        nrm = np.linalg.norm(u)
        if nrm > 1e-6:
            cols.append(u / nrm)
    return np.stack(cols, axis=1)


def schmidt_decompose(s: StateVector, cut: PartitionSpec) -> SchmidtDecomposition:
    cut.check_register(s.n_qubits)
    if cut.t_qubits:
        raise ValueError("Schmidt decomposition needs a bipartite cut (T must be empty)")
    if not cut.a_qubits or not cut.b_qubits:
        raise ValueError("both sides of the cut must be nonempty")
    m = amplitude_matrix(s, cut.a_qubits, cut.b_qubits)
    swap = m.shape[0] > m.shape[1]
    if swap:
        m = m.T
    # m has the smaller side as rows
    rho_small = DensityMatrix(m @ m.conj().T, check_psd=False)
    w, vecs = eigensolve_hermitian(rho_small)
    coeffs = np.sqrt(w)
    k = len(coeffs)
    big = np.zeros((m.shape[1], k), dtype=np.complex128)
    kept = []
    for j in range(k):
        if coeffs[j] > 1e-7:
            big[:, j] = (vecs[:, j].conj() @ m) / coeffs[j]
            kept.append(j)
    # Gram-Schmidt the partner vectors of negligible coefficients
    basis = big[:, kept]
    if len(kept) < k:
        full = _complete_columns(basis, m.shape[1])
        extra = iter(range(len(kept), full.shape[1]))
        for j in range(k):
            if j not in kept:
                big[:, j] = full[:, next(extra)]
    small = vecs
    if swap:
        small, big = big, small
    return SchmidtDecomposition(_frozen(coeffs), _frozen(small), _frozen(big))


def haar_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    z = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return StateVector(z, normalize=True)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def bell_state(n_qubits: int, i: int, j: int) -> StateVector:
    """(|0..0> + |..1_i..1_j..>)/sqrt(2) with every other qubit in |0>."""
    if i == j or not (0 <= i < n_qubits and 0 <= j < n_qubits):
        raise ValueError(f"invalid Bell pair ({i}, {j}) for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0 / np.sqrt(2.0)
    amps[(1 << (n_qubits - 1 - i)) | (1 << (n_qubits - 1 - j))] = 1.0 / np.sqrt(2.0)
    return StateVector(amps)


# --- state file format -------------------------------------------------------


def parse_state_text(text: str) -> StateVector:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise StateFileError("empty state file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "qubits":
        raise StateFileError("line 1: expected 'qubits N'")
    try:
        n = int(head[1])
    except ValueError:
        raise StateFileError(f"line 1: invalid qubit count {head[1]!r}") from None
    if not 1 <= n <= MAX_QUBITS:
        raise StateFileError(f"line 1: qubit count must be in 1..{MAX_QUBITS}")
    body = lines[1:]
    if len(body) != 1 << n:
        raise StateFileError(f"expected {1 << n} amplitude lines, found {len(body)}")
    amps = np.empty(1 << n, dtype=np.complex128)
    for k, line in enumerate(body):
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            re, im = float(parts[0]), float(parts[1])
        except ValueError:
            raise StateFileError(f"line {k + 2}: expected 're im'") from None
        if not (np.isfinite(re) and np.isfinite(im)):
            raise StateFileError(f"line {k + 2}: non-finite amplitude")
        amps[k] = complex(re, im)
    norm2 = float(np.vdot(amps, amps).real)
    if abs(norm2 - 1.0) > STATE_FILE_NORM_TOL:
        raise StateFileError(f"state is not normalized (|psi|^2 = {norm2!r})")
    return StateVector(amps, normalize=True)


def format_state(s: StateVector) -> str:
    out = [f"qubits {s.n_qubits}"]
    out += [f"{float(a.real)!r} {float(a.imag)!r}" for a in s.amplitudes]
    return "\n".join(out) + "\n"


def read_state(path: str | PathLike) -> StateVector:
    return parse_state_text(Path(path).read_text(encoding="utf-8"))


def write_state(s: StateVector, path: str | PathLike) -> None:
    Path(path).write_text(format_state(s), encoding="utf-8")

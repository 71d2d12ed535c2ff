"""Entanglement measures across an A|B cut with an optional taggant T.

``E`` is the entropy of the single-qubit reduced state of a pure AB state.
For a pure ABT state, the entanglement of projection in a taggant basis is
the probability-weighted ``E`` of the AB components obtained by projecting
T onto that basis. Its minimum and maximum over taggant bases are the
entanglements of formation and assistance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import (
    ZERO_PROB,
    BasisParams,
    MeasurementSpec,
    TaggantBasis,
    measure,
)
from .linalg import jacobi_eigh
from .optimize import extremize
from .state import (
    CLAMP_TOL,
    DecompositionView,
    DensityMatrix,
    PartitionSpec,
    StateVector,
    amplitude_matrix,
    eigensolve_hermitian,
    partial_trace,
)

PURE_RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EntanglementReport:
    """A measure value in bits, plus the taggant basis it was evaluated in or found at."""

    value: float
    basis: TaggantBasis | None = None
    params: BasisParams | tuple[float, ...] | None = None


def binary_entropy(x: float) -> float:
    """``-x log2 x - (1 - x) log2 (1 - x)``, zero at both endpoints."""
    if not -CLAMP_TOL <= x <= 1.0 + CLAMP_TOL:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(float(x), 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


def _binary_entropy_array(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    out = np.zeros_like(x)
    inner = (x > 0.0) & (x < 1.0)
    xi = x[inner]
    out[inner] = -(xi * np.log2(xi) + (1.0 - xi) * np.log2(1.0 - xi))
    return out


def von_neumann_entropy(rho: DensityMatrix) -> float:
    w, _ = eigensolve_hermitian(rho)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w)))


def _require_single_a(cut: PartitionSpec) -> None:
    if len(cut.a_qubits) != 1:
        raise ValueError(f"the A side must be a single qubit, got {list(cut.a_qubits)}")
    if not cut.b_qubits:
        raise ValueError("the B side must be nonempty")


def entanglement_pure(s: StateVector, cut: PartitionSpec) -> EntanglementReport:
    """Entropy of the reduced state of the single A qubit of a pure AB state."""
    cut.check_register(s.n_qubits)
    if cut.t_qubits:
        raise ValueError("entanglement_pure needs an empty taggant; use the projection measures")
    _require_single_a(cut)
    rho = partial_trace(_dm(s), cut.a_qubits, cut)
    return EntanglementReport(von_neumann_entropy(rho))


def _dm(s: StateVector) -> DensityMatrix:
    return DensityMatrix(np.outer(s.amplitudes, s.amplitudes.conj()), check_psd=False)


def _ab_entropy(component: np.ndarray) -> float:
    """E of a normalized AB amplitude matrix (A rows) via the Jacobi eigensolver."""
    rho_a = component @ component.conj().T
    w, _ = jacobi_eigh(rho_a)
    w = np.clip(w, 0.0, 1.0)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w)))


def _taggant_blocks(s: StateVector, cut: PartitionSpec) -> np.ndarray:
    """Unnormalized AB components ``<k|_T psi`` as an array ``(d_T, d_A, d_B)``."""
    d_a = 1 << len(cut.a_qubits)
    d_b = 1 << len(cut.b_qubits)
    m = amplitude_matrix(s, cut.t_qubits, cut.ab_qubits)
    return m.reshape(-1, d_a, d_b)


def decomposition(s: StateVector, cut: PartitionSpec, basis: TaggantBasis) -> DecompositionView:
    """Weights and AB components of ``s`` read off in the taggant basis ``basis``."""
    cut.check_register(s.n_qubits)
    blocks = _taggant_blocks(s, cut)
    if basis.dim != blocks.shape[0]:
        raise ValueError(
            f"taggant basis has dimension {basis.dim} but T spans {blocks.shape[0]} states"
        )
    comps = np.einsum("ik,kab->iab", basis.u.conj(), blocks)
    weights = np.einsum("iab,iab->i", comps, comps.conj()).real
    states = tuple(
        StateVector(c.reshape(-1), normalize=True) if p >= ZERO_PROB else None
        for c, p in zip(comps, weights)
    )
    return DecompositionView(weights / weights.sum(), states)


def entanglement_of_projection(
    s: StateVector, cut: PartitionSpec, basis: TaggantBasis
) -> EntanglementReport:
    cut.check_register(s.n_qubits)
    _require_single_a(cut)
    if not cut.t_qubits:
        raise ValueError("entanglement of projection needs a nonempty taggant")
    blocks = _taggant_blocks(s, cut)
    if basis.dim != blocks.shape[0]:
        raise ValueError(
            f"taggant basis has dimension {basis.dim} but T spans {blocks.shape[0]} states"
        )
    total = 0.0
    for row in basis.u:
        comp = np.einsum("k,kab->ab", row.conj(), blocks)
        p = float(np.vdot(comp, comp).real)
        if p < ZERO_PROB:
            continue
        total += p * _ab_entropy(comp / np.sqrt(p))
    return EntanglementReport(total, basis, basis.params)


def projection_values(blocks: np.ndarray, unitaries: np.ndarray) -> np.ndarray:
    """Entanglement of projection for a batch of taggant bases.

    ``blocks`` is ``(d_T, 2, d_B)``; ``unitaries`` is ``(G, d_T, d_T)`` with
    basis vectors as rows. The single-qubit reduced state of each component
    is diagonalized in closed form.
    """
    comps = np.einsum("gik,kab->giab", unitaries.conj(), blocks)
    r = np.einsum("giab,gicb->giac", comps, comps.conj())
    p = (r[..., 0, 0] + r[..., 1, 1]).real
    det = (r[..., 0, 0] * r[..., 1, 1]).real - np.abs(r[..., 0, 1]) ** 2
    live = p >= ZERO_PROB
    ps = np.where(live, p, 1.0)
    x = np.clip(det / ps**2, 0.0, 0.25)
    disc = np.sqrt(1.0 - 4.0 * x)
    small = 2.0 * x / (1.0 + disc)  # smaller eigenvalue, cancellation-free
    e = _binary_entropy_array(small)
    return np.sum(np.where(live, p * e, 0.0), axis=-1)


class _QubitTaggantObjective:
    """Fast single-point entanglement of projection for a one-qubit taggant.

    The unnormalized reduced state of A for outcome ``i`` is
    ``sum_kl conj(u_ik) u_il G_kl`` with ``G_kl = phi_k phi_l^dag``, so each
    evaluation only combines three precomputed 2x2 blocks.
    """

    def __init__(self, blocks: np.ndarray):
        g = np.einsum("kab,lcb->klac", blocks, blocks.conj())
        self.g00 = [complex(v) for v in g[0, 0].ravel()]
        self.g11 = [complex(v) for v in g[1, 1].ravel()]
        self.g01 = [complex(v) for v in g[0, 1].ravel()]

    def _outcome(self, w0: float, w1: float, cross: complex) -> float:
        # R = w0 G00 + w1 G11 + cross G01 + conj(cross) G10, with G10 = G01^dag
        g00, g11, g01 = self.g00, self.g11, self.g01
        r00 = (w0 * g00[0] + w1 * g11[0] + 2.0 * (cross * g01[0])).real
        r11 = (w0 * g00[3] + w1 * g11[3] + 2.0 * (cross * g01[3])).real
        r01 = w0 * g00[1] + w1 * g11[1] + cross * g01[1] + cross.conjugate() * g01[2].conjugate()
        p = r00 + r11
        if p < ZERO_PROB:
            return 0.0
        x = min(max((r00 * r11 - abs(r01) ** 2) / (p * p), 0.0), 0.25)
        small = 2.0 * x / (1.0 + math.sqrt(1.0 - 4.0 * x))
        return p * binary_entropy(small)

    def __call__(self, params: np.ndarray) -> float:
        theta, phi = float(params[0]), float(params[1])
        c, s = math.cos(theta), math.sin(theta)
        ph = complex(math.cos(phi), math.sin(phi))
        # outcome 0: coefficients conj(u_0k) = (c, s e^{-i phi})
        cross0 = c * s * ph
        # outcome 1: coefficients conj(u_1k) = (-s e^{i phi}, c)
        cross1 = -s * c * ph
        return self._outcome(c * c, s * s, cross0) + self._outcome(s * s, c * c, cross1)


def _as_params(x: np.ndarray, dim: int):
    if dim == 2:
        return BasisParams(float(x[0]), float(x[1])).canonical()
    return tuple(float(v) for v in x)


def _extremum(s: StateVector, cut: PartitionSpec, maximize: bool) -> EntanglementReport:
    cut.check_register(s.n_qubits)
    _require_single_a(cut)
    if not cut.t_qubits:
        raise ValueError("taggant is empty; use entanglement_pure")
    if len(cut.a_qubits) != 1:
        raise ValueError("the A side must be a single qubit")
    blocks = _taggant_blocks(s, cut)
    d_t = blocks.shape[0]
    if d_t not in (2, 4):
        raise ValueError(f"taggant must have one or two qubits, got {len(cut.t_qubits)}")
    rho_ab = blocks.reshape(d_t, -1).T @ blocks.reshape(d_t, -1).conj()
    w, v = jacobi_eigh(rho_ab)
    if w[0] > 1.0 - PURE_RANK_TOL:
        # AB is pure, so every basis gives the same value
        comp = v[:, 0].reshape(blocks.shape[1:])
        return EntanglementReport(_ab_entropy(comp), TaggantBasis.computational(d_t), None)
    # E_p never drops below 0 nor exceeds the entropy of A
    bound = _ab_entropy(blocks.transpose(1, 0, 2).reshape(2, -1)) if maximize else 0.0
    scalar = _QubitTaggantObjective(blocks) if d_t == 2 else None
    ext = extremize(lambda u: projection_values(blocks, u), d_t, maximize, scalar, bound)
    params = _as_params(ext.params, d_t)
    return EntanglementReport(float(ext.value), TaggantBasis(_unitarize(ext.unitary)), params)


def _unitarize(u: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(u.T)
    d = np.diag(r)
    return (q * (d / np.abs(d))).T


def entanglement_of_formation(s: StateVector, cut: PartitionSpec) -> EntanglementReport:
    """Minimum entanglement of projection over taggant bases (T of one or two qubits)."""
    return _extremum(s, cut, maximize=False)


def entanglement_of_assistance(s: StateVector, cut: PartitionSpec) -> EntanglementReport:
    """Maximum entanglement of projection over taggant bases of this purification."""
    return _extremum(s, cut, maximize=True)


def _remaining_cut(cut: PartitionSpec, measured: Sequence[int]) -> PartitionSpec:
    """Same cut with measured (now product) taggant qubits moved out of T.

    They are appended to B: a qubit in a product state with everything else
    leaves the single-qubit reduced state of A unchanged.
    """
    rest_t = tuple(q for q in cut.t_qubits if q not in measured)
    moved = tuple(q for q in cut.t_qubits if q in measured)
    return PartitionSpec(cut.a_qubits, cut.b_qubits + moved, rest_t)


def entanglement_pf(
    s: StateVector, cut: PartitionSpec, projectors: MeasurementSpec | None = None
) -> EntanglementReport:
    """Outcome-weighted entanglement of formation after an optional taggant measurement."""
    if projectors is None:
        return entanglement_of_formation(s, cut)
    if not set(projectors.targets) <= set(cut.t_qubits):
        raise ValueError("measurement targets must lie in the taggant")
    _check_complete(projectors)
    result = measure(s, projectors)
    after = _remaining_cut(cut, projectors.targets)
    total = 0.0
    for o in result.nonzero():
        total += o.probability * formation_or_pure(o.post_state, after)
    return EntanglementReport(total, projectors.basis, projectors.basis.params)


def _check_complete(spec: MeasurementSpec, tol: float = 1e-10) -> None:
    total = sum(spec.projectors())
    if np.max(np.abs(total - np.eye(spec.basis.dim))) > tol:
        raise ValueError("projectors do not sum to the identity")


def formation_or_pure(s: StateVector, cut: PartitionSpec) -> float:
    if cut.t_qubits:
        return entanglement_of_formation(s, cut).value
    return entanglement_pure(s, cut).value


def formation_of_density(rho_ab: np.ndarray, n_a: int, n_b: int) -> float:
    """Entanglement of formation of a mixed AB state via its minimal purification.

    The taggant gets one qubit for rank <= 2 and two qubits for rank <= 4.
    """
    w, v = jacobi_eigh(rho_ab)
    w = np.clip(w, 0.0, None)
    rank = int(np.sum(w > PURE_RANK_TOL))
    n_ab = n_a + n_b
    if rank <= 1:
        s = StateVector(v[:, 0])
        return entanglement_pure(s, PartitionSpec(range(n_a), range(n_a, n_ab))).value
    if rank > 4:
        raise ValueError(f"AB state of rank {rank} needs more than a two-qubit taggant")
    n_t = 1 if rank <= 2 else 2
    d_t = 1 << n_t
    psi = np.zeros((1 << n_ab, d_t), dtype=np.complex128)
    for k in range(rank):
        psi[:, k] = np.sqrt(w[k]) * v[:, k]
    s = StateVector(psi.reshape(-1), normalize=True)
    cut = PartitionSpec(range(n_a), range(n_a, n_ab), range(n_ab, n_ab + n_t))
    return entanglement_of_formation(s, cut).value


# --- closed forms for the tagged two-branch state -----------------------------


def _check_prob(name: str, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} = {x} outside [0, 1]")
    return float(x)


def _first_outcome(alpha2: float, a2: float) -> float:
    return a2 * alpha2 + (1.0 - a2) * (1.0 - alpha2)


def ep_closed_form(alpha2: float, a2: float) -> float:
    """``e(alpha^2) + e(a^2) - e(p0)`` for ``alpha|00>|0> + beta|11>|1>`` measured with real ``a``."""
    alpha2 = _check_prob("alpha2", alpha2)
    a2 = _check_prob("a2", a2)
    p0 = _first_outcome(alpha2, a2)
    return binary_entropy(alpha2) + binary_entropy(a2) - binary_entropy(p0)


def ep_sum_form(alpha2: float, a2: float) -> float:
    """``p0 e(a^2 alpha^2 / p0) + p1 e(b^2 alpha^2 / p1)``; zero-probability terms drop."""
    alpha2 = _check_prob("alpha2", alpha2)
    a2 = _check_prob("a2", a2)
    b2 = 1.0 - a2
    p0 = _first_outcome(alpha2, a2)
    p1 = 1.0 - p0
    total = 0.0
    if p0 >= ZERO_PROB:
        total += p0 * binary_entropy(min(a2 * alpha2 / p0, 1.0))
    if p1 >= ZERO_PROB:
        total += p1 * binary_entropy(min(b2 * alpha2 / p1, 1.0))
    return total


def tagged_alpha_state(alpha2: float) -> StateVector:
    """``sqrt(alpha2)|000> + sqrt(1 - alpha2)|111>`` on (A, B, T)."""
    alpha2 = _check_prob("alpha2", alpha2)
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = np.sqrt(alpha2)
    amps[7] = np.sqrt(1.0 - alpha2)
    return StateVector(amps)


# --- concurrence oracle ---------------------------------------------------------

_SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho: DensityMatrix) -> float:
    """Two-qubit concurrence from the spin-flipped spectrum."""
    if rho.dim != 4:
        raise ValueError("concurrence is defined for two-qubit density matrices")
    # rho = W W^dag; the spin-flip spectrum is the singular values of W^T (sy x sy) W
    w, v = np.linalg.eigh(rho.entries)
    factor = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(factor.T @ _SIGMA_YY @ factor, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_ef_oracle(rho: DensityMatrix) -> float:
    """Closed-form two-qubit entanglement of formation, independent of the optimizer."""
    c = min(concurrence(rho), 1.0)
    return binary_entropy((1.0 + np.sqrt(1.0 - c * c)) / 2.0)

"""Tagger/untagger eraser circuits and their optical spin-path versions.

Each run returns a :class:`ScenarioTrace` with the register state and the
entanglement of projections' formation, formation and assistance across the
A|B cut after every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import (
    BasisParams,
    Gate,
    MeasurementSpec,
    TaggantBasis,
    apply_gate,
    measure,
    taggant_basis,
    tagger,
    untagger,
)
from .measures import (
    entanglement_of_assistance,
    entanglement_of_formation,
    entanglement_of_projection,
    formation_of_density,
    formation_or_pure,
)
from .state import PartitionSpec, StateVector, bell_state, haar_state, haar_unitary, reduced_density

SQRT_HALF = 1.0 / np.sqrt(2.0)
# columns are hbar = (h + v)/sqrt2 and vbar = (-h + v)/sqrt2 in the h/v basis
HV_TO_BAR = np.array([[SQRT_HALF, -SQRT_HALF], [SQRT_HALF, SQRT_HALF]])
BAR_BASIS = BasisParams(np.pi / 4, 0.0)
MEAS_BASES = {"hv": BasisParams(0.0, 0.0), "hbar_vbar": BAR_BASIS}


@dataclass(frozen=True, eq=False)
class Branch:
    weight: float
    state: StateVector


@dataclass(frozen=True, eq=False)
class Step:
    """One labelled point of a trace.

    ``state`` is the register state, or after a taggant measurement the state
    of the first outcome with nonzero probability; ``branches`` then lists
    every outcome with its probability.
    """

    label: str
    state: StateVector
    e_pf: float | None = None
    e_f: float | None = None
    e_a: float | None = None
    e_p: float | None = None
    branches: tuple[Branch, ...] = ()


@dataclass(frozen=True, eq=False)
class ScenarioTrace:
    steps: tuple[Step, ...]
    partition: PartitionSpec
    name: str = ""

    def column(self, name: str) -> list[float | None]:
        return [getattr(s, name) for s in self.steps]


@dataclass(frozen=True)
class OpticalEncoding:
    """Qubit positions of the photon degrees of freedom.

    Polarization h is |0> and v is |1>. The four paths of photon 1 are two
    qubits with ``p1a`` as the most significant bit.
    """

    s1: int | None = None
    s2: int | None = None
    p1: int | None = None
    p1a: int | None = None
    p1b: int | None = None


FIG2A_ENCODING = OpticalEncoding(s1=0, s2=1, p1=2)
FIG2B_ENCODING = OpticalEncoding(s1=0, p1a=1, p1b=2, s2=3)


# --- ensemble evaluation ---------------------------------------------------------


def ensemble_epf(branches: tuple[Branch, ...], cut: PartitionSpec) -> float:
    """Outcome-weighted E_f of the branches (E_f itself when unmeasured)."""
    return sum(b.weight * formation_or_pure(b.state, cut) for b in branches)


def ensemble_ef(branches: tuple[Branch, ...], cut: PartitionSpec) -> float:
    """E_f of the AB state averaged over branches."""
    if len(branches) == 1:
        return formation_or_pure(branches[0].state, cut)
    rho = sum(b.weight * reduced_density(b.state, cut.ab_qubits) for b in branches)
    return formation_of_density(rho, len(cut.a_qubits), len(cut.b_qubits))


def ensemble_ea(branches: tuple[Branch, ...], cut: PartitionSpec) -> float:
    """Outcome-weighted E_a of the branches."""
    if not cut.t_qubits:
        return ensemble_epf(branches, cut)
    return sum(b.weight * entanglement_of_assistance(b.state, cut).value for b in branches)


def ensemble_ep(branches: tuple[Branch, ...], cut: PartitionSpec, basis: TaggantBasis) -> float:
    return sum(
        b.weight * entanglement_of_projection(b.state, cut, basis).value for b in branches
    )


def ensemble_measures(branches: tuple[Branch, ...], cut: PartitionSpec) -> tuple[float, float, float]:
    """``(e_pf, e_f, e_a)`` of a register that may have been split by measurements.

    With one branch these are E_f, E_f and E_a of that pure state. With
    several, e_pf averages each branch's E_f, e_f is the formation of the
    averaged AB state and e_a averages each branch's E_a.
    """
    e_pf = ensemble_epf(branches, cut)
    e_f = e_pf if len(branches) == 1 else ensemble_ef(branches, cut)
    return e_pf, e_f, ensemble_ea(branches, cut)


def measure_branches(
    branches: tuple[Branch, ...], spec: MeasurementSpec
) -> tuple[Branch, ...]:
    out = []
    for b in branches:
        for o in measure(b.state, spec).nonzero():
            out.append(Branch(b.weight * o.probability, o.post_state))
    return tuple(out)


def make_step(label: str, branches: tuple[Branch, ...], cut: PartitionSpec) -> Step:
    e_pf, e_f, e_a = ensemble_measures(branches, cut)
    return Step(
        label,
        branches[0].state,
        e_pf,
        e_f,
        e_a,
        branches=branches if len(branches) > 1 else (),
    )


def _single(s: StateVector) -> tuple[Branch, ...]:
    return (Branch(1.0, s),)


# --- tagger, untagger and taggant measurement ----------------------------------------

FIG1_CUT = PartitionSpec((0,), (1,), (2,))


def fig1_initial() -> StateVector:
    """Bell pair on AB with the taggant in |0>."""
    return bell_state(3, 0, 1)


def run_fig1a() -> ScenarioTrace:
    cut = FIG1_CUT
    s0 = fig1_initial()
    s1 = tagger(s0, controller=0, taggant=2)
    s2 = untagger(s1, controller=0, taggant=2)
    steps = (
        make_step("t=0 bell x |0>_T", _single(s0), cut),
        make_step("t=1 tagger", _single(s1), cut),
        make_step("t=2 untagger", _single(s2), cut),
    )
    return ScenarioTrace(steps, cut, "fig1a")


def run_fig1b(basis: BasisParams = BAR_BASIS) -> ScenarioTrace:
    cut = FIG1_CUT
    s0 = fig1_initial()
    s1 = tagger(s0, controller=0, taggant=2)
    spec = MeasurementSpec((2,), taggant_basis(basis))
    after = measure_branches(_single(s1), spec)
    steps = (
        make_step("t=0 bell x |0>_T", _single(s0), cut),
        make_step("t=1 tagger", _single(s1), cut),
        make_step(f"t=2 measure T theta={basis.theta:.6g} phi={basis.phi:.6g}", after, cut),
    )
    return ScenarioTrace(steps, cut, "fig1b")


# --- optical versions with polarizing beam splitters -----------------------------------


def singlet_state(n_qubits: int, s1: int, s2: int) -> StateVector:
    """(|hv> - |vh>)/sqrt2 on polarizations ``s1``, ``s2``; every other qubit |0>."""
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[1 << (n_qubits - 1 - s2)] = SQRT_HALF
    amps[1 << (n_qubits - 1 - s1)] = -SQRT_HALF
    return StateVector(amps)


def pbs(s: StateVector, spin: int, path: int) -> StateVector:
    """Polarizing beam splitter in h/v: c-NOT from polarization onto path."""
    return apply_gate(s, Gate.cnot(spin, path, label="pbs"))


def pbs_bar(s: StateVector, spin: int, path: int) -> StateVector:
    """PBS pair in hbar/vbar: c-NOT from polarization onto path in the rotated basis."""
    s = apply_gate(s, Gate.single(HV_TO_BAR.conj().T, spin, label="to-bar"))
    s = apply_gate(s, Gate.cnot(spin, path, label="pbs"))
    return apply_gate(s, Gate.single(HV_TO_BAR, spin, label="from-bar"))


FIG2A_CUT = PartitionSpec((FIG2A_ENCODING.s1,), (FIG2A_ENCODING.s2,), (FIG2A_ENCODING.p1,))
FIG2B_CUT = PartitionSpec(
    (FIG2B_ENCODING.s1,), (FIG2B_ENCODING.p1a, FIG2B_ENCODING.p1b), (FIG2B_ENCODING.s2,)
)


def run_fig2a() -> ScenarioTrace:
    enc, cut = FIG2A_ENCODING, FIG2A_CUT
    s0 = singlet_state(3, enc.s1, enc.s2)
    s1 = pbs(s0, enc.s1, enc.p1)
    s2 = pbs(s1, enc.s1, enc.p1)
    steps = (
        make_step("t=0 singlet x path 0", _single(s0), cut),
        make_step("t=1 pbs tags s1 with p1", _single(s1), cut),
        make_step("t=2 reverse pbs", _single(s2), cut),
    )
    return ScenarioTrace(steps, cut, "fig2a")


def fig2b_states() -> tuple[StateVector, StateVector, StateVector, StateVector]:
    """Register states at t=0..3 on (s1, p1a, p1b, s2)."""
    enc = FIG2B_ENCODING
    s0 = singlet_state(4, enc.s1, enc.s2)
    s1 = pbs(s0, enc.s1, enc.p1a)
    s2 = pbs_bar(s1, enc.s1, enc.p1b)
    s3 = pbs_bar(s2, enc.s1, enc.p1b)
    return s0, s1, s2, s3


def run_fig2b(meas: str = "hbar_vbar") -> ScenarioTrace:
    if meas not in MEAS_BASES:
        raise ValueError(f"unknown measurement {meas!r}; expected one of {sorted(MEAS_BASES)}")
    cut = FIG2B_CUT
    s0, s1, s2, s3 = fig2b_states()
    spec = MeasurementSpec((FIG2B_ENCODING.s2,), taggant_basis(MEAS_BASES[meas]))
    after = measure_branches(_single(s3), spec)
    steps = (
        make_step("t=0 singlet x path 0", _single(s0), cut),
        make_step("t=1 pbs h/v", _single(s1), cut),
        make_step("t=2 pbs pair hbar/vbar", _single(s2), cut),
        make_step("t=3 retag", _single(s3), cut),
        make_step(f"t=4 measure s2 {meas}", after, cut),
    )
    return ScenarioTrace(steps, cut, "fig2b")


def random_bases(n: int, rng: np.random.Generator) -> list[BasisParams]:
    """Single-qubit bases with cos^2(theta) and phi uniform."""
    c2 = rng.uniform(0.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    return [BasisParams(float(np.arccos(np.sqrt(c))), float(p)) for c, p in zip(c2, phi)]


def check_2x4_invariance(n_samples: int, seed: int) -> float:
    """Largest ``|E_p - 1|`` over random taggant bases for the fully entangled 2x4 state."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    state = fig2b_states()[2]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for params in random_bases(n_samples, rng):
        ep = entanglement_of_projection(state, FIG2B_CUT, taggant_basis(params)).value
        worst = max(worst, abs(ep - 1.0))
    return worst


def check_sandwich(n_states: int, n_bases: int, seed: int) -> float:
    """Largest violation of ``E_f <= E_p <= E_a`` over random 3-qubit states and bases."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        s = haar_state(3, rng)
        ef = entanglement_of_formation(s, FIG1_CUT).value
        ea = entanglement_of_assistance(s, FIG1_CUT).value
        for _ in range(n_bases):
            ep = entanglement_of_projection(
                s, FIG1_CUT, TaggantBasis(haar_unitary(2, rng))
            ).value
            worst = max(worst, ef - ep, ep - ea)
    return max(worst, 0.0)


SCENARIOS = ("fig1a", "fig1b", "fig2a", "fig2b")

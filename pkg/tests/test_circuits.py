import numpy as np
import pytest

from eraserlab.circuits import (
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
from eraserlab.measures import entanglement_pure
from eraserlab.state import (
    PartitionSpec,
    StateVector,
    bell_state,
    haar_state,
    haar_unitary,
    reduced_density,
    tensor,
)

S = 1 / np.sqrt(2)
HADAMARD = np.array([[S, S], [S, -S]])
GHZ = StateVector(np.array([1, 0, 0, 0, 0, 0, 0, 1]) * S)
BELL_SPECTATOR = bell_state(3, 0, 1)


def test_cnot_truth_table():
    out = apply_gate(StateVector.basis("10"), Gate.cnot(0, 1))
    assert out.allclose(StateVector.basis("11"))
    for bits, expected in [("00", "00"), ("01", "01"), ("11", "10")]:
        assert apply_gate(StateVector.basis(bits), Gate.cnot(0, 1)).allclose(StateVector.basis(expected))
    # control below target in the register
    assert apply_gate(StateVector.basis("01"), Gate.cnot(1, 0)).allclose(StateVector.basis("11"))


def test_cnot_involution_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        c, t = rng.choice(n, size=2, replace=False)
        s = haar_state(n, rng)
        g = Gate.cnot(int(c), int(t))
        assert apply_gate(apply_gate(s, g), g).allclose(s, atol=1e-12)


def test_hadamard_on_zero():
    out = apply_gate(StateVector.basis("0"), Gate.single(HADAMARD, 0))
    np.testing.assert_allclose(out.amplitudes, [S, S], atol=1e-15)


def test_single_qubit_gate_on_inner_qubit_matches_kron():
    rng = np.random.default_rng(1)
    s = haar_state(3, rng)
    u = haar_unitary(2, rng)
    out = apply_gate(s, Gate.single(u, 1))
    expected = np.kron(np.kron(np.eye(2), u), np.eye(2)) @ s.amplitudes
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-14)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate.cnot(1, 1)
    with pytest.raises(ValueError):
        Gate.single([[1, 1], [0, 1]], 0)
    with pytest.raises(IndexError):
        apply_gate(StateVector.basis("00"), Gate.cnot(0, 2))
    with pytest.raises(IndexError):
        apply_gate(StateVector.basis("00"), Gate.single(np.eye(2), 5))


def test_gates_preserve_norm():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        n = int(rng.integers(2, 6))
        s = haar_state(n, rng)
        if rng.random() < 0.5:
            c, t = rng.choice(n, size=2, replace=False)
            g = Gate.cnot(int(c), int(t))
        else:
            g = Gate.single(haar_unitary(2, rng), int(rng.integers(0, n)))
        assert abs(np.linalg.norm(apply_gate(s, g).amplitudes) - 1) < 1e-12


def test_tagger_makes_ghz():
    out = tagger(BELL_SPECTATOR, controller=0, taggant=2)
    expected = np.zeros(8)
    expected[0b000] = expected[0b111] = S
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


def test_tagger_control_zero_is_identity():
    s = StateVector.basis("000")
    assert tagger(s, 0, 2).allclose(s)


def test_untagger_restores_bell_pair():
    assert untagger(GHZ, 0, 2).allclose(BELL_SPECTATOR, atol=1e-12)
    assert tagger(GHZ, 0, 2).allclose(BELL_SPECTATOR, atol=1e-12)


def test_untagger_concentrates_entanglement():
    cut = PartitionSpec((0,), (1,), (2,))
    from eraserlab.measures import entanglement_pf

    assert abs(entanglement_pf(GHZ, cut).value) < 1e-9
    assert abs(entanglement_pf(untagger(GHZ, 0, 2), cut).value - 1) < 1e-9


def test_untagger_without_b():
    out = untagger(StateVector([S, 0, S, 0]), 0, 1)
    np.testing.assert_allclose(out.amplitudes, [S, 0, 0, S], atol=1e-15)


def test_tagger_involution_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        s = haar_state(3, rng)
        assert untagger(tagger(s, 1, 2), 1, 2).allclose(s, atol=1e-12)


def test_taggant_basis_examples():
    np.testing.assert_allclose(taggant_basis(BasisParams(0.0)).u, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(
        taggant_basis(BasisParams(np.pi / 4, 0.0)).u, [[S, S], [-S, S]], atol=1e-15
    )
    u = taggant_basis(BasisParams(np.pi / 4, np.pi / 2)).u
    np.testing.assert_allclose(u[0], [S, 1j * S], atol=1e-15)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_taggant_basis_rejects_non_unitary():
    with pytest.raises(ValueError):
        TaggantBasis(np.array([[1, 0], [1, 0]]))
    with pytest.raises(ValueError):
        TaggantBasis(np.eye(3))


def test_basis_params_canonical():
    p = BasisParams(-0.3, 1.0).canonical()
    assert 0 <= p.theta <= np.pi / 2 and 0 <= p.phi < 2 * np.pi
    # same projectors before and after canonicalization
    for a, b in zip(taggant_basis(BasisParams(-0.3, 1.0)).u, taggant_basis(p).u):
        np.testing.assert_allclose(np.outer(a, a.conj()), np.outer(b, b.conj()), atol=1e-12)
    assert BasisParams.from_a2(0.5).theta == pytest.approx(np.pi / 4)


def test_measure_ghz_computational():
    res = measure(GHZ, MeasurementSpec((2,), TaggantBasis.computational()))
    np.testing.assert_allclose(res.probabilities, [0.5, 0.5], atol=1e-15)
    assert res.outcomes[0].post_state.allclose(StateVector.basis("000"))
    assert res.outcomes[1].post_state.allclose(StateVector.basis("111"))


def test_measure_ghz_plus_minus():
    cut = PartitionSpec((0,), (1,), (2,))
    res = measure(GHZ, MeasurementSpec((2,), taggant_basis(BasisParams(np.pi / 4))))
    np.testing.assert_allclose(res.probabilities, [0.5, 0.5], atol=1e-15)
    signs = (1, -1)
    for o, sign in zip(res.outcomes, signs):
        ab = reduced_density(o.post_state, [0, 1])
        phi = np.array([S, 0, 0, sign * S])
        assert abs(np.vdot(phi, ab @ phi).real - 1) < 1e-12
        after = PartitionSpec((0,), (1, 2))
        assert abs(entanglement_pure(o.post_state, after).value - 1) < 1e-12
    assert cut.t_qubits == (2,)


def test_measure_product_single_outcome():
    s = tensor(StateVector([S, 0, 0, S]), StateVector.basis("0"))
    res = measure(s, MeasurementSpec((2,), TaggantBasis.computational()))
    assert [o.probability for o in res.outcomes] == [1.0, 0.0]
    assert res.outcomes[1].post_state is None
    assert len(res.outcomes) == 2
    assert len(res.nonzero()) == 1


def test_measure_spec_validation():
    with pytest.raises(ValueError):
        MeasurementSpec((2, 2), TaggantBasis.computational(4))
    with pytest.raises(ValueError):
        MeasurementSpec((2,), TaggantBasis.computational(4))
    with pytest.raises(IndexError):
        measure(GHZ, MeasurementSpec((5,), TaggantBasis.computational()))


def test_measure_properties_random():
    rng = np.random.default_rng(4)
    for _ in range(200):
        s = haar_state(4, rng)
        targets = (3,) if rng.random() < 0.5 else (1, 3)
        spec = MeasurementSpec(targets, TaggantBasis(haar_unitary(1 << len(targets), rng)))
        res = measure(s, spec)
        assert abs(res.probabilities.sum() - 1) < 1e-10
        for o in res.nonzero():
            assert abs(o.post_state.norm() - 1) < 1e-12
        # unread measurement leaves the unmeasured marginal unchanged
        keep = [q for q in range(4) if q not in targets]
        mixed = sum(o.probability * reduced_density(o.post_state, keep) for o in res.nonzero())
        assert np.max(np.abs(mixed - reduced_density(s, keep))) < 1e-10

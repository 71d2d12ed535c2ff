import numpy as np
import pytest

from eraserlab.circuits import apply_single
from eraserlab.linalg import jacobi_eigh
from eraserlab.state import (
    DensityMatrix,
    PartitionSpec,
    StateFileError,
    StateVector,
    amplitude_matrix,
    bell_state,
    density_matrix,
    eigensolve_hermitian,
    format_state,
    haar_state,
    haar_unitary,
    parse_state_text,
    partial_trace,
    read_state,
    schmidt_decompose,
    tensor,
    write_state,
)

S = 1 / np.sqrt(2)
BELL = StateVector([S, 0, 0, S])


def test_tensor_basis_states():
    s = tensor(StateVector.basis("0"), StateVector.basis("0"))
    np.testing.assert_array_equal(s.amplitudes, [1, 0, 0, 0])


def test_tensor_bell_with_taggant():
    s = tensor(BELL, StateVector.basis("0"))
    expected = np.zeros(8)
    expected[0b000] = expected[0b110] = S
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)


def test_tensor_distributes():
    s = tensor(StateVector([0.6, 0.8]), StateVector.basis("1"))
    np.testing.assert_allclose(s.amplitudes, [0, 0.6, 0, 0.8])


def test_state_vector_validation():
    with pytest.raises(ValueError):
        StateVector([1, 1])
    with pytest.raises(ValueError):
        StateVector([1, 0, 0])
    with pytest.raises(ValueError):
        StateVector(np.ones(512) / np.sqrt(512))
    s = StateVector([1, 1], normalize=True)
    assert abs(s.norm() - 1) < 1e-15
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_density_matrix_examples():
    np.testing.assert_array_equal(density_matrix(StateVector.basis("0")).entries, [[1, 0], [0, 0]])
    bell = density_matrix(BELL).entries
    expected = np.zeros((4, 4))
    for i in (0, 3):
        for j in (0, 3):
            expected[i, j] = 0.5
    np.testing.assert_allclose(bell, expected, atol=1e-15)
    plus_i = density_matrix(StateVector([S, 1j * S])).entries
    np.testing.assert_allclose(plus_i, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-15)


def test_density_matrix_rejects_invalid():
    with pytest.raises(ValueError):
        DensityMatrix([[1, 1], [0, 0]])
    with pytest.raises(ValueError):
        DensityMatrix([[0.5, 0], [0, 0.6]])
    with pytest.raises(ValueError):
        DensityMatrix([[1.5, 0], [0, -0.5]])


GHZ = StateVector(np.array([1, 0, 0, 0, 0, 0, 0, 1]) / np.sqrt(2))
CUT3 = PartitionSpec((0,), (1,), (2,))


def test_partial_trace_ghz_over_taggant():
    rho = partial_trace(density_matrix(GHZ), [0, 1], CUT3)
    np.testing.assert_allclose(rho.entries, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)


def test_partial_trace_bell_marginal():
    rho = partial_trace(density_matrix(BELL), [0], PartitionSpec((0,), (1,)))
    np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product():
    s = tensor(StateVector.basis("0"), StateVector([S, S]))
    rho = partial_trace(density_matrix(s), [0], PartitionSpec((0,), (1,)))
    np.testing.assert_allclose(rho.entries, [[1, 0], [0, 0]], atol=1e-15)


def test_partial_trace_keep_order():
    s = tensor(StateVector.basis("0"), StateVector.basis("1"))
    layout = PartitionSpec((0,), (1,))
    rho = partial_trace(density_matrix(s), [1, 0], layout)
    # |1>|0> in the kept order
    assert abs(rho.entries[2, 2] - 1) < 1e-15


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace(density_matrix(BELL), [0], CUT3)
    with pytest.raises(ValueError):
        partial_trace(density_matrix(GHZ), [0, 5], CUT3)


def test_partial_trace_property_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        s = haar_state(n, rng)
        layout = PartitionSpec(range(n))
        k = int(rng.integers(1, n))
        keep = list(rng.choice(n, size=k, replace=False))
        rho = partial_trace(density_matrix(s), keep, layout)
        m = rho.entries
        assert np.max(np.abs(m - m.conj().T)) <= 1e-12
        assert abs(rho.trace() - 1) < 1e-12
        w, _ = eigensolve_hermitian(rho)
        assert w.min() >= -1e-10


def test_partition_spec_invariants():
    with pytest.raises(ValueError):
        PartitionSpec((0,), (0,))
    with pytest.raises(ValueError):
        PartitionSpec((0,), (2,))
    assert PartitionSpec((2,), (0,), (1,)).n_qubits == 3


def test_eigensolve_examples():
    w, _ = eigensolve_hermitian(DensityMatrix(np.eye(2) / 2))
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-15)
    w, _ = eigensolve_hermitian(DensityMatrix(np.diag([0.5, 0, 0, 0.5])))
    np.testing.assert_allclose(w, [0.5, 0.5, 0, 0], atol=1e-15)
    # (1 +/- sqrt(0.5))/2, evaluated at 30 digits
    w, _ = eigensolve_hermitian(DensityMatrix([[0.75, 0.25], [0.25, 0.25]]))
    np.testing.assert_allclose(w, [0.853553390593273762, 0.146446609406726238], atol=1e-14)


def test_eigensolve_rejects_non_hermitian():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[0.5, 0.1], [0.0, 0.5]]))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 16])
def test_jacobi_matches_numpy(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = z + z.conj().T
        w, v = jacobi_eigh(m)
        np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(m), atol=1e-10)
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) < 1e-10
        assert np.max(np.abs(v.conj().T @ v - np.eye(n))) < 1e-10
        assert abs(w.sum() - np.trace(m).real) < 1e-10


def test_eigensolve_sum_equals_trace_random_states():
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = haar_state(4, rng)
        rho = partial_trace(density_matrix(s), [0, 2], PartitionSpec(range(4)))
        w, v = eigensolve_hermitian(rho)
        assert abs(w.sum() - rho.trace()) < 1e-10
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - rho.entries)) < 1e-10


def test_schmidt_examples():
    bip = PartitionSpec((0,), (1,))
    np.testing.assert_allclose(schmidt_decompose(BELL, bip).coefficients, [S, S], atol=1e-12)
    np.testing.assert_allclose(
        schmidt_decompose(StateVector.basis("01"), bip).coefficients, [1, 0], atol=1e-12
    )
    s = StateVector([np.sqrt(0.75), 0, 0, np.sqrt(0.25)])
    np.testing.assert_allclose(
        schmidt_decompose(s, bip).coefficients, [np.sqrt(0.75), np.sqrt(0.25)], atol=1e-12
    )


def test_schmidt_errors():
    with pytest.raises(ValueError):
        schmidt_decompose(GHZ, CUT3)
    with pytest.raises(ValueError):
        schmidt_decompose(BELL, PartitionSpec((0, 1)))


@pytest.mark.parametrize("a_side", [(0,), (1, 3), (0, 1, 2), (2,)])
def test_schmidt_reconstruction_and_orthonormality(a_side):
    rng = np.random.default_rng(len(a_side))
    cut = PartitionSpec(a_side, tuple(q for q in range(4) if q not in a_side))
    for k in range(50):
        s = haar_state(4, rng) if k % 5 else StateVector.basis("0110")
        dec = schmidt_decompose(s, cut)
        c = dec.coefficients
        assert abs(np.sum(c**2) - 1) < 1e-10
        assert np.all(np.diff(c) <= 1e-15)
        for vecs in (dec.left_vectors, dec.right_vectors):
            assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(vecs.shape[1]))) < 1e-10
        target = amplitude_matrix(s, cut.a_qubits, cut.b_qubits)
        assert np.max(np.abs(dec.reconstruct() - target)) < 1e-10
        rho_a = partial_trace(density_matrix(s), cut.a_qubits, cut)
        rho_b = partial_trace(density_matrix(s), cut.b_qubits, cut)
        small = rho_a if rho_a.dim <= rho_b.dim else rho_b
        np.testing.assert_allclose(c**2, eigensolve_hermitian(small)[0], atol=1e-10)


def test_unitary_preserves_norm():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        s = haar_state(n, rng)
        out = apply_single(s, haar_unitary(2, rng), int(rng.integers(0, n)))
        raw = np.linalg.norm(out.amplitudes)
        assert abs(raw - 1) < 1e-12


def test_bell_state_helper():
    s = bell_state(3, 0, 1)
    assert s.allclose(tensor(BELL, StateVector.basis("0")))


# --- state file -----------------------------------------------------------------


def test_state_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = haar_state(3, rng)
    path = tmp_path / "psi.state"
    write_state(s, path)
    back = read_state(path)
    assert back.allclose(s, atol=0)


def test_state_file_format_text():
    text = format_state(StateVector([0.6, 0.8j]))
    assert text.splitlines()[0] == "qubits 1"
    assert len(text.splitlines()) == 3


@pytest.mark.parametrize(
    "text",
    [
        "",
        "qubit 1\n1 0\n0 0\n",
        "qubits 1\n1 0\n",
        "qubits 1\n1 0\n0 0\n0 0\n",
        "qubits 1\n1 0\n0.1 0\n",
        "qubits 1\n1 0\n0 x\n",
        "qubits 1\n1\n0 0\n",
        "qubits 9\n",
        "qubits 1\nnan 0\n0 0\n",
    ],
)
def test_state_file_rejects(text):
    with pytest.raises(StateFileError):
        parse_state_text(text)


def test_state_file_tolerates_small_norm_error():
    s = parse_state_text("qubits 1\n1.0000001 0\n0 0\n")
    assert abs(s.norm() - 1) < 1e-15

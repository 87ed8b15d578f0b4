import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeflate.errors import ContractError, DimensionError, DomainError
from qdeflate.linalg import basis_state, eigh, eigvalsh, expectation, fidelity, rel_energy_error
from qdeflate.pauli import PauliHamiltonian, PauliString, cz_group, hamiltonian_matrix


def random_hermitian(dim, rng, real=False):
    a = rng.normal(size=(dim, dim))
    if not real:
        a = a + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def check_spectrum(a, spec, tol=1e-8):
    w, v = spec.eigenvalues, spec.eigenvectors
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v.conj().T @ v - np.eye(len(w)))) <= tol
    norm = np.linalg.norm(a, 2)
    for k in range(len(w)):
        assert np.linalg.norm(a @ v[:, k] - w[k] * v[:, k]) <= tol * max(1.0, norm)


def test_diag_embedded_sorted():
    spec = eigh(np.diag([3.0, -1.0, 2.0, 0.0]))
    np.testing.assert_allclose(spec.eigenvalues, [-1, 0, 2, 3], atol=1e-14)


def test_pauli_x_eigenpairs():
    spec = eigh([[0, 1], [1, 0]])
    np.testing.assert_allclose(spec.eigenvalues, [-1, 1], atol=1e-14)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(spec.vector(0), [s, -s], atol=1e-12)
    np.testing.assert_allclose(spec.vector(1), [s, s], atol=1e-12)


@pytest.mark.parametrize("method", ["jacobi", "householder"])
def test_random_16_reconstruction(method):
    a = random_hermitian(16, np.random.default_rng(0))
    spec = eigh(a, method=method)
    recon = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.conj().T
    assert np.max(np.abs(a - recon)) <= 1e-9 * max(1.0, np.max(np.abs(a)))
    check_spectrum(a, spec)


@pytest.mark.parametrize("dim", [1, 2, 3, 5, 8, 33, 128])
@pytest.mark.parametrize("real", [False, True])
def test_reconstruction_and_oracle(dim, real):
    a = random_hermitian(dim, np.random.default_rng(dim), real=real)
    spec = eigh(a)
    recon = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.conj().T
    assert np.max(np.abs(a - recon)) <= 1e-9 * max(1.0, np.max(np.abs(a)))
    check_spectrum(a, spec)
    # independent oracle for the eigenvalues
    np.testing.assert_allclose(spec.eigenvalues, np.linalg.eigvalsh(a), atol=1e-10)


@pytest.mark.parametrize("dim", [64, 128])
def test_jacobi_and_householder_agree(dim):
    a = random_hermitian(dim, np.random.default_rng(100 + dim))
    j, h = eigh(a, method="jacobi"), eigh(a, method="householder")
    np.testing.assert_allclose(j.eigenvalues, h.eigenvalues, atol=1e-10)
    # canonical phases make nondegenerate vectors directly comparable
    np.testing.assert_allclose(j.eigenvectors, h.eigenvectors, atol=1e-8)
    check_spectrum(a, h)


def test_householder_above_jacobi_limit():
    a = random_hermitian(520, np.random.default_rng(3), real=True)
    spec = eigh(a)
    np.testing.assert_allclose(spec.eigenvalues, np.linalg.eigvalsh(a), atol=1e-9)


def test_degenerate_cluster_is_canonical():
    # rotate a degenerate pair by a random unitary: the reported basis must not depend on it
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    a = q @ np.diag([-1.0, -1.0, 2.0, 3.0]) @ q.conj().T
    s1 = eigh(a, method="jacobi")
    s2 = eigh(a, method="householder")
    np.testing.assert_allclose(s1.eigenvectors[:, :2], s2.eigenvectors[:, :2], atol=1e-8)
    check_spectrum(a, s1)


def test_cz_hamiltonian_eigenvalues_are_sorted_diagonal():
    rng = np.random.default_rng(2)
    h = PauliHamiltonian(zip(rng.uniform(-1, 1, 8), cz_group(3)))
    m = hamiltonian_matrix(h)
    np.testing.assert_allclose(eigvalsh(m), np.sort(np.diag(m).real), atol=1e-14)


def test_rejects_bad_matrices():
    with pytest.raises(DimensionError):
        eigh(np.zeros((2, 3)))
    with pytest.raises(ContractError):
        eigh([[0, 1], [0, 0]])
    with pytest.raises(DomainError):
        eigh(np.eye(2), method="qr")


def test_expectation_examples():
    assert expectation(basis_state(0, 2), "ZI") == 1.0
    bell = (basis_state(0, 2) + basis_state(3, 2)) / np.sqrt(2)
    assert expectation(bell, "XX") == pytest.approx(1.0)
    assert expectation(bell, "ZI") == pytest.approx(0.0)


def test_expectation_identity_is_norm_squared():
    psi = np.array([1.0, 2.0, 0.5j, 0.0])
    assert expectation(psi, PauliString("II")) == pytest.approx(np.vdot(psi, psi).real)


def test_expectation_dimension_mismatch():
    with pytest.raises(DimensionError):
        expectation(basis_state(0, 2), "Z")


def test_fidelity_examples():
    a = np.array([0.6, 0.8j])
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(basis_state(0, 1), basis_state(1, 1)) == 0.0
    assert fidelity(a, np.exp(0.7j) * a) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        fidelity(a, np.zeros(2))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.integers(0, 2**31))
def test_fidelity_phase_invariance(theta, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    b = rng.normal(size=4) + 1j * rng.normal(size=4)
    f = fidelity(a, b)
    assert 0.0 <= f <= 1.0
    assert fidelity(np.exp(1j * theta) * a, b) == pytest.approx(f, abs=1e-12)
    assert fidelity(a, np.exp(1j * theta) * b) == pytest.approx(f, abs=1e-12)


def test_rel_energy_error_examples():
    assert rel_energy_error(1.1, 1.0) == pytest.approx(0.1)
    assert rel_energy_error(-2.0, -2.0) == 0.0
    # |0 - (-0.5)| / |-0.5|
    assert rel_energy_error(0.0, -0.5) == 1.0
    with pytest.raises(DomainError):
        rel_energy_error(1.0, 0.0)

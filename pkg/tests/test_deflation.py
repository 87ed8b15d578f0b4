import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeflate.deflation import (
    COVARIANCE,
    EXACT,
    RankOneProjector,
    ShiftSweep,
    StabilizerProjector,
    covariance_update,
    cz_covariance_identity_check,
    deflate,
    f_coefficients,
    measure_terms,
    optimize_identity_shift,
    pauli_expand_projector,
    project_out,
    stabilizer_projector,
)
from qdeflate.errors import CapacityError, ContractError, DimensionError, DomainError
from qdeflate.linalg import basis_state, eigh, fidelity
from qdeflate.noise import NoiseSpec
from qdeflate.pauli import PauliHamiltonian, PauliString, all_strings, cz_group, hamiltonian_matrix, to_matrix

H2_LABELS = ("II", "ZI", "IZ", "ZZ", "XX", "YY")


def diag_hamiltonian(values):
    """C_z Hamiltonian whose matrix is diag(values)."""
    n = int(np.log2(len(values)))
    strings = cz_group(n)
    coeffs = [np.mean(values * np.real(np.diag(to_matrix(s)))) for s in strings]
    return PauliHamiltonian(zip(coeffs, strings))


def h2_form(rng):
    return PauliHamiltonian(zip(rng.uniform(-1, 1, 6), H2_LABELS))


def replace_one(values, target):
    values = list(values)
    k = int(np.argmin(np.abs(np.asarray(values) - target)))
    values[k] = 0.0
    return np.sort(values)


# --- projectors ---------------------------------------------------------------


def test_project_out_diagonal():
    h = diag_hamiltonian(np.array([-2.0, 1.0, 3.0, 5.0]))
    m = project_out(h, basis_state(0, 2), -2.0)
    np.testing.assert_allclose(np.linalg.eigvalsh(m), [0, 1, 3, 5], atol=1e-12)


def test_project_out_degenerate_gives_partner():
    h = diag_hamiltonian(np.array([-2.0, -2.0, 1.0, 1.0]))
    m = project_out(h, basis_state(0, 2), -2.0)
    spec = eigh(m)
    np.testing.assert_allclose(spec.eigenvalues, [-2, 0, 1, 1], atol=1e-12)
    assert fidelity(spec.ground_state, basis_state(1, 2)) == pytest.approx(1.0)


def test_project_out_h2_form_random():
    rng = np.random.default_rng(11)
    for _ in range(10):
        h = h2_form(rng)
        spec = eigh(hamiltonian_matrix(h))
        out = np.linalg.eigvalsh(project_out(h, spec.ground_state, spec.ground_energy))
        np.testing.assert_allclose(out, replace_one(spec.eigenvalues, spec.ground_energy), atol=1e-9)


def test_project_out_strict_rejects_wrong_pair():
    h = diag_hamiltonian(np.array([-2.0, 1.0, 3.0, 5.0]))
    with pytest.raises(ContractError):
        project_out(h, basis_state(1, 2), -2.0)
    with pytest.raises(ContractError):
        project_out(h, 2 * basis_state(0, 2), -2.0)
    project_out(h, basis_state(1, 2), -2.0, strict=False)
    with pytest.raises(DimensionError):
        project_out(h, basis_state(0, 1), -2.0)


def test_rank_one_projector():
    rng = np.random.default_rng(4)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    p = RankOneProjector(psi / np.linalg.norm(psi)).matrix()
    assert np.max(np.abs(p @ p - p)) <= 1e-10
    assert np.trace(p).real == pytest.approx(1.0)
    with pytest.raises(ContractError):
        RankOneProjector(psi)


def test_pauli_expansion_examples():
    zero = dict((s.label, f) for f, s in pauli_expand_projector(RankOneProjector(basis_state(0, 1))))
    assert zero == pytest.approx({"I": 0.5, "X": 0.0, "Y": 0.0, "Z": 0.5})
    plus = np.array([1, 1]) / np.sqrt(2)
    plus_terms = dict((s.label, f) for f, s in pauli_expand_projector(RankOneProjector(plus)))
    assert plus_terms == pytest.approx({"I": 0.5, "X": 0.5, "Y": 0.0, "Z": 0.0})


def test_pauli_expansion_reconstructs_random_state():
    rng = np.random.default_rng(9)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    p = RankOneProjector(psi / np.linalg.norm(psi))
    recon = sum(f * to_matrix(s) for f, s in pauli_expand_projector(p))
    np.testing.assert_allclose(recon, p.matrix(), atol=1e-12)


def test_pauli_expansion_cap():
    with pytest.raises(CapacityError):
        pauli_expand_projector(RankOneProjector(basis_state(0, 7)))


def test_stabilizer_projector_examples():
    p = stabilizer_projector([PauliString("ZI"), PauliString("IZ")], (0, 0))
    np.testing.assert_allclose(p, np.outer(basis_state(3, 2), basis_state(3, 2)), atol=1e-14)
    p = stabilizer_projector([PauliString("ZI")], (0,))
    np.testing.assert_allclose(p, np.diag([0, 0, 1, 1]), atol=1e-14)


def test_stabilizer_full_set_equals_rank_one():
    gens = [PauliString(s) for s in ("ZII", "IZI", "IIZ")]
    for bits in np.ndindex(2, 2, 2):
        p = stabilizer_projector(gens, bits)
        # s_q = 0 keeps Z_q = -1, i.e. the bit is 1
        k = int("".join(str(1 - b) for b in bits), 2)
        np.testing.assert_allclose(p, RankOneProjector(basis_state(k, 3)).matrix(), atol=1e-14)


def test_stabilizer_invariants():
    proj = StabilizerProjector((PauliString("XX"), PauliString("ZZ")), (1, 0))
    p = proj.matrix()
    assert np.max(np.abs(p @ p - p)) <= 1e-10
    assert np.trace(p).real == pytest.approx(proj.rank) == 1
    with pytest.raises(DomainError):
        StabilizerProjector((PauliString("XI"), PauliString("ZI")), (0, 0))  # anticommute
    with pytest.raises(DomainError):
        StabilizerProjector((PauliString("ZI"), PauliString("IZ"), PauliString("ZZ")), (0, 0, 0))
    with pytest.raises(DomainError):
        StabilizerProjector((PauliString("ZI"),), (-1,))


# --- f-coefficients and covariance ---------------------------------------------


def test_measure_terms_examples():
    h = PauliHamiltonian([(1.0, s) for s in ("II", "ZI", "IZ", "ZZ")])
    np.testing.assert_allclose(measure_terms(h, basis_state(0, 2)), [1, 1, 1, 1])
    np.testing.assert_allclose(f_coefficients(h, basis_state(0, 2)), [0.25] * 4)
    psi = (basis_state(1, 2) + basis_state(2, 2)) / np.sqrt(2)
    assert measure_terms(PauliHamiltonian([(1.0, "XX")]), psi)[0] == pytest.approx(1.0)


def test_imaginary_strings_vanish_on_real_ground_states():
    rng = np.random.default_rng(3)
    for _ in range(5):
        h = h2_form(rng)
        g = eigh(hamiltonian_matrix(h)).ground_state
        extended = PauliHamiltonian([*h.terms, (0.0, "XY"), (0.0, "YX")])
        f = f_coefficients(extended, g)
        assert abs(f[-1]) <= 1e-12 and abs(f[-2]) <= 1e-12


def test_covariance_update_examples():
    h = PauliHamiltonian([(1.0, "Z"), (0.5, "X")])
    out = covariance_update(h, -2.0, [1.0, -1.0])
    np.testing.assert_allclose(out.coeffs, [3.0, -1.5])
    assert out.strings == h.strings
    assert covariance_update(h, 0.0, [0.3, 0.7]) == h
    assert covariance_update(h, -2.0, [0.0, 0.0]) == h
    with pytest.raises(DimensionError):
        covariance_update(h, -2.0, [1.0])


def test_covariance_update_matches_projected_matrix_when_expansion_closes():
    # Tr-normalized f makes the update equal to H - E P whenever P lives on the term set
    h = diag_hamiltonian(np.array([-3.0, 1.0, 0.5, 2.0]))
    g = basis_state(0, 2)
    updated = covariance_update(h, -3.0, f_coefficients(h, g))
    np.testing.assert_allclose(hamiltonian_matrix(updated), project_out(h, g, -3.0), atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cz_identity_check(n):
    rng = np.random.default_rng(n)
    for _ in range(30 if n == 4 else 5):
        h = PauliHamiltonian(zip(rng.uniform(-1, 1, 2**n), cz_group(n)))
        g = eigh(hamiltonian_matrix(h)).ground_state
        assert cz_covariance_identity_check(h, g) <= 1e-10


def test_cz_identity_check_identity_only():
    # dyadic coefficient: every step is exact in binary floating point
    h = PauliHamiltonian([(1.5 if s.is_identity() else 0.0, s) for s in cz_group(3)])
    assert cz_covariance_identity_check(h, basis_state(5, 3)) == 0.0
    h = PauliHamiltonian([(1.7 if s.is_identity() else 0.0, s) for s in cz_group(3)])
    assert cz_covariance_identity_check(h, basis_state(5, 3)) <= 1e-15


def test_cz_identity_check_preconditions():
    with pytest.raises(ContractError):
        cz_covariance_identity_check(PauliHamiltonian([(1.0, "ZI")]), basis_state(0, 2))
    h = PauliHamiltonian(zip([1, 2, 3, 4], cz_group(2)))
    with pytest.raises(ContractError):
        cz_covariance_identity_check(h, np.ones(4) / 2)


# --- deflate ---------------------------------------------------------------------


def test_deflate_exact_diag_example():
    h = diag_hamiltonian(np.array([-3.0, -1.0, 2.0, 4.0]))
    recs = deflate(h, 3, mode=EXACT, shift=-5.0)
    assert len(recs) == 4
    np.testing.assert_allclose([r.energy for r in recs], [-3, -1, 2, 4], atol=1e-12)
    assert all(r.shift == -5.0 for r in recs)


def test_deflate_exact_random_auto_shift():
    rng = np.random.default_rng(21)
    pool = all_strings(3)
    for _ in range(5):
        idx = rng.choice(len(pool), size=10, replace=False)
        h = PauliHamiltonian((rng.uniform(-1, 1), pool[i]) for i in idx)
        oracle = eigh(hamiltonian_matrix(h))
        recs = deflate(h, 3, mode=EXACT, reference=oracle)
        np.testing.assert_allclose([r.energy for r in recs], oracle.eigenvalues[:4], atol=1e-8)


def test_deflate_noise_zero_is_identical():
    rng = np.random.default_rng(2)
    h = h2_form(rng)
    for mode in (COVARIANCE, EXACT):
        a = deflate(h, 2, mode=mode)
        b = deflate(h, 2, mode=mode, noise=NoiseSpec(0.0, seed=99))
        for ra, rb in zip(a, b):
            assert ra.ground_energy == rb.ground_energy
            np.testing.assert_array_equal(ra.ground_state, rb.ground_state)
            np.testing.assert_array_equal(ra.f_coeffs, rb.f_coeffs)


def test_deflate_h2_covariance_closure():
    rng = np.random.default_rng(8)
    for _ in range(20):
        h = h2_form(rng)
        oracle = eigh(hamiltonian_matrix(h))
        recs = deflate(h, 3, mode=COVARIANCE)
        np.testing.assert_allclose([r.energy for r in recs], oracle.eigenvalues, atol=1e-8)


def test_record_fields_and_json():
    h = h2_form(np.random.default_rng(1))
    oracle = eigh(hamiltonian_matrix(h))
    recs = deflate(h, 1, mode=COVARIANCE, shift=-1.5, reference=oracle)
    r0, r1 = recs
    np.testing.assert_allclose(r0.lambda_next, r0.coeffs - r0.ground_energy * r0.f_coeffs)
    np.testing.assert_allclose(r1.coeffs, r0.lambda_next)
    assert r0.energy == pytest.approx(r0.ground_energy + 1.5)
    line = json.loads(json.dumps(r1.to_json()))
    assert {"iteration", "mode", "ground_energy", "f_coeffs", "lambda_next", "fidelity_vs_oracle", "gap_warning"} <= set(line)
    assert line["fidelity_vs_oracle"] == pytest.approx(1.0)


def test_deflate_degenerate_warning_and_partner():
    h = diag_hamiltonian(np.array([-2.0, -2.0, 1.0, 3.0]))
    recs = deflate(h, 1, mode=EXACT)
    assert recs[0].gap_warning
    assert abs(np.vdot(recs[0].ground_state, recs[1].ground_state)) <= 1e-8
    assert recs[1].energy == pytest.approx(recs[0].energy, abs=1e-9)


def test_deflate_argument_errors():
    h = PauliHamiltonian([(1.0, "Z")])
    with pytest.raises(DomainError):
        deflate(h, 0)
    with pytest.raises(DomainError):
        deflate(h, 1, mode="magic")
    with pytest.raises(CapacityError):
        deflate(PauliHamiltonian([(1.0, "Z" * 5)]), 1, cap=4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3))
def test_spectrum_preservation_property(seed, n):
    rng = np.random.default_rng(seed)
    pool = all_strings(n)
    idx = rng.choice(len(pool), size=int(rng.integers(4, min(16, len(pool)) + 1)), replace=False)
    h = PauliHamiltonian((rng.uniform(-1, 1), pool[i]) for i in idx)
    spec = eigh(hamiltonian_matrix(h))
    out = np.linalg.eigvalsh(project_out(h, spec.ground_state, spec.ground_energy))
    np.testing.assert_allclose(out, replace_one(spec.eigenvalues, spec.ground_energy), atol=1e-9)


# --- identity shift sweep ----------------------------------------------------------


def test_default_sweep_has_101_candidates():
    grid = ShiftSweep().grid()
    assert grid.size == 101 and grid[0] == -10.0 and grid[-1] == 10.0 and 0.0 in grid
    with pytest.raises(DomainError):
        ShiftSweep(1.0, -1.0, 0.2).grid()


def test_sweep_negative_spectrum_keeps_zero_shift():
    h = diag_hamiltonian(np.array([-4.0, -3.0, -2.0, -1.0]))
    scan = optimize_identity_shift(h, 1)
    assert scan.best_shift == 0.0 and scan.feasible and scan.first_failure is None


def test_sweep_diag_1_2():
    h = PauliHamiltonian([(1.5, "I"), (-0.5, "Z")])
    # unshifted: the projected-out level sits at 0, below E1 = 2
    recs = deflate(h, 1, mode=EXACT, shift=0.0, strict=True)
    assert recs[1].energy == pytest.approx(0.0)
    scan = optimize_identity_shift(h, 1, exhaustive=True)
    assert scan.feasible and scan.best_shift < -2.0
    for cand in scan.candidates:
        if cand.shift < -2.0:
            assert cand.passed == 1
            assert cand.energies[1] == pytest.approx(2.0, abs=1e-9)
    recs = deflate(h, 1, mode=COVARIANCE, shift=scan.best_shift)
    assert recs[1].energy == pytest.approx(2.0, abs=1e-9)


def test_sweep_reports_infeasible():
    h = PauliHamiltonian([(50.0, "I"), (-0.5, "Z")])
    scan = optimize_identity_shift(h, 1, ShiftSweep(-1.0, 1.0, 0.5))
    assert not scan.feasible and scan.first_failure == 1
    assert scan.augmented is False

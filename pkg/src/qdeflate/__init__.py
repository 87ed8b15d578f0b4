"""Excited states of Pauli-string Hamiltonians by iterative ground-state deflation."""

from .deflation import (
    COVARIANCE,
    EXACT,
    IterationRecord,
    RankOneProjector,
    ShiftScan,
    ShiftSweep,
    StabilizerProjector,
    auto_shift,
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
from .errors import (
    CapacityError,
    ContractError,
    ConvergenceError,
    DimensionError,
    DomainError,
    ParseError,
    QDeflateError,
)
from .linalg import Spectrum, eigh, eigvalsh, expectation, fidelity, rel_energy_error
from .models import (
    PerturbedCzSpec,
    h2_hamiltonian,
    load_coefficient_table,
    load_hamiltonian_file,
    perturbed_cz,
)
from .noise import NoiseSpec, corrupt
from .pauli import (
    PauliHamiltonian,
    PauliString,
    PhasedString,
    commutes,
    cz_group,
    hamiltonian_matrix,
    multiply,
    to_matrix,
)

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]

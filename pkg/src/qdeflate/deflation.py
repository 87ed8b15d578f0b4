"""Ground-state out-projection and the covariance-asserted effective Hamiltonian.

Two ways of turning the Hamiltonian of one iteration into the next:

* ``exact-projector``: keep a dense matrix and subtract ``E_g |G><G|``; the
  spectrum is preserved with ``E_g`` replaced by 0.
* ``covariance``: keep the string set fixed and renormalize the coefficients,
  ``lambda_j -> lambda_j - E_g f_j`` where ``f_j`` is the coefficient of
  ``h_j`` in the Pauli expansion of the projector, ``<G|h_j|G> / 2**N``.

Energies are only meaningful as excited-state estimates when the level being
sought is negative in the working frame, so both modes take an additive
identity shift that is removed again at readout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, ContractError, DimensionError, DomainError
from .linalg import (
    DEGENERACY_TOL,
    Spectrum,
    as_hermitian,
    as_state,
    eigh,
    expectation,
    fidelity,
)
from .noise import NoiseSpec, corrupt
from .pauli import (
    DENSE_QUBIT_CAP,
    PauliHamiltonian,
    PauliString,
    all_strings,
    basis_action,
    commutes,
    cz_group,
    hamiltonian_matrix,
    to_matrix,
)

log = logging.getLogger(__name__)

EXACT = "exact-projector"
COVARIANCE = "covariance"
MODES = (EXACT, COVARIANCE)

STRICT_RESIDUAL_TOL = 1e-6
EXPANSION_QUBIT_CAP = 6


def _check_mode(mode: str) -> str:
    aliases = {"exact": EXACT, EXACT: EXACT, COVARIANCE: COVARIANCE, "cov": COVARIANCE}
    try:
        return aliases[mode]
    except KeyError:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}") from None


# --- projectors -------------------------------------------------------------


@dataclass(frozen=True)
class RankOneProjector:
    """``|psi><psi|`` for a normalized state."""

    state: np.ndarray

    def __post_init__(self):
        psi = as_state(self.state)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-10:
            raise ContractError(f"rank-one projector needs a normalized state (norm {norm})")
        object.__setattr__(self, "state", psi)

    @property
    def n_qubits(self) -> int:
        return self.state.size.bit_length() - 1

    def matrix(self) -> np.ndarray:
        return np.outer(self.state, self.state.conj())


@dataclass(frozen=True)
class StabilizerProjector:
    """``prod_g (I - (-1)**s_g h_g) / 2`` over commuting, independent generators.

    With ``s_g = 0`` the factor keeps the ``-1`` eigenspace of ``h_g``.
    """

    generators: tuple[PauliString, ...]
    bits: tuple[int, ...]

    def __post_init__(self):
        gens = tuple(g if isinstance(g, PauliString) else PauliString(g) for g in self.generators)
        bits = tuple(int(b) for b in self.bits)
        if not gens:
            raise DomainError("need at least one generator")
        if len(bits) != len(gens):
            raise DimensionError(f"{len(bits)} sign bits for {len(gens)} generators")
        if any(b not in (0, 1) for b in bits):
            raise DomainError(f"sign bits must be 0 or 1, got {bits}")
        n = gens[0].n_qubits
        if any(g.n_qubits != n for g in gens):
            raise DimensionError("generators have mixed lengths")
        for i, a in enumerate(gens):
            for b in gens[i + 1 :]:
                if not commutes(a, b):
                    raise DomainError(f"generators {a} and {b} do not commute")
        if not _independent(gens):
            raise DomainError("generators are not independent")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "bits", bits)

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    @property
    def rank(self) -> int:
        return 2 ** (self.n_qubits - len(self.generators))

    def matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        p = np.eye(dim, dtype=complex)
        for g, s in zip(self.generators, self.bits):
            p = p @ (0.5 * (np.eye(dim) - (-1) ** s * to_matrix(g)))
        return p


def _independent(gens: Sequence[PauliString]) -> bool:
    """GF(2) independence of the symplectic vectors (x | z)."""
    n = gens[0].n_qubits
    basis: dict[int, int] = {}
    for g in gens:
        vec = (g.x << n) | g.z
        while vec:
            top = vec.bit_length() - 1
            if top not in basis:
                basis[top] = vec
                break
            vec ^= basis[top]
        else:
            return False
    return True


def stabilizer_projector(generators, signs) -> np.ndarray:
    """Dense matrix of the stabilizer projector; ``signs`` are bits in {0, 1}."""
    return StabilizerProjector(tuple(generators), tuple(signs)).matrix()


def projector_matrix(p) -> np.ndarray:
    if isinstance(p, (RankOneProjector, StabilizerProjector)):
        return p.matrix()
    return as_hermitian(p)


def pauli_expand_projector(p, cap: int = EXPANSION_QUBIT_CAP) -> list[tuple[float, PauliString]]:
    """All ``4**N`` coefficients ``f_p = Tr[P S_p] / 2**N``, so ``P = sum f_p S_p``."""
    m = projector_matrix(p)
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if n > cap:
        raise CapacityError(f"Pauli expansion over {n} qubits exceeds the cap of {cap}")
    out = []
    rows = np.arange(dim)
    for s in all_strings(n):
        targets, phases = basis_action(s)
        # S[t(b), b] = phase(b), so Tr[M S] = sum_b M[b, t(b)] phase(b)
        value = np.sum(m[rows, targets] * phases) / dim
        if abs(value.imag) > 1e-10:
            raise ContractError(f"coefficient of {s} is not real ({value})")
        out.append((float(value.real), s))
    return out


# --- f-coefficients and the covariance update ------------------------------


def measure_terms(h: PauliHamiltonian, state) -> np.ndarray:
    """``<psi|h_j|psi>`` for every term, i.e. what a device would measure.

    The state is not renormalized.
    """
    psi = as_state(state, h.n_qubits)
    return np.array([expectation(psi, s) for s in h.strings])


def f_coefficients(h: PauliHamiltonian, state) -> np.ndarray:
    """Projector expansion coefficients restricted to the Hamiltonian's strings."""
    return measure_terms(h, state) / float(1 << h.n_qubits)


def covariance_update(h: PauliHamiltonian, ground_energy: float, f_coeffs) -> PauliHamiltonian:
    """Same strings, coefficients ``lambda_j - E_g f_j``."""
    f = np.asarray(f_coeffs, dtype=float)
    if f.shape != (len(h),):
        raise DimensionError(f"{f.size} f-coefficients for {len(h)} terms")
    return h.with_coeffs(h.coeffs - ground_energy * f)


# --- exact out-projection ----------------------------------------------------


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, PauliHamiltonian):
        return hamiltonian_matrix(h)
    return as_hermitian(h)


def project_out(h, ground, ground_energy: float, strict: bool = True) -> np.ndarray:
    """``H - E_g |G><G|`` as a dense matrix.

    In strict mode ``ground`` must be normalized and an eigenvector of ``H``
    with eigenvalue ``ground_energy`` (residual <= 1e-6).
    """
    m = _as_matrix(h)
    g = as_state(ground)
    if g.size != m.shape[0]:
        raise DimensionError(f"state of length {g.size} for a {m.shape[0]}-dim matrix")
    if strict:
        norm = np.linalg.norm(g)
        if abs(norm - 1.0) > 1e-10:
            raise ContractError(f"ground state is not normalized (norm {norm})")
        hg = m @ g
        rayleigh = float(np.vdot(g, hg).real)
        residual = float(np.linalg.norm(hg - ground_energy * g))
        if abs(rayleigh - ground_energy) > STRICT_RESIDUAL_TOL or residual > STRICT_RESIDUAL_TOL:
            raise ContractError(
                f"state is not an eigenvector with energy {ground_energy!r} "
                f"(Rayleigh quotient {rayleigh!r}, residual {residual:.3e})"
            )
    return m - ground_energy * np.outer(g, g.conj())


def cz_covariance_identity_check(h: PauliHamiltonian, ground) -> float:
    """Max-entry gap between the covariance-updated Hamiltonian and the exact
    out-projection, for a Hamiltonian over all of C_z and a basis ground state.

    The exact side is built from the stabilizer form of the projector, with
    generators ``Z_1 ... Z_N`` and sign bits read off the basis state.
    """
    n = h.n_qubits
    if set(h.strings) != set(cz_group(n)):
        raise ContractError("Hamiltonian strings must be exactly the C_z group")
    g = as_state(ground, n)
    k = int(np.argmax(np.abs(g)))
    if abs(abs(g[k]) - 1.0) > 1e-8 or np.linalg.norm(g) - abs(g[k]) > 1e-8:
        raise ContractError("ground state is not a computational basis state")
    g = g / np.linalg.norm(g)
    m = hamiltonian_matrix(h)
    energy = float(np.vdot(g, m @ g).real)

    updated = covariance_update(h, energy, f_coefficients(h, g))
    # Z_q has eigenvalue (-1)**b_q on |k>; the factor keeps eigenvalue -(-1)**s_q, so s_q = 1 - b_q
    gens = [PauliString.from_bits(n, 0, 1 << (n - 1 - q)) for q in range(n)]
    bits = [1 - ((k >> (n - 1 - q)) & 1) for q in range(n)]
    exact = m - energy * stabilizer_projector(gens, bits)
    return float(np.max(np.abs(hamiltonian_matrix(updated) - exact)))


# --- iteration driver --------------------------------------------------------


@dataclass(frozen=True)
class IterationRecord:
    """One step of the deflation loop.

    ``ground_energy`` is in the working (shifted) frame; ``energy`` removes the
    shift. In covariance mode ``lambda_next == coeffs - ground_energy * f_coeffs``.
    """

    index: int
    mode: str
    ground_energy: float
    shift: float
    ground_state: np.ndarray = field(repr=False)
    f_coeffs: np.ndarray = field(repr=False)
    coeffs: np.ndarray | None = field(default=None, repr=False)
    lambda_next: np.ndarray | None = field(default=None, repr=False)
    eigenvalues: np.ndarray | None = field(default=None, repr=False)
    gap_warning: bool = False
    fidelity_vs_oracle: float | None = None

    @property
    def energy(self) -> float:
        return self.ground_energy - self.shift

    @property
    def spectrum(self) -> np.ndarray | None:
        """Full working-matrix spectrum with the shift removed."""
        return None if self.eigenvalues is None else self.eigenvalues - self.shift

    def to_json(self) -> dict:
        return {
            "iteration": self.index,
            "mode": self.mode,
            "ground_energy": self.ground_energy,
            "energy": self.energy,
            "shift": self.shift,
            "f_coeffs": [float(x) for x in self.f_coeffs],
            "lambda_next": None if self.lambda_next is None else [float(x) for x in self.lambda_next],
            "fidelity_vs_oracle": self.fidelity_vs_oracle,
            "gap_warning": self.gap_warning,
        }


def frobenius_norm(h: PauliHamiltonian) -> float:
    """``||H||_F`` from the coefficients (distinct strings are HS-orthogonal)."""
    return math.sqrt((1 << h.n_qubits) * float(np.sum(h.coeffs**2)))


def auto_shift(h: PauliHamiltonian) -> float:
    """``-(||H||_F + 1)``: puts every eigenvalue below -1."""
    return -(frobenius_norm(h) + 1.0)


def deflate(
    h: PauliHamiltonian,
    iterations: int,
    mode: str = COVARIANCE,
    noise: NoiseSpec | None = None,
    shift: float | None = None,
    reference: Spectrum | None = None,
    strict: bool = True,
    method: str = "auto",
    cap: int = DENSE_QUBIT_CAP,
) -> list[IterationRecord]:
    """Run ``iterations`` out-projections and return ``iterations + 1`` records.

    Record 0 holds the ground state of the (shifted) input; record ``i`` holds
    the ground state after ``i`` projections, i.e. the estimate of the i-th
    excited level.

    Parameters
    ----------
    h : PauliHamiltonian
    iterations : int
        Number of out-projections, >= 1.
    mode : {"exact-projector", "covariance"}
    noise : NoiseSpec, optional
        Corrupts each iteration's ground state before it is used.
    shift : float, optional
        Constant added to the Hamiltonian; ``None`` selects :func:`auto_shift`.
    reference : Spectrum, optional
        Oracle spectrum of ``h``; fills ``fidelity_vs_oracle``.
    strict : bool
        Check eigen-residuals before each exact projection (skipped under noise).
    """
    mode = _check_mode(mode)
    if iterations < 1:
        raise DomainError("iterations must be >= 1")
    if h.n_qubits > cap:
        raise CapacityError(f"{h.n_qubits} qubits exceeds the dense cap of {cap}")
    c = auto_shift(h) if shift is None else float(shift)
    dim = 1 << h.n_qubits
    noisy = noise is not None

    if mode == COVARIANCE:
        work_h = h.shifted(c) if c != 0.0 else h
        matrix = None
    else:
        work_h = h
        matrix = hamiltonian_matrix(h) + c * np.eye(dim)

    records = []
    for i in range(iterations + 1):
        if mode == COVARIANCE:
            matrix = hamiltonian_matrix(work_h)
        spec = eigh(matrix, method=method)
        energy = spec.ground_energy
        ground = spec.ground_state
        scale = max(1.0, float(np.max(np.abs(spec.eigenvalues))))
        gap_warning = dim > 1 and spec.eigenvalues[1] - energy <= DEGENERACY_TOL * scale
        if gap_warning:
            log.debug("iteration %d: degenerate ground level (gap %.3e)", i, spec.eigenvalues[1] - energy)
        used = corrupt(ground, noise, i) if noisy else ground
        f = f_coefficients(work_h, used)
        fid = None
        if reference is not None and i < len(reference):
            fid = fidelity(ground, reference.vector(i))
        coeffs = work_h.coeffs if mode == COVARIANCE else None
        lam_next = coeffs - energy * f if mode == COVARIANCE else None
        records.append(
            IterationRecord(
                index=i,
                mode=mode,
                ground_energy=energy,
                shift=c,
                ground_state=ground,
                f_coeffs=f,
                coeffs=coeffs,
                lambda_next=lam_next,
                eigenvalues=spec.eigenvalues,
                gap_warning=bool(gap_warning),
                fidelity_vs_oracle=fid,
            )
        )
        if i == iterations:
            break
        if mode == COVARIANCE:
            work_h = work_h.with_coeffs(lam_next)
        else:
            matrix = project_out(matrix, used, energy, strict=strict and not noisy)
    return records


# --- identity-shift sweep ---------------------------------------------------


@dataclass(frozen=True)
class ShiftSweep:
    lo: float = -10.0
    hi: float = 10.0
    step: float = 0.2

    def grid(self) -> np.ndarray:
        if not (self.step > 0) or self.hi < self.lo:
            raise DomainError(f"malformed sweep {self}")
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return np.round(self.lo + self.step * np.arange(count), 10)


@dataclass(frozen=True)
class ShiftCandidate:
    shift: float
    passed: int
    first_failure: int | None
    energies: tuple[float, ...]


@dataclass(frozen=True)
class ShiftScan:
    """Outcome of :func:`optimize_identity_shift`.

    ``passed`` counts the leading iterations that keep the levels ordered and
    negative; ``feasible`` is true when at least one did.
    """

    best_shift: float
    passed: int
    depth: int
    augmented: bool
    candidates: tuple[ShiftCandidate, ...]
    records: tuple[IterationRecord, ...] = field(repr=False)

    @property
    def feasible(self) -> bool:
        return self.passed > 0

    @property
    def first_failure(self) -> int | None:
        return None if self.passed == self.depth else self.passed + 1


def _constraint_passes(energies: Sequence[float], tol: float) -> tuple[int, int | None]:
    """Leading iterations with E[k] >= E[k-1] and E[k] < 0 (working frame)."""
    for k in range(1, len(energies)):
        if energies[k] < energies[k - 1] - tol or energies[k] >= -tol:
            return k - 1, k
    return len(energies) - 1, None


def optimize_identity_shift(
    h: PauliHamiltonian,
    depth: int,
    sweep: ShiftSweep | None = None,
    exhaustive: bool = False,
    tol: float = 1e-9,
    method: str = "auto",
) -> ShiftScan:
    """Scan identity shifts and keep the one whose covariance iterations stay
    ordered (``E[k] >= E[k-1]``) and below the projected-out zero level for the
    most iterations; ties go to the smallest ``|c|``, then the negative one.

    The identity string is appended (coefficient 0) if missing. Candidates are
    visited in order of ``|c|``; unless ``exhaustive``, the scan stops at the
    first candidate that passes all ``depth`` iterations, which is the winner
    under the tie-break anyway.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    grid = (sweep or ShiftSweep()).grid()
    if grid.size == 0:
        raise DomainError("empty shift grid")
    work, augmented = h.with_identity()
    scale = max(1.0, float(np.sum(np.abs(work.coeffs))))
    order = sorted(grid.tolist(), key=lambda c: (abs(c), c))

    candidates = []
    best = None
    for c in order:
        records = deflate(work, depth, mode=COVARIANCE, shift=c, method=method)
        energies = [r.ground_energy for r in records]
        passed, failure = _constraint_passes(energies, tol * scale)
        candidates.append(
            ShiftCandidate(float(c), passed, failure, tuple(r.energy for r in records))
        )
        if best is None or passed > best[1]:
            best = (float(c), passed, tuple(records))
        if passed == depth and not exhaustive:
            break
    if best[1] == 0:
        log.info("no identity shift keeps even the first iteration ordered")
    return ShiftScan(
        best_shift=best[0],
        passed=best[1],
        depth=depth,
        augmented=augmented,
        candidates=tuple(sorted(candidates, key=lambda r: r.shift)),
        records=best[2],
    )

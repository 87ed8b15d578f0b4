"""Benchmark Hamiltonians and their file formats.

Hamiltonian file: one ``STRING, coefficient`` per line, ``#`` comments,
blank lines ignored. Coefficient table: CSV with header
``R,II,ZI,IZ,ZZ,XX,YY`` and an optional ``E_nuc`` column.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .errors import CapacityError, DomainError, ParseError
from .pauli import DENSE_QUBIT_CAP, PauliHamiltonian, PauliString, cz_group

H2_COLUMNS = ("II", "ZI", "IZ", "ZZ", "XX", "YY")
E_NUC = "E_nuc"
BETA1_GRID = (0.1, 0.3, 0.5, 0.7, 0.9, 1.1)


def _parse_float(text: str) -> float:
    # tolerate the typographic minus sign
    return float(text.strip().replace("−", "-"))


# --- H2 coefficient tables ---------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    R: float
    coeffs: Mapping[str, float]
    e_nuc: float = 0.0


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients ``lambda_j(R)`` on a strictly increasing grid of ``R``."""

    grid: np.ndarray
    columns: tuple[str, ...]
    values: np.ndarray
    e_nuc: np.ndarray | None = None
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise DomainError("coefficient table needs a nonempty 1-d grid")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if values.shape != (grid.size, len(self.columns)):
            raise DomainError(f"values shape {values.shape} does not match grid x columns")
        lengths = {PauliString(c).n_qubits for c in self.columns}
        if len(lengths) != 1:
            raise DomainError("column strings have mixed lengths")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.e_nuc is not None:
            object.__setattr__(self, "e_nuc", np.asarray(self.e_nuc, dtype=float))

    def __len__(self) -> int:
        return self.grid.size

    def row(self, i: int) -> TableRow:
        coeffs = dict(zip(self.columns, (float(v) for v in self.values[i])))
        e_nuc = 0.0 if self.e_nuc is None else float(self.e_nuc[i])
        return TableRow(float(self.grid[i]), coeffs, e_nuc)

    def rows(self) -> Iterator[TableRow]:
        for i in range(len(self)):
            yield self.row(i)


def load_coefficient_table(path) -> CoefficientTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(
            "coefficient table not found; expected a CSV with header "
            "R,II,ZI,IZ,ZZ,XX,YY[,E_nuc]", path=path
        ) from None
    reader = csv.reader(io.StringIO(text))
    rows = [(n, r) for n, r in enumerate(reader, start=1) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty coefficient table", path=path)
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    if not header or header[0] != "R":
        raise ParseError("first column must be R", path=path, line=header_line)
    columns = [h for h in header[1:] if h != E_NUC]
    has_nuc = E_NUC in header
    for label in columns:
        try:
            PauliString(label)
        except DomainError as exc:
            raise ParseError(str(exc), path=path, line=header_line) from None
    grid, values, nuc = [], [], []
    for lineno, raw in rows[1:]:
        if len(raw) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(raw)}", path=path, line=lineno)
        try:
            record = {h: _parse_float(v) for h, v in zip(header, raw)}
        except ValueError as exc:
            raise ParseError(str(exc), path=path, line=lineno) from None
        grid.append(record["R"])
        values.append([record[c] for c in columns])
        nuc.append(record.get(E_NUC, 0.0))
    if not grid:
        raise ParseError("table has a header but no rows", path=path)
    try:
        return CoefficientTable(
            np.array(grid),
            tuple(columns),
            np.array(values),
            np.array(nuc) if has_nuc else None,
            source=str(path),
        )
    except DomainError as exc:
        raise ParseError(str(exc), path=path) from None


def save_coefficient_table(table: CoefficientTable, path) -> None:
    header = ["R", *table.columns] + ([E_NUC] if table.e_nuc is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(table)):
            row = [repr(float(table.grid[i]))] + [repr(float(v)) for v in table.values[i]]
            if table.e_nuc is not None:
                row.append(repr(float(table.e_nuc[i])))
            writer.writerow(row)


def h2_hamiltonian(row) -> PauliHamiltonian:
    """Two-qubit Hamiltonian with strings II, ZI, IZ, ZZ (C_z part) and XX, YY
    (perturbation), in that order. ``row`` is a :class:`TableRow` or a mapping
    from those labels to coefficients."""
    coeffs = row.coeffs if isinstance(row, TableRow) else row
    labels = set(coeffs) - {"R", E_NUC}
    if labels != set(H2_COLUMNS):
        missing = sorted(set(H2_COLUMNS) - labels)
        extra = sorted(labels - set(H2_COLUMNS))
        raise DomainError(f"H2 row needs exactly {H2_COLUMNS}; missing {missing}, extra {extra}")
    return PauliHamiltonian((float(coeffs[c]), c) for c in H2_COLUMNS)


def synthetic_h2_table(points: int = 20, seed: int = 0, r_min: float = 0.3, r_max: float = 2.5) -> CoefficientTable:
    """Random coefficients in [-1, 1] on an even R grid; a format fixture, not chemistry."""
    rng = np.random.default_rng(seed)
    grid = np.round(np.linspace(r_min, r_max, points), 6)
    values = rng.uniform(-1.0, 1.0, size=(points, len(H2_COLUMNS)))
    return CoefficientTable(grid, H2_COLUMNS, values, e_nuc=np.zeros(points), source="synthetic")


# --- perturbed C_z -------------------------------------------------------------


def perturbation_strings(n: int, family: str) -> list[PauliString]:
    """Single-site strings on every qubit, then adjacent pairs: 2n - 1 in total."""
    if n < 2:
        raise DomainError("perturbation strings need n >= 2")
    family = family.upper()
    if family not in ("X", "Y"):
        raise DomainError(f"family must be 'X' or 'Y', got {family!r}")
    singles = ["I" * q + family + "I" * (n - q - 1) for q in range(n)]
    pairs = ["I" * q + family * 2 + "I" * (n - q - 2) for q in range(n - 1)]
    return [PauliString(s) for s in singles + pairs]


@dataclass(frozen=True)
class PerturbedCzSpec:
    """Random C_z Hamiltonian plus constant-weight X- and Y-family strings.

    A family is present only when its beta is nonzero. The number of C_z
    strings must exceed the number of perturbation strings.
    """

    n_qubits: int
    beta1: float = 0.0
    beta2: float = 0.0
    J: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_qubits < 2:
            raise DomainError("perturbed C_z needs n_qubits >= 2")
        if self.J < 0:
            raise DomainError("J must be >= 0")
        if 2**self.n_qubits <= self.n_perturbations:
            raise DomainError(
                f"{2**self.n_qubits} C_z strings do not outnumber {self.n_perturbations} "
                f"perturbation strings at N={self.n_qubits}"
            )

    @property
    def families(self) -> list[tuple[str, float]]:
        return [(f, b) for f, b in (("X", self.beta1), ("Y", self.beta2)) if b != 0.0]

    @property
    def n_perturbations(self) -> int:
        return len(self.families) * (2 * self.n_qubits - 1)


def perturbed_cz(spec: PerturbedCzSpec, cap: int = DENSE_QUBIT_CAP) -> PauliHamiltonian:
    if spec.n_qubits > cap:
        raise CapacityError(f"{spec.n_qubits} qubits exceeds the dense cap of {cap}")
    rng = np.random.default_rng(spec.seed)
    cz = cz_group(spec.n_qubits)
    lam = rng.uniform(-spec.J, spec.J, size=len(cz))
    terms = list(zip(lam, cz))
    for family, beta in spec.families:
        terms += [(beta, s) for s in perturbation_strings(spec.n_qubits, family)]
    return PauliHamiltonian(terms, spec.n_qubits)


def partition_terms(h: PauliHamiltonian) -> tuple[list[tuple[float, PauliString]], list[tuple[float, PauliString]]]:
    """Split terms into C_z members ({I, Z} only) and the rest, keeping order."""
    cz = [(c, s) for c, s in h.terms if s.is_diagonal()]
    rest = [(c, s) for c, s in h.terms if not s.is_diagonal()]
    return cz, rest


# --- Hamiltonian files -------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianFile:
    hamiltonian: PauliHamiltonian
    cz_mask: tuple[bool, ...]
    augmented: bool
    path: str | None = None

    @property
    def n_cz(self) -> int:
        return sum(self.cz_mask)

    @property
    def n_perturbation(self) -> int:
        return len(self.cz_mask) - self.n_cz


def parse_hamiltonian_text(text: str, path=None) -> PauliHamiltonian:
    terms, seen, n = [], {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(f"expected 'STRING, coefficient', got {raw.strip()!r}", path=path, line=lineno)
        try:
            s = PauliString(parts[0])
            coeff = _parse_float(parts[1])
        except (DomainError, ValueError) as exc:
            raise ParseError(str(exc), path=path, line=lineno) from None
        if n is None:
            n = s.n_qubits
        elif s.n_qubits != n:
            raise ParseError(f"string {s} has length {s.n_qubits}, expected {n}", path=path, line=lineno)
        if s in seen:
            raise ParseError(f"duplicate string {s} (first on line {seen[s]})", path=path, line=lineno)
        seen[s] = lineno
        terms.append((coeff, s))
    if not terms:
        raise ParseError("no terms found", path=path)
    return PauliHamiltonian(terms, n)


def load_hamiltonian_file(path, augment_identity: bool = True) -> HamiltonianFile:
    """Load a Hamiltonian file; the identity is appended with coefficient 0
    when missing (and flagged) unless ``augment_identity`` is false."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(
            "Hamiltonian file not found; expected UTF-8 text with one "
            "'STRING, coefficient' per line (e.g. 'ZZII, -0.25')", path=path
        ) from None
    h = parse_hamiltonian_text(text, path=path)
    augmented = False
    if augment_identity:
        h, augmented = h.with_identity()
    mask = tuple(s.is_diagonal() for s in h.strings)
    return HamiltonianFile(h, mask, augmented, str(path))


def format_hamiltonian(h: PauliHamiltonian) -> str:
    return "".join(f"{s.label}, {c!r}\n" for c, s in h.terms)


def save_hamiltonian_file(h: PauliHamiltonian, path, header: str | None = None) -> None:
    lines = "" if header is None else "".join(f"# {l}\n" for l in header.splitlines())
    Path(path).write_text(lines + format_hamiltonian(h), encoding="utf-8")

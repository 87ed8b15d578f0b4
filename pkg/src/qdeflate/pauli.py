"""Pauli strings, their products, and dense matrix realizations.

A string over N qubits is stored as two N-bit masks (x, z) so that the
operator on each qubit is ``i**(x*z) X**x Z**z``; this makes products and
commutation tests a handful of integer operations. Qubit 1 is the leftmost
character of the text form and the most significant bit of a basis index,
which matches the Kronecker-product ordering used by :func:`to_matrix`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, DomainError

DENSE_QUBIT_CAP = 14
GROUP_QUBIT_CAP = 16

_LABELS = "IXYZ"
# label -> (x bit, z bit)
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_CHARS = {bits: ch for ch, bits in _BITS.items()}
_PHASES = (1, 1j, -1, -1j)


class PauliString:
    """Immutable tensor product of single-qubit operators from {I, X, Y, Z}.

    >>> PauliString("XZ").n_qubits
    2
    """

    __slots__ = ("_n", "_x", "_z")

    def __init__(self, label: str):
        if not isinstance(label, str) or not label:
            raise DomainError(f"Pauli string label must be a nonempty str, got {label!r}")
        x = z = 0
        for ch in label.upper():
            try:
                xb, zb = _BITS[ch]
            except KeyError:
                raise DomainError(f"invalid Pauli label {ch!r} in {label!r}") from None
            x = (x << 1) | xb
            z = (z << 1) | zb
        self._n = len(label)
        self._x = x
        self._z = z

    @classmethod
    def from_bits(cls, n: int, x: int, z: int) -> "PauliString":
        if n < 1:
            raise DomainError("qubit count must be >= 1")
        if x >> n or z >> n:
            raise DomainError("bit masks exceed qubit count")
        obj = cls.__new__(cls)
        obj._n, obj._x, obj._z = n, x, z
        return obj

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls.from_bits(n, 0, 0)

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def x(self) -> int:
        return self._x

    @property
    def z(self) -> int:
        return self._z

    @property
    def n_y(self) -> int:
        return (self._x & self._z).bit_count()

    @property
    def weight(self) -> int:
        return (self._x | self._z).bit_count()

    def is_identity(self) -> bool:
        return not (self._x or self._z)

    def is_diagonal(self) -> bool:
        """True for strings over {I, Z} only (members of C_z)."""
        return self._x == 0

    @property
    def label(self) -> str:
        bits = range(self._n - 1, -1, -1)
        return "".join(_CHARS[(self._x >> b) & 1, (self._z >> b) & 1] for b in bits)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self._n, self._x, self._z) == (other._n, other._x, other._z)

    def __hash__(self) -> int:
        return hash((self._n, self._x, self._z))

    def __lt__(self, other: "PauliString") -> bool:
        # lexicographic on the text form (I < X < Y < Z)
        return self.label < other.label

    def __mul__(self, other: "PauliString") -> "PhasedString":
        return multiply(self, other)

    def __len__(self) -> int:
        return self._n


@dataclass(frozen=True)
class PhasedString:
    """A Pauli string times one of the fourth roots of unity."""

    phase: complex
    string: PauliString

    def __post_init__(self):
        if self.phase not in _PHASES:
            raise DomainError(f"phase must be one of +1, -1, +i, -i; got {self.phase!r}")

    def __iter__(self):
        yield self.phase
        yield self.string


def _as_string(s) -> PauliString:
    return s if isinstance(s, PauliString) else PauliString(s)


def _check_same_length(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"length mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def multiply(a, b) -> PhasedString:
    """Product ``a @ b`` as (phase, string)."""
    a, b = _as_string(a), _as_string(b)
    _check_same_length(a, b)
    x = a.x ^ b.x
    z = a.z ^ b.z
    # X^x1 Z^z1 X^x2 Z^z2 = (-1)^|z1 & x2| X^(x1^x2) Z^(z1^z2), then restore the i^n_y factors
    power = a.n_y + b.n_y - (x & z).bit_count() + 2 * (a.z & b.x).bit_count()
    return PhasedString(_PHASES[power % 4], PauliString.from_bits(a.n_qubits, x, z))


def commutes(a, b) -> bool:
    """True iff the two strings commute (even number of anticommuting sites)."""
    a, b = _as_string(a), _as_string(b)
    _check_same_length(a, b)
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() % 2 == 0


def is_group(strings: Iterable) -> bool:
    """Check that a set of strings contains the identity and is closed under
    multiplication up to phase. Every Pauli string is its own inverse up to
    phase, so this is enough for a group."""
    members = {_as_string(s) for s in strings}
    if not members:
        raise DomainError("is_group needs a nonempty set")
    n = next(iter(members)).n_qubits
    if any(s.n_qubits != n for s in members):
        raise DimensionError("strings have mixed lengths")
    if PauliString.identity(n) not in members:
        return False
    keys = {(s.x, s.z) for s in members}
    return all((a.x ^ b.x, a.z ^ b.z) in keys for a in members for b in members)


def cz_group(n: int, cap: int = GROUP_QUBIT_CAP) -> list[PauliString]:
    """All 2**n strings over {I, Z}, in lexicographic order (I < Z)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if n > cap:
        raise CapacityError(f"cz_group({n}) exceeds the cap of {cap} qubits")
    # with I < Z and qubit 1 most significant, lexicographic order == counting order of the z-mask
    return [PauliString.from_bits(n, 0, z) for z in range(2**n)]


def all_strings(n: int) -> list[PauliString]:
    """All 4**n strings over {I, X, Y, Z} in lexicographic order."""
    return [PauliString("".join(t)) for t in itertools.product(_LABELS, repeat=n)]


def _check_dense(n: int, cap: int) -> None:
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the dense cap of {cap}")


def basis_action(s: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Return (targets, phases) with ``s|b> = phases[b] |targets[b]>``."""
    dim = 1 << s.n_qubits
    b = np.arange(dim, dtype=np.int64)
    targets = b ^ s.x
    parity = (np.bitwise_count(b & s.z) & 1).astype(np.int64)
    phases = _PHASES[s.n_y % 4] * (1 - 2 * parity).astype(complex)
    return targets, phases


def to_matrix(s, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense 2**N x 2**N matrix of a Pauli string."""
    s = _as_string(s)
    _check_dense(s.n_qubits, cap)
    dim = 1 << s.n_qubits
    targets, phases = basis_action(s)
    m = np.zeros((dim, dim), dtype=complex)
    m[targets, np.arange(dim)] = phases
    return m


def apply(s, state: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a state vector without building the matrix."""
    s = _as_string(s)
    state = np.asarray(state)
    if state.shape != (1 << s.n_qubits,):
        raise DimensionError(f"state of shape {state.shape} does not fit {s.n_qubits} qubits")
    targets, phases = basis_action(s)
    out = np.empty(state.shape, dtype=complex)
    out[targets] = phases * state
    return out


class PauliHamiltonian:
    """Real-weighted sum of distinct Pauli strings over ``n_qubits`` qubits.

    Terms keep their insertion order; that order is what f-coefficients and
    renormalized coefficient lists align with.
    """

    __slots__ = ("_n", "_strings", "_coeffs", "_index")

    def __init__(self, terms: Iterable[tuple[float, object]], n_qubits: int | None = None):
        coeffs, strings = [], []
        for coeff, s in terms:
            strings.append(_as_string(s))
            value = float(coeff)
            if not np.isfinite(value):
                raise DomainError(f"coefficient of {strings[-1]} is not finite")
            coeffs.append(value)
        if not strings:
            raise DomainError("a Hamiltonian needs at least one term")
        n = strings[0].n_qubits if n_qubits is None else int(n_qubits)
        if n < 1:
            raise DomainError("n_qubits must be >= 1")
        index = {}
        for i, s in enumerate(strings):
            if s.n_qubits != n:
                raise DimensionError(f"term {s} has length {s.n_qubits}, expected {n}")
            if s in index:
                raise DomainError(f"duplicate string {s}")
            index[s] = i
        self._n = n
        self._strings = tuple(strings)
        self._coeffs = tuple(coeffs)
        self._index = index

    @classmethod
    def from_dict(cls, mapping: dict) -> "PauliHamiltonian":
        return cls((c, s) for s, c in mapping.items())

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def strings(self) -> tuple[PauliString, ...]:
        return self._strings

    @property
    def coeffs(self) -> np.ndarray:
        return np.array(self._coeffs, dtype=float)

    @property
    def terms(self) -> list[tuple[float, PauliString]]:
        return list(zip(self._coeffs, self._strings))

    def __len__(self) -> int:
        return len(self._strings)

    def __iter__(self):
        return iter(self.terms)

    def __contains__(self, s) -> bool:
        return _as_string(s) in self._index

    def index(self, s) -> int:
        return self._index[_as_string(s)]

    def coefficient(self, s) -> float:
        i = self._index.get(_as_string(s))
        return 0.0 if i is None else self._coeffs[i]

    def with_coeffs(self, coeffs: Sequence[float]) -> "PauliHamiltonian":
        """Same string set and order, new coefficients."""
        coeffs = [float(c) for c in coeffs]
        if len(coeffs) != len(self._strings):
            raise DimensionError(f"{len(coeffs)} coefficients for {len(self._strings)} terms")
        return PauliHamiltonian(zip(coeffs, self._strings), self._n)

    def with_identity(self) -> tuple["PauliHamiltonian", bool]:
        """Append the identity string with coefficient 0 if it is missing.

        Returns the Hamiltonian and whether it was augmented.
        """
        ident = PauliString.identity(self._n)
        if ident in self._index:
            return self, False
        return PauliHamiltonian([*self.terms, (0.0, ident)], self._n), True

    def shifted(self, c: float) -> "PauliHamiltonian":
        """Add ``c`` to the identity coefficient (appending the identity if needed)."""
        h, _ = self.with_identity()
        coeffs = h.coeffs
        coeffs[h.index(PauliString.identity(self._n))] += c
        return h.with_coeffs(coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliHamiltonian):
            return NotImplemented
        return self._n == other._n and self.terms == other.terms

    def __repr__(self) -> str:
        body = ", ".join(f"{c:+g} {s}" for c, s in self.terms[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"PauliHamiltonian({body}{more})"


def hamiltonian_matrix(h: PauliHamiltonian, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense matrix of ``sum_j lambda_j h_j``."""
    _check_dense(h.n_qubits, cap)
    dim = 1 << h.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for coeff, s in h.terms:
        if coeff == 0.0:
            continue
        targets, phases = basis_action(s)
        m[targets, cols] += coeff * phases
    return m

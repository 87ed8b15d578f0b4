"""Dense Hermitian eigensolvers and state-vector helpers.

Two solvers share one output convention:

* cyclic Jacobi (round-robin ordering, n/2 disjoint rotations per step),
  used up to ``JACOBI_MAX_DIM``;
* Householder tridiagonalization followed by implicit-shift QL, used above it.

Eigenvalues are ascending. Inside a cluster of (numerically) degenerate
eigenvalues the eigenvectors are replaced by a canonical basis, and every
eigenvector's first significant component is made real and positive, so the
result does not depend on which solver produced it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ConvergenceError, DimensionError, DomainError
from .pauli import PauliString, apply

JACOBI_MAX_DIM = 512
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12
QL_MAX_ITER = 60
DEGENERACY_TOL = 1e-9
HERMITIAN_TOL = 1e-10
# components below this (unit-normalized vectors) are treated as zero when fixing phases
_PHASE_CUTOFF = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square Hermitian matrix and return it as complex128."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.conj().T)) > tol:
        raise ContractError("matrix is not Hermitian")
    return a


def eigh(m, method: str = "auto", degeneracy_tol: float = DEGENERACY_TOL) -> Spectrum:
    """Full eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square Hermitian matrix.
    method : {"auto", "jacobi", "householder"}
        ``"auto"`` picks Jacobi for ``dim <= JACOBI_MAX_DIM``.
    degeneracy_tol : float
        Relative gap below which neighbouring eigenvalues form a cluster.
    """
    a = as_hermitian(m)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0), dtype=complex))
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "householder"
    if method == "jacobi":
        w, v = _jacobi(a)
    elif method == "householder":
        w, v = _householder_ql(a)
    else:
        raise DomainError(f"unknown eigensolver {method!r}")
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    v = _canonicalize(w, v, degeneracy_tol)
    return Spectrum(w, v)


def eigvalsh(m, method: str = "auto") -> np.ndarray:
    return eigh(m, method=method).eigenvalues


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: n-1 rounds of n/2 disjoint pairs covering all pairs."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[::-1][:half])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n0 = a.shape[0]
    if n0 == 1:
        return np.real(a.diagonal()).copy(), np.eye(1, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n0), np.eye(n0, dtype=complex)
    # pad odd sizes with a decoupled dummy coordinate
    n = n0 + (n0 % 2)
    # real symmetric input stays in real arithmetic
    dtype = float if not np.any(a.imag) else complex
    work = np.zeros((n, n), dtype=dtype)
    work[:n0, :n0] = a if dtype is complex else a.real
    # eigenvectors are accumulated as rows (V^T) so every update is a row gather
    vt = np.eye(n, dtype=dtype)
    threshold = JACOBI_TOL * scale
    rounds = _round_robin(n)
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = np.linalg.norm(work[offdiag])
        if off <= threshold:
            break
        if sweep == JACOBI_MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps", residual=float(off)
            )
        for p, q in rounds:
            work = _jacobi_round(work, vt, p, q)
    w = work.diagonal().real.copy()
    v = vt.T.astype(complex)
    if n != n0:
        dummy = int(np.argmax(np.abs(v[n0, :])))
        keep = [k for k in range(n) if k != dummy]
        return w[keep], v[:n0, keep]
    return w, v


def _jacobi_round(work: np.ndarray, vt: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Annihilate work[p_k, q_k] for all disjoint pairs k at once.

    Returns the rotated matrix; ``vt`` is updated in place.
    """
    apq = work[p, q]
    mag = np.abs(apq)
    active = mag > 0.0
    if not active.any():
        return work
    if not active.all():
        p, q, apq, mag = p[active], q[active], apq[active], mag[active]
    phase = apq / mag
    theta = (work[q, q].real - work[p, p].real) / (2.0 * mag)
    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    c = (1.0 / np.sqrt(t * t + 1.0))[:, None]
    s = t[:, None] * c
    # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on each (p, q) block
    g_qp = -s * phase.conj()[:, None]
    g_qq = c * phase.conj()[:, None]

    # rows: G^H A; then columns via (G^H (G^H A)^H)^H, valid because A' is Hermitian
    for _ in range(2):
        rp, rq = work[p], work[q]
        work[p] = c * rp + g_qp.conj() * rq
        work[q] = s * rp + g_qq.conj() * rq
        work = work.conj().T.copy()
    work[p, q] = 0.0
    work[q, p] = 0.0
    vp, vq = vt[p], vt[q]
    vt[p] = c * vp + g_qp * vq
    vt[q] = s * vp + g_qq * vq
    return work


def _householder_ql(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    t = a.copy()
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = t[k + 1 :, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        lead = x[0]
        phase = lead / abs(lead) if lead != 0 else 1.0
        alpha = -phase * xnorm
        u = x.copy()
        u[0] -= alpha
        unorm = np.linalg.norm(u)
        if unorm == 0.0:
            continue
        u /= unorm
        # H = I - 2 u u^H applied on both sides of the trailing block
        block = t[k + 1 :, :]
        t[k + 1 :, :] = block - 2.0 * np.outer(u, u.conj() @ block)
        block = t[:, k + 1 :]
        t[:, k + 1 :] = block - 2.0 * np.outer(block @ u, u.conj())
        qb = q[:, k + 1 :]
        q[:, k + 1 :] = qb - 2.0 * np.outer(qb @ u, u.conj())

    d = t.diagonal().real.copy()
    sub = np.array([t[k + 1, k] for k in range(n - 1)], dtype=complex)
    # diagonal unitary that makes the off-diagonal real and nonnegative
    phases = np.ones(n, dtype=complex)
    for k in range(n - 1):
        mag = abs(sub[k])
        phases[k + 1] = phases[k] * (sub[k] / mag if mag > 0 else 1.0)
    e = np.zeros(n)
    e[: n - 1] = np.abs(sub)
    z = q * phases[None, :]
    _tql2(d, e, z)
    return d, z


def _tql2(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> None:
    """Implicit-shift QL on the symmetric tridiagonal (d, e), in place.

    ``e[i]`` couples ``d[i]`` and ``d[i+1]``; rotations are accumulated into
    the columns of ``z``.
    """
    n = len(d)
    eps = np.finfo(float).eps
    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > QL_MAX_ITER:
                raise ConvergenceError(
                    f"QL iteration did not converge for eigenvalue {l}", residual=float(abs(e[l]))
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def _clusters(w: np.ndarray, tol: float) -> list[tuple[int, int]]:
    scale = max(1.0, float(np.max(np.abs(w)))) if len(w) else 1.0
    out, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > tol * scale:
            out.append((start, k))
            start = k
    return out


def _canonicalize(w: np.ndarray, v: np.ndarray, tol: float) -> np.ndarray:
    v = v.copy()
    for start, stop in _clusters(w, tol):
        if stop - start > 1:
            v[:, start:stop] = _canonical_basis(v[:, start:stop])
    for k in range(v.shape[1]):
        col = v[:, k]
        col /= np.linalg.norm(col)
        big = np.flatnonzero(np.abs(col) > _PHASE_CUTOFF)
        if big.size:
            lead = col[big[0]]
            col *= abs(lead) / lead
        v[:, k] = col
    return v


def _canonical_basis(block: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(block) obtained by Gram-Schmidt on the columns
    of the subspace projector, i.e. on the projections of e_0, e_1, ... in turn."""
    dim, rank = block.shape
    basis = []
    for j in range(dim):
        vec = block @ block[j].conj()
        for b in basis:
            vec = vec - b * np.vdot(b, vec)
        for b in basis:
            vec = vec - b * np.vdot(b, vec)
        norm = np.linalg.norm(vec)
        if norm > 1e-6:
            basis.append(vec / norm)
            if len(basis) == rank:
                break
    if len(basis) < rank:
        # fall back to the solver's own basis for ill-conditioned clusters
        return block
    return np.stack(basis, axis=1)


def as_state(state, n_qubits: int | None = None) -> np.ndarray:
    psi = np.asarray(state, dtype=complex)
    if psi.ndim != 1 or psi.size == 0 or psi.size & (psi.size - 1):
        raise DimensionError(f"state must be a 1-d vector of length 2**N, got shape {psi.shape}")
    if n_qubits is not None and psi.size != 1 << n_qubits:
        raise DimensionError(f"state of length {psi.size} does not fit {n_qubits} qubits")
    return psi


def basis_state(index: int, n_qubits: int) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def normalize(state) -> np.ndarray:
    psi = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise DomainError("cannot normalize a zero vector")
    return psi / norm


def expectation(state, s, tol: float = 1e-10) -> float:
    """<psi|s|psi> for a Pauli string, without renormalizing ``state``."""
    s = s if isinstance(s, PauliString) else PauliString(s)
    psi = as_state(state, s.n_qubits)
    value = np.vdot(psi, apply(s, psi))
    if abs(value.imag) > tol * max(1.0, float(np.vdot(psi, psi).real)):
        raise ContractError(f"expectation of {s} has imaginary part {value.imag:.3e}")
    return float(value.real)


def fidelity(a, b) -> float:
    """|<a|b>| after normalizing both vectors."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DomainError("fidelity of a zero vector is undefined")
    return float(min(1.0, abs(np.vdot(a, b)) / (na * nb)))


def rel_energy_error(pred: float, exact: float) -> float:
    """|pred - exact| / |exact|."""
    if exact == 0:
        raise DomainError(
            f"relative error undefined for exact == 0 (absolute error {abs(pred - exact)!r})"
        )
    return abs(pred - exact) / abs(exact)

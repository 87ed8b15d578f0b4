"""Amplitude-corruption noise that stands in for an imperfect variational solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class NoiseSpec:
    """Maximum error strength ``W`` and a master seed.

    ``both_quadratures`` also perturbs the imaginary part of each amplitude
    with an independent draw; by default only the real part is shifted.
    """

    W: float
    seed: int = 0
    both_quadratures: bool = False

    def __post_init__(self):
        if not np.isfinite(self.W) or self.W < 0:
            raise DomainError(f"noise strength W must be >= 0, got {self.W!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(
            W=float(d["W"]),
            seed=int(d.get("seed", 0)),
            both_quadratures=bool(d.get("both_quadratures", False)),
        )

    def to_dict(self) -> dict:
        out = {"W": self.W, "seed": self.seed}
        if self.both_quadratures:
            out["both_quadratures"] = True
        return out


def noise_rng(spec: NoiseSpec, iteration: int) -> np.random.Generator:
    """Generator for one iteration's draws, derived from the master seed."""
    return np.random.default_rng([int(spec.seed), int(iteration)])


def corrupt(state, spec: NoiseSpec, iteration: int = 0) -> np.ndarray:
    """Return ``c_j + eps_j`` with ``eps_j ~ U[-W, W]``; the norm is not restored."""
    psi = np.array(state, dtype=complex)
    if spec.W == 0:
        return psi
    rng = noise_rng(spec, iteration)
    psi.real += rng.uniform(-spec.W, spec.W, size=psi.shape)
    if spec.both_quadratures:
        psi.imag += rng.uniform(-spec.W, spec.W, size=psi.shape)
    return psi

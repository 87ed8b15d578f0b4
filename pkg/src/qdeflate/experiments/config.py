"""Experiment configuration: a YAML (or JSON) mapping, overridable from the CLI."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..deflation import MODES, ShiftSweep, _check_mode
from ..errors import DomainError
from ..models import BETA1_GRID
from ..noise import NoiseSpec

KINDS = ("h2-curve", "h2-noise", "cz-scaling", "external-molecule")
# CLI subcommand -> experiment kind
SUBCOMMANDS = {
    "h2-curve": "h2-curve",
    "h2-noise": "h2-noise",
    "cz-scaling": "cz-scaling",
    "molecule": "external-molecule",
}


@dataclass
class ExperimentConfig:
    experiment: str
    table: str | None = None
    hamiltonian: str | None = None
    iterations: int = 3
    mode: str = "covariance"
    # "sweep" (identity-shift scan), "auto" (-(||H||_F + 1)) or a number
    shift: str | float = "sweep"
    shift_sweep: ShiftSweep = field(default_factory=ShiftSweep)
    noise_grid: list[float] = field(default_factory=lambda: [0.05, 0.10])
    noise_seed: int | None = None
    both_quadratures: bool = False
    n_grid: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6, 7])
    beta1_grid: list[float] = field(default_factory=lambda: list(BETA1_GRID))
    beta2: float = 0.0
    realizations: int = 30
    out: str = "results"
    seed: int = 0
    jobs: int = 1
    timing: bool = False
    plots: bool = True

    def __post_init__(self):
        if self.experiment not in KINDS:
            raise DomainError(f"experiment must be one of {KINDS}, got {self.experiment!r}")
        self.mode = _check_mode(self.mode)
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if isinstance(self.shift, str) and self.shift not in ("sweep", "auto"):
            try:
                self.shift = float(self.shift)
            except ValueError:
                raise DomainError(f"shift must be 'sweep', 'auto' or a number, got {self.shift!r}") from None
        if isinstance(self.shift_sweep, dict):
            self.shift_sweep = ShiftSweep(**self.shift_sweep)
        self.shift_sweep.grid()
        for name in ("noise_grid", "n_grid", "beta1_grid"):
            if not getattr(self, name):
                raise DomainError(f"{name} must be nonempty")
        if any(w < 0 for w in self.noise_grid):
            raise DomainError("noise strengths must be >= 0")
        if self.realizations < 1:
            raise DomainError("realizations must be >= 1")
        if self.jobs < 1:
            raise DomainError("jobs must be >= 1")

    def noise_spec(self, W: float, seed: int) -> NoiseSpec:
        return NoiseSpec(W=W, seed=seed, both_quadratures=self.both_quadratures)

    def check_paths(self) -> None:
        """Raise FileNotFoundError for missing inputs required by the experiment."""
        needed = {"h2-curve": "table", "h2-noise": "table", "external-molecule": "hamiltonian"}
        key = needed.get(self.experiment)
        if key is None:
            return
        value = getattr(self, key)
        if value is None:
            raise FileNotFoundError(f"{self.experiment} needs `{key}` (config key or --{key} flag)")
        if not Path(value).exists():
            hint = (
                "a CSV with header R,II,ZI,IZ,ZZ,XX,YY[,E_nuc]"
                if key == "table"
                else "a text file with one 'STRING, coefficient' per line"
            )
            raise FileNotFoundError(f"{key} file {value!r} not found; expected {hint}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["shift_sweep"] = dataclasses.asdict(self.shift_sweep)
        return d


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _normalize(raw: dict) -> dict:
    """Accept the nested ``noise: {W, seed}`` form used in config files."""
    data = dict(raw)
    noise = data.pop("noise", None)
    if noise is not None:
        spec = NoiseSpec.from_dict(noise)
        data.setdefault("noise_grid", [spec.W])
        data.setdefault("noise_seed", spec.seed)
        data.setdefault("both_quadratures", spec.both_quadratures)
    unknown = set(data) - _FIELDS
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    return data


def load_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise DomainError(f"{path}: config must be a mapping")
    return _normalize(raw)


def build_config(experiment: str, file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge file values with CLI overrides (overrides win; ``None`` means unset)."""
    data = dict(file_values or {})
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    file_kind = data.pop("experiment", None)
    if file_kind is not None and file_kind != experiment:
        raise DomainError(f"config is for {file_kind!r}, but {experiment!r} was requested")
    return ExperimentConfig(experiment=experiment, **_normalize(data))

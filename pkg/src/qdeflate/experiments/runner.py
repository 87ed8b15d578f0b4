"""Experiment drivers: build tasks, run them (optionally in parallel), write results.

Every task is a pure function of (config, task key); random streams are
derived from the master seed and the key, and results are sorted by key
before writing, so output bytes do not depend on ``jobs``.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..deflation import (
    COVARIANCE,
    EXACT,
    IterationRecord,
    auto_shift,
    deflate,
    optimize_identity_shift,
)
from ..errors import DomainError
from ..linalg import Spectrum, eigh, fidelity, rel_energy_error
from ..models import (
    PerturbedCzSpec,
    h2_hamiltonian,
    load_coefficient_table,
    load_hamiltonian_file,
    partition_terms,
    perturbed_cz,
)
from ..pauli import PauliHamiltonian, hamiltonian_matrix
from .config import ExperimentConfig

log = logging.getLogger(__name__)

RESULT_HEADER = ["experiment", "key1", "key2", "iteration", "E_pred", "E_exact", "dE", "fidelity", "wall_ms"]
RESULTS_FILE = "results.csv"
TRACE_FILE = "trace.jsonl"
SUMMARY_FILE = "summary.csv"
SPECTRA_FILE = "spectra.csv"


def derive_seed(master: int, *keys: int) -> int:
    """Portable 63-bit seed for a task, from the master seed and integer keys."""
    state = np.random.SeedSequence([int(master), *(int(k) for k in keys)]).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class ResultRow:
    experiment: str
    key1: str
    key2: str
    iteration: int
    E_pred: float
    E_exact: float
    fidelity: float | None
    wall_ms: float | None = None

    @property
    def dE(self) -> float | None:
        try:
            return rel_energy_error(self.E_pred, self.E_exact)
        except DomainError:
            return None

    def cells(self, timing: bool) -> list[str]:
        wall = fmt(round(self.wall_ms, 3)) if timing and self.wall_ms is not None else ""
        return [
            self.experiment,
            self.key1,
            self.key2,
            str(self.iteration),
            fmt(self.E_pred),
            fmt(self.E_exact),
            fmt(self.dE),
            fmt(self.fidelity),
            wall,
        ]


@dataclass
class TaskResult:
    order: tuple
    rows: list[ResultRow] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class RunOutcome:
    out_dir: Path
    results: list[TaskResult]
    files: list[Path]

    @property
    def failures(self) -> list[TaskResult]:
        return [r for r in self.results if r.error is not None]

    @property
    def rows(self) -> list[ResultRow]:
        return [row for r in self.results for row in r.rows]

    @property
    def ok(self) -> bool:
        return not self.failures


# --- shared helpers ----------------------------------------------------------


def resolve_shift(h: PauliHamiltonian, config: ExperimentConfig, mode: str, depth: int):
    """Shift for one run, plus the sweep diagnostics when a sweep was made."""
    if mode == EXACT or config.shift == "auto":
        return (None if not isinstance(config.shift, float) else config.shift), None
    if isinstance(config.shift, float):
        return config.shift, None
    scan = optimize_identity_shift(h, depth, config.shift_sweep)
    if not scan.feasible:
        log.warning("identity-shift sweep found no feasible shift; falling back to %r", auto_shift(h))
        return None, scan
    return scan.best_shift, scan


def records_to_rows(
    experiment: str,
    key1: str,
    key2: str,
    records: list[IterationRecord],
    oracle: Spectrum,
    offset: float = 0.0,
    wall_ms: float | None = None,
    only: tuple[int, ...] | None = None,
) -> list[ResultRow]:
    rows = []
    for rec in records:
        if only is not None and rec.index not in only:
            continue
        if rec.index >= len(oracle):
            break
        rows.append(
            ResultRow(
                experiment,
                key1,
                key2,
                rec.index,
                rec.energy + offset,
                float(oracle.eigenvalues[rec.index]) + offset,
                fidelity(rec.ground_state, oracle.vector(rec.index)),
                wall_ms,
            )
        )
    return rows


def trace_lines(experiment: str, key1: str, key2: str, records, oracle: Spectrum | None = None) -> list[dict]:
    out = []
    for rec in records:
        d = {"experiment": experiment, "key1": key1, "key2": key2, **rec.to_json()}
        if oracle is not None and rec.index < len(oracle):
            d["fidelity_vs_oracle"] = fidelity(rec.ground_state, oracle.vector(rec.index))
        out.append(d)
    return out


# --- tasks ---------------------------------------------------------------------


def _h2_task(config: ExperimentConfig, i: int, w_index: int | None) -> TaskResult:
    table = load_coefficient_table(config.table)
    row = table.row(i)
    h = h2_hamiltonian(row)
    oracle = eigh(hamiltonian_matrix(h))
    key1 = f"R={row.R!r}"
    mode = config.mode
    shift, _ = resolve_shift(h, config, mode, config.iterations)
    if w_index is None:
        experiment, key2, noise = "h2-curve", "", None
    else:
        W = float(config.noise_grid[w_index])
        experiment, key2 = "h2-noise", f"W={W!r}"
        seed = config.noise_seed if config.noise_seed is not None else config.seed
        noise = config.noise_spec(W, derive_seed(seed, i))
    records = deflate(h, config.iterations, mode=mode, noise=noise, shift=shift)
    rows = records_to_rows(experiment, key1, key2, records, oracle, offset=row.e_nuc)
    return TaskResult(
        order=(i, -1 if w_index is None else w_index),
        rows=rows,
        trace=trace_lines(experiment, key1, key2, records, oracle),
    )


def _cz_task(config: ExperimentConfig, n: int, b_index: int, r: int) -> TaskResult:
    beta1 = float(config.beta1_grid[b_index])
    # lambda draws depend on (N, r) only, so every beta sees the same C_z part
    spec = PerturbedCzSpec(n, beta1=beta1, beta2=config.beta2, seed=derive_seed(config.seed, n, r))
    h = perturbed_cz(spec)
    oracle = eigh(hamiltonian_matrix(h))
    shift, scan = resolve_shift(h, config, config.mode, 1)
    if scan is not None and scan.feasible and shift == scan.best_shift:
        records = list(scan.records)
    else:
        records = deflate(h, 1, mode=config.mode, shift=shift)
    key1, key2 = f"N={n}", f"beta1={beta1!r};r={r}"
    rows = records_to_rows("cz-scaling", key1, key2, records, oracle, only=(1,))
    return TaskResult(
        order=(n, b_index, r),
        rows=rows,
        trace=trace_lines("cz-scaling", key1, key2, records, oracle),
    )


def _molecule_task(config: ExperimentConfig) -> TaskResult:
    loaded = load_hamiltonian_file(config.hamiltonian)
    h = loaded.hamiltonian
    cz, rest = partition_terms(h)
    oracle = eigh(hamiltonian_matrix(h))
    depth = config.iterations
    scan = optimize_identity_shift(h, depth, config.shift_sweep, exhaustive=True)
    if config.shift == "sweep":
        cov_shift = scan.best_shift if scan.feasible else None
    elif config.shift == "auto":
        cov_shift = None
    else:
        cov_shift = float(config.shift)
    cov = deflate(h, depth, mode=COVARIANCE, shift=cov_shift)
    exact = deflate(h, depth, mode=EXACT, shift=None)

    rows, trace = [], []
    for mode, records in ((COVARIANCE, cov), (EXACT, exact)):
        key1 = f"mode={mode}"
        key2 = f"shift={records[0].shift!r}"
        rows += records_to_rows("molecule", key1, key2, records, oracle)
        trace += trace_lines("molecule", key1, key2, records, oracle)

    spectra = [("oracle", 0, k, float(e)) for k, e in enumerate(oracle.eigenvalues)]
    for mode, records in ((COVARIANCE, cov), (EXACT, exact)):
        for rec in records:
            spectra += [(mode, rec.index, k, float(e)) for k, e in enumerate(rec.spectrum)]

    first_excited = next((r.fidelity for r in rows if r.key1 == f"mode={COVARIANCE}" and r.iteration == 1), None)
    summary = {
        "hamiltonian": config.hamiltonian,
        "n_qubits": h.n_qubits,
        "n_terms": len(h),
        "n_cz_terms": len(cz),
        "n_perturbation_terms": len(rest),
        "identity_augmented": loaded.augmented,
        "shift_scan": {
            "best_shift": scan.best_shift,
            "iterations_satisfied": scan.passed,
            "depth": scan.depth,
            "feasible": scan.feasible,
            "first_failure": scan.first_failure,
            "candidates": [
                {"shift": c.shift, "passed": c.passed, "first_failure": c.first_failure}
                for c in scan.candidates
            ],
        },
        "covariance_shift": cov[0].shift,
        "exact_shift": exact[0].shift,
        "first_excited_fidelity": first_excited,
        "ordering_violations": [
            rec.index
            for prev, rec in zip(cov, cov[1:])
            if rec.energy < prev.energy - 1e-9
        ],
    }
    return TaskResult(order=(0,), rows=rows, trace=trace, extra={"spectra": spectra, "summary": summary})


def _run_task(args) -> TaskResult:
    kind, config, params = args
    start = time.perf_counter()
    try:
        if kind == "h2":
            result = _h2_task(config, *params)
        elif kind == "cz":
            result = _cz_task(config, *params)
        elif kind == "molecule":
            result = _molecule_task(config)
        else:
            raise DomainError(f"unknown task kind {kind!r}")
    except Exception as exc:  # failure isolation: one bad grid point does not stop the run
        log.error("task %s %s failed: %s", kind, params, exc)
        return TaskResult(order=tuple(params), error=f"{type(exc).__name__}: {exc}")
    wall = (time.perf_counter() - start) * 1e3
    for row in result.rows:
        row.wall_ms = wall
    return result


def build_tasks(config: ExperimentConfig) -> list[tuple]:
    kind = config.experiment
    if kind in ("h2-curve", "h2-noise"):
        n_rows = len(load_coefficient_table(config.table))
        if kind == "h2-curve":
            return [("h2", config, (i, None)) for i in range(n_rows)]
        return [("h2", config, (i, w)) for i in range(n_rows) for w in range(len(config.noise_grid))]
    if kind == "cz-scaling":
        return [
            ("cz", config, (n, b, r))
            for n in config.n_grid
            for b in range(len(config.beta1_grid))
            for r in range(config.realizations)
        ]
    if kind == "external-molecule":
        return [("molecule", config, ())]
    raise DomainError(f"unknown experiment {kind!r}")


def map_tasks(tasks: list[tuple], jobs: int) -> list[TaskResult]:
    if jobs <= 1 or len(tasks) <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(tasks) // (4 * jobs))
            results = list(pool.map(_run_task, tasks, chunksize=chunk))
    return sorted(results, key=lambda r: r.order)


# --- output --------------------------------------------------------------------


def write_results(path: Path, rows: list[ResultRow], timing: bool) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for row in rows:
            writer.writerow(row.cells(timing))


def read_results(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_HEADER:
            raise DomainError(f"{path}: unexpected header {reader.fieldnames}")
        return list(reader)


def parse_key(key: str) -> dict:
    """``"beta1=0.5;r=3"`` -> ``{"beta1": "0.5", "r": "3"}``."""
    out = {}
    for part in filter(None, key.split(";")):
        name, _, value = part.partition("=")
        out[name] = value
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def _summary_rows(config: ExperimentConfig, rows: list[ResultRow]):
    kind = config.experiment
    if kind == "cz-scaling":
        groups: dict[tuple, list[ResultRow]] = {}
        for row in rows:
            n = int(parse_key(row.key1)["N"])
            beta = float(parse_key(row.key2)["beta1"])
            groups.setdefault((n, beta), []).append(row)
        header = ["N", "inv_N", "beta1", "mean_dE", "mean_F", "realizations"]
        body = []
        for (n, beta), g in sorted(groups.items()):
            dEs = [r.dE for r in g if r.dE is not None]
            body.append((n, 1.0 / n, beta, float(np.mean(dEs)) if dEs else None,
                         float(np.mean([r.fidelity for r in g])), len(g)))
        return header, body
    if kind in ("h2-curve", "h2-noise"):
        groups = {}
        for row in rows:
            groups.setdefault((row.key2, row.iteration), []).append(row)
        header = ["key2", "state", "points", "max_dE", "median_F", "frac_F_ge_0.95"]
        body = []
        for (key2, state), g in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            fids = np.array([r.fidelity for r in g])
            dEs = [r.dE for r in g if r.dE is not None]
            body.append((key2, state, len(g), max(dEs) if dEs else None,
                         float(np.median(fids)), float(np.mean(fids >= 0.95))))
        return header, body
    return None


def run_experiment(config: ExperimentConfig) -> RunOutcome:
    """Run one experiment and write its result files into ``config.out``."""
    config.check_paths()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    results = map_tasks(build_tasks(config), config.jobs)
    rows = [row for r in results for row in r.rows]

    files = [out / RESULTS_FILE, out / TRACE_FILE]
    write_results(files[0], rows, config.timing)
    with open(files[1], "w", encoding="utf-8") as fh:
        for r in results:
            for line in r.trace:
                fh.write(json.dumps(line) + "\n")

    summary = _summary_rows(config, rows)
    if summary is not None:
        files.append(out / SUMMARY_FILE)
        _write_csv(files[-1], *summary)
    for r in results:
        if "spectra" in r.extra:
            files.append(out / SPECTRA_FILE)
            _write_csv(files[-1], ["source", "iteration", "level", "eigenvalue"], r.extra["spectra"])
        if "summary" in r.extra:
            files.append(out / "summary.json")
            files[-1].write_text(json.dumps(r.extra["summary"], indent=2) + "\n", encoding="utf-8")

    failed = [r for r in results if r.error is not None]
    if failed:
        files.append(out / "failures.txt")
        files[-1].write_text("".join(f"{r.order}\t{r.error}\n" for r in failed), encoding="utf-8")

    if config.plots:
        from .plots import emit_plots

        files += emit_plots(out)
    return RunOutcome(out, results, files)


def run_h2_curve(config: ExperimentConfig) -> RunOutcome:
    return run_experiment(_with_kind(config, "h2-curve"))


def run_h2_noise(config: ExperimentConfig) -> RunOutcome:
    return run_experiment(_with_kind(config, "h2-noise"))


def run_cz_scaling(config: ExperimentConfig) -> RunOutcome:
    return run_experiment(_with_kind(config, "cz-scaling"))


def run_external_molecule(config: ExperimentConfig) -> RunOutcome:
    return run_experiment(_with_kind(config, "external-molecule"))


def _with_kind(config: ExperimentConfig, kind: str) -> ExperimentConfig:
    if config.experiment != kind:
        raise DomainError(f"config is for {config.experiment!r}, not {kind!r}")
    return config

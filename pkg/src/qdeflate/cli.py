"""``qdeflate`` command line: run experiments, re-render plots, write fixtures."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import QDeflateError
from .experiments.config import SUBCOMMANDS, build_config, load_config_file
from .experiments.plots import emit_plots
from .experiments.runner import run_experiment
from .models import PerturbedCzSpec, perturbed_cz, save_coefficient_table, save_hamiltonian_file, synthetic_h2_table

log = logging.getLogger("qdeflate")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML config; flags override its keys")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--mode", choices=("exact", "covariance"), help="deflation mode")
    p.add_argument("--iterations", type=int, help="out-projections per run")
    p.add_argument("--shift", help="'sweep', 'auto' or a number")
    p.add_argument("--table", help="H2 coefficient CSV")
    p.add_argument("--hamiltonian", help="Hamiltonian text file")
    p.add_argument("--realizations", type=int, help="random draws per grid point")
    p.add_argument("--n-grid", type=int, nargs="+", dest="n_grid", help="qubit counts")
    p.add_argument("--beta1-grid", type=float, nargs="+", dest="beta1_grid", help="X-family strengths")
    p.add_argument("--noise-grid", type=float, nargs="+", dest="noise_grid", help="noise strengths W")
    p.add_argument("--noise-seed", type=int, dest="noise_seed", help="seed for noise draws")
    p.add_argument("--timing", action="store_true", default=None, help="fill the wall_ms column")
    p.add_argument("--no-plots", action="store_false", dest="plots", default=None, help="skip SVG output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdeflate", description="Excited states by iterative deflation.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        _add_common(sub.add_parser(name, help=f"run the {name} experiment"))

    plot = sub.add_parser("plot", help="render SVGs from a result directory")
    plot.add_argument("results", type=Path)
    plot.add_argument("--out", type=Path)

    fix = sub.add_parser("fixture", help="write synthetic input files")
    fix.add_argument("kind", choices=("h2-table", "molecule"))
    fix.add_argument("path", type=Path)
    fix.add_argument("--seed", type=int, default=0)
    fix.add_argument("--points", type=int, default=20, help="R grid size (h2-table)")
    fix.add_argument("--qubits", type=int, default=4, help="qubit count (molecule)")
    fix.add_argument("--beta1", type=float, default=0.3)
    fix.add_argument("--beta2", type=float, default=0.0)
    return parser


_RUN_KEYS = (
    "out", "seed", "jobs", "mode", "iterations", "shift", "table", "hamiltonian", "realizations",
    "n_grid", "beta1_grid", "noise_grid", "noise_seed", "timing", "plots",
)


def _run(args) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in _RUN_KEYS}
    config = build_config(SUBCOMMANDS[args.command], file_values, overrides)
    outcome = run_experiment(config)
    for path in outcome.files:
        print(path)
    if outcome.failures:
        for r in outcome.failures:
            print(f"failed: {r.order}: {r.error}", file=sys.stderr)
        return 1
    return 0


def _fixture(args) -> int:
    if args.kind == "h2-table":
        save_coefficient_table(synthetic_h2_table(args.points, args.seed), args.path)
    else:
        spec = PerturbedCzSpec(args.qubits, beta1=args.beta1, beta2=args.beta2, seed=args.seed)
        header = f"synthetic perturbed C_z: N={spec.n_qubits} beta1={spec.beta1} beta2={spec.beta2} seed={spec.seed}"
        save_hamiltonian_file(perturbed_cz(spec), args.path, header=header)
    print(args.path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            for path in emit_plots(args.results, args.out):
                print(path)
            return 0
        if args.command == "fixture":
            return _fixture(args)
        return _run(args)
    except (QDeflateError, FileNotFoundError, OSError) as exc:
        print(f"qdeflate: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Deterministic SVG charts rendered from result CSVs."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..errors import DomainError, ParseError  # noqa: E402
from .runner import RESULTS_FILE, SPECTRA_FILE, parse_key, read_results  # noqa: E402

# fixed ids and no timestamp keep the SVG bytes stable across runs
plt.rcParams["svg.hashsalt"] = "qdeflate"
plt.rcParams["svg.fonttype"] = "none"
_META = {"Date": None, "Creator": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def _num(text: str) -> float:
    return float(text) if text else float("nan")


def _empty(path: Path, title: str) -> Path:
    fig, ax = plt.subplots()
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, path)


def _key_value(key: str, name: str) -> float:
    return float(parse_key(key)[name])


def _h2_plots(rows: list[dict], out: Path) -> list[Path]:
    # one figure per (noise level, excited state)
    groups: dict[tuple[str, int], list[dict]] = defaultdict(list)
    for r in rows:
        groups[(r["key2"], int(r["iteration"]))].append(r)
    paths = []
    for (key2, state), g in sorted(groups.items()):
        if state == 0:
            continue
        g.sort(key=lambda r: _key_value(r["key1"], "R"))
        R = [_key_value(r["key1"], "R") for r in g]
        fig, ax = plt.subplots()
        ax.plot(R, [_num(r["E_exact"]) for r in g], "-", label="exact")
        ax.plot(R, [_num(r["E_pred"]) for r in g], "o", fillstyle="none", label="deflation")
        suffix = f" ({key2})" if key2 else ""
        ax.set_title(f"{g[0]['experiment']}: E{state}{suffix}")
        ax.set_xlabel("R")
        ax.set_ylabel("energy")
        ax.legend()
        tag = f"_{key2.replace('=', '')}" if key2 else ""
        paths.append(_save(fig, out / f"{g[0]['experiment']}_E{state}{tag}.svg"))
    return paths


def _cz_plots(rows: list[dict], out: Path) -> list[Path]:
    acc: dict[float, dict[int, list[tuple[float, float]]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        n = int(_key_value(r["key1"], "N"))
        beta = _key_value(r["key2"], "beta1")
        acc[beta][n].append((_num(r["dE"]), _num(r["fidelity"])))
    paths = []
    for col, label, name in ((0, "mean dE", "dE"), (1, "mean F", "F")):
        fig, ax = plt.subplots()
        for beta in sorted(acc):
            ns = sorted(acc[beta])
            means = [sum(v[col] for v in acc[beta][n]) / len(acc[beta][n]) for n in ns]
            ax.plot([1.0 / n for n in ns], means, "o-", label=f"beta1={beta:g}")
        ax.set_title(f"cz-scaling: {label} vs 1/N")
        ax.set_xlabel("1/N")
        ax.set_ylabel(label)
        ax.legend()
        paths.append(_save(fig, out / f"cz-scaling_{name}.svg"))
    return paths


def _spectra_plot(path: Path, out: Path) -> list[Path]:
    with open(path, newline="", encoding="utf-8") as fh:
        data = list(csv.DictReader(fh))
    fig, ax = plt.subplots()
    sources = sorted({d["source"] for d in data})
    for i, source in enumerate(sources):
        pts = [d for d in data if d["source"] == source]
        x = [int(d["iteration"]) + 0.25 * (i - (len(sources) - 1) / 2) for d in pts]
        ax.plot(x, [float(d["eigenvalue"]) for d in pts], "_", markersize=12, label=source)
    ax.set_title("molecule: effective spectrum per iteration")
    ax.set_xlabel("iteration")
    ax.set_ylabel("eigenvalue")
    ax.legend()
    return [_save(fig, out / "molecule_spectra.svg")]


def emit_plots(result_dir, out_dir=None) -> list[Path]:
    """Render the charts for a result directory; returns the SVG paths."""
    result_dir = Path(result_dir)
    out = Path(out_dir) if out_dir is not None else result_dir
    out.mkdir(parents=True, exist_ok=True)
    results = result_dir / RESULTS_FILE
    if not results.exists():
        raise ParseError("no results.csv in result directory", path=result_dir)
    try:
        rows = read_results(results)
    except (csv.Error, ValueError, DomainError) as exc:
        raise ParseError(str(exc), path=results) from None
    if not rows:
        return [_empty(out / "empty.svg", "no results")]
    kinds = {r["experiment"] for r in rows}
    paths = []
    try:
        if kinds & {"h2-curve", "h2-noise"}:
            paths += _h2_plots([r for r in rows if r["experiment"] in ("h2-curve", "h2-noise")], out)
        if "cz-scaling" in kinds:
            paths += _cz_plots([r for r in rows if r["experiment"] == "cz-scaling"], out)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"malformed result row: {exc}", path=results) from None
    if (result_dir / SPECTRA_FILE).exists():
        paths += _spectra_plot(result_dir / SPECTRA_FILE, out)
    return paths

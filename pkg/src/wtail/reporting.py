"""CSV, pretty-table, and manifest emission.

All delimited output is written with full 17-significant-digit precision
and a fixed line terminator so that byte-for-byte comparison across runs
and worker counts is meaningful.  Pretty text tables round to a
configurable digit count for eyeball comparison against published
layouts; they are companions to, never replacements for, the CSVs.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

from . import __version__
from .core import EstimatorSpec
from .engine import CurveSet, OptimalSummary

__all__ = [
    "fmt_full",
    "fmt_digits",
    "slug",
    "write_curves_csv",
    "write_table_csv",
    "write_pretty_table",
    "write_manifest",
]


def fmt_full(x: float) -> str:
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def fmt_digits(x: float, digits: int) -> str:
    if x != x:
        return "nan"
    return format(float(x), f".{digits}f")


def slug(text: str) -> str:
    """Filesystem-safe variant of a model identifier."""
    return re.sub(r"[^\w.\-]+", "_", text).strip("_")


def _open_csv(path: Path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_curves_csv(
    path: Path,
    estimators: tuple[EstimatorSpec, ...],
    curves: dict[EstimatorSpec, CurveSet],
) -> None:
    """One row per k: column k, then mean_<id>, rmse_<id> per estimator."""
    specs = list(dict.fromkeys(estimators))
    header = ["k"]
    for spec in specs:
        header += [f"mean_{spec.label}", f"rmse_{spec.label}"]
    k = curves[specs[0]].k
    fh, writer = _open_csv(path)
    with fh:
        writer.writerow(header)
        for i, kk in enumerate(k):
            row = [str(int(kk))]
            for spec in specs:
                cs = curves[spec]
                row += [fmt_full(cs.mean[i]), fmt_full(cs.rmse[i])]
            writer.writerow(row)


def write_table_csv(
    path: Path,
    n_grid: tuple[int, ...],
    rows: list[tuple[str, EstimatorSpec, dict[int, OptimalSummary]]],
    value: str,
) -> None:
    """Optimal-level table: rows (model, estimator, p), one column per n.

    ``value`` selects the reported field: mean (mean at the optimal
    level), rmse (minimal RMSE), or osf (optimal sample fraction).
    """
    attr = {"mean": "mean_at_opt", "rmse": "rmse_at_opt", "osf": "osf"}[value]
    fh, writer = _open_csv(path)
    with fh:
        writer.writerow(["model", "estimator", "p"] + [str(n) for n in n_grid])
        for model_id, spec, by_n in rows:
            cells = [
                fmt_full(getattr(by_n[n], attr)) if n in by_n else "nan"
                for n in n_grid
            ]
            writer.writerow([model_id, spec.family.value, f"{spec.p:g}"] + cells)


def write_pretty_table(
    path: Path,
    title: str,
    n_grid: tuple[int, ...],
    rows: list[tuple[str, EstimatorSpec, dict[int, OptimalSummary]]],
    value: str,
    digits: int = 4,
) -> None:
    attr = {"mean": "mean_at_opt", "rmse": "rmse_at_opt", "osf": "osf"}[value]
    width = max(digits + 4, 8)
    lines = [title, ""]
    header = f"{'':28s}" + "".join(f"{n:>{width}d}" for n in n_grid)
    current_model = None
    for model_id, spec, by_n in rows:
        if model_id != current_model:
            lines.append(f"-- {model_id}")
            current_model = model_id
        label = f"{spec.family.value}, p={spec.p:g}"
        cells = "".join(
            f"{fmt_digits(getattr(by_n[n], attr), digits) if n in by_n else 'nan':>{width}s}"
            for n in n_grid
        )
        lines.append(f"{label:28s}" + cells)
    lines.insert(2, header)
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(
    out_dir: Path,
    command: str,
    experiment_seed: int,
    replications: int,
    workers: int,
    wall_time_s: float,
    config_echo: str,
    outputs: list[str],
) -> Path:
    """Record what a run produced; written after every listed output."""
    manifest = {
        "tool": "wtail",
        "version": __version__,
        "command": command,
        "experiment_seed": experiment_seed,
        "replications": replications,
        "workers": workers,
        "wall_time_s": round(wall_time_s, 3),
        "config_echo": config_echo,
        "outputs": sorted(outputs),
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path

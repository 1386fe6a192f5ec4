"""
SVG line charts of series CSVs.

Rendering is byte-stable: Agg backend, fixed SVG hash salt, no date metadata.
"""

import csv
import os
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from gcm.logger import get_logger  # noqa: E402
from gcm.sweep import SweepError  # noqa: E402

logger = get_logger(__name__)

DEFAULT_COLUMNS = ("I3",)


def read_series(path: str) -> Dict[str, List[float]]:
    """
    Columns of a series CSV as float lists.

    Raises:
        SweepError: If the file is missing, empty, ragged or non-numeric
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise SweepError(f"cannot read {path}: {e}")
    if len(rows) < 2:
        raise SweepError(f"{path}: no data rows")
    header, body = rows[0], rows[1:]
    columns: Dict[str, List[float]] = {name: [] for name in header}
    for number, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise SweepError(f"{path}:{number}: expected {len(header)} fields, got {len(row)}")
        for name, cell in zip(header, row):
            try:
                columns[name].append(float(cell) if cell != "" else float("nan"))
            except ValueError:
                raise SweepError(f"{path}:{number}: column {name!r} is not numeric ({cell!r})")
    return columns


def plot_series(paths: Sequence[str], out_path: str, columns: Sequence[str] = DEFAULT_COLUMNS, x: str = "L") -> str:
    """One polyline per (file, column) pair, written as a self-contained SVG."""
    if not paths:
        raise SweepError("no series files given")
    series = [(path, read_series(path)) for path in paths]

    plt.rcParams["svg.hashsalt"] = "gcm"
    plt.rcParams["svg.fonttype"] = "path"
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        for path, data in series:
            if x not in data:
                raise SweepError(f"{path}: missing x column {x!r}")
            stem = os.path.splitext(os.path.basename(path))[0]
            for column in columns:
                if column not in data:
                    raise SweepError(f"{path}: missing column {column!r}")
                label = f"{stem} {column}" if len(columns) > 1 else stem
                ax.plot(data[x], data[column], label=label, linewidth=1.2)
        ax.set_xlabel(x)
        ax.set_ylabel(", ".join(columns))
        ax.axhline(0.0, color="0.6", linewidth=0.6)
        ax.legend(fontsize=7)
        fig.tight_layout()
        os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.info(f"Wrote {out_path}")
    return out_path

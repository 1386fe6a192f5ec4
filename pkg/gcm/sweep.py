"""
Run plumbing for the CLI: deterministic CSV emission, run manifests, and the
bounded worker pool used for parameter sweeps.

Floats are written with repr() (shortest round-trip form), rows end in '\\n'
and nothing time-dependent reaches an output file.
"""

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from pydantic import ValidationError

from gcm import __version__
from gcm.config import current_config
from gcm.info import CSV_COLUMNS, InfoRecord, info_series
from gcm.logger import get_logger
from gcm.nonmarkov import NegativityReport, PhaseResult, negativity, phase_diagram
from gcm.scenario import (
    PhaseGrid,
    ScenarioConfig,
    ScenarioError,
    SqueezedAltEnv,
    SqueezedC,
    SqueezedSameEnv,
    ThermalEnv,
    VacuumEnv,
    config_digest,
)

logger = get_logger(__name__)

SWEEP_AXES = ("delta_phi", "theta_ee", "theta_se", "n_E", "phi_E")
PHASE_COLUMNS = ("theta_se", "theta_ee", "D", "markovian")
NONMARKOV_COLUMNS = ("L", "c11", "x2", "lambda_minus", "lambda_plus", "D", "lnD", "degenerate")
INDEX_COLUMNS = ("point", "axis", "value", "file", "min_I3", "L_min_I3", "I3_final", "I2_ABC_final")


class SweepError(ValueError):
    """Unknown sweep axis, or a series file that cannot be used."""

    pass


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    logger.info(f"Wrote {path}")
    return path


def write_manifest(out_dir: str, command: str, cfg: ScenarioConfig, outputs: List[str]) -> str:
    manifest = {
        "command": command,
        "config_digest": config_digest(cfg),
        "version": __version__,
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def write_series(path: str, records: List[InfoRecord]) -> str:
    return write_csv(path, CSV_COLUMNS, (r.row() for r in records))


def run_evolve(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    """Write the InfoRecord series of one scenario; returns the files written."""
    logger.info(f"Evolving scenario '{cfg.name}' (digest {config_digest(cfg)[:12]})")
    records = info_series(cfg)
    return [write_series(os.path.join(out_dir, f"{cfg.name}.csv"), records)]


def run_phase(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    grid = cfg.phase or PhaseGrid()
    result: PhaseResult = phase_diagram(grid, cfg.env_specs(grid.L), cfg.channel)
    path = os.path.join(out_dir, f"{cfg.name}_phase.csv")
    return [write_csv(path, PHASE_COLUMNS, result.rows())]


def nonmarkov_rows(report: NegativityReport):
    for s in report.steps:
        yield [s.L, s.c11, s.x2, s.lambda_minus, s.lambda_plus, s.D, s.lnD, s.degenerate]


def run_nonmarkov(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    if cfg.L_max < 3:
        raise ScenarioError("L_max", "the non-Markovianity table needs L_max >= 3")
    report = negativity(cfg)
    logger.info(f"Scenario '{cfg.name}': D({cfg.L_max}) = {report.D:.6g}, degenerate steps {report.degenerate_count}")
    path = os.path.join(out_dir, f"{cfg.name}_nonmarkov.csv")
    return [write_csv(path, NONMARKOV_COLUMNS, nonmarkov_rows(report))]


def _with_env(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    data = cfg.env.model_dump(mode="json")
    data.update(changes)
    return cfg.updated(env=data)


def apply_axis(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """
    Scenario for one sweep point.

    Angle axes take units of pi; delta_phi is the environment-minus-C squeezing
    angle for squeezed-same environments and the odd-index offset for
    squeezed-alternative ones.

    Raises:
        SweepError: If the axis is unknown or does not apply to the environment
        ScenarioError: If the value is out of range
    """
    env = cfg.env
    try:
        if axis == "theta_se":
            return cfg.updated(theta_se_pi=value)
        if axis == "theta_ee":
            return cfg.updated(theta_ee_pi=value)
        if axis == "n_E":
            if isinstance(env, VacuumEnv):
                return cfg.updated(env=ThermalEnv(n_e=value).model_dump(mode="json"))
            if isinstance(env, (ThermalEnv, SqueezedSameEnv, SqueezedAltEnv)):
                return _with_env(cfg, n_e=value)
        if axis == "phi_E" and isinstance(env, (SqueezedSameEnv, SqueezedAltEnv)):
            return _with_env(cfg, phi_e_pi=value)
        if axis == "delta_phi":
            if isinstance(env, SqueezedSameEnv):
                phi_c = cfg.c_state.phi_c_pi if isinstance(cfg.c_state, SqueezedC) else 0.0
                return _with_env(cfg, phi_e_pi=phi_c + value)
            if isinstance(env, SqueezedAltEnv):
                return _with_env(cfg, delta_phi_pi=value)
    except ValidationError as e:
        first = e.errors()[0]
        raise ScenarioError("sweep.values", f"{axis}={value}: {first['msg']}")
    if axis not in SWEEP_AXES:
        raise SweepError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    raise SweepError(f"axis {axis!r} does not apply to '{env.kind}' environments")


@dataclass
class SweepPoint:
    index: int
    value: float
    cfg: ScenarioConfig
    path: str
    records: Optional[List[InfoRecord]] = None


def _index_row(point: SweepPoint, axis: str):
    worst = min(point.records, key=lambda r: r.I3)
    last = point.records[-1]
    return [point.index, axis, point.value, os.path.basename(point.path), worst.I3, worst.L, last.I3, last.I2_ABC]


def run_sweep(cfg: ScenarioConfig, out_dir: str, workers: Optional[int] = None) -> List[str]:
    """
    Evaluate every point of cfg.sweep on a bounded thread pool.

    Each point writes its own series file; the index is written once all
    points are done, in point order regardless of completion order.
    """
    if cfg.sweep is None:
        raise SweepError(f"scenario '{cfg.name}' has no sweep section")
    axis = cfg.sweep.axis
    points = []
    for i, value in enumerate(cfg.sweep.values):
        point_cfg = apply_axis(cfg, axis, value).updated(name=f"{cfg.name}_{axis}_{i:02d}", sweep=None)
        points.append(SweepPoint(i, value, point_cfg, os.path.join(out_dir, f"{point_cfg.name}.csv")))

    workers = workers or current_config.worker_count()
    logger.info(f"Sweep '{cfg.name}' over {axis}: {len(points)} point(s) on {workers} worker(s)")

    def evaluate(point: SweepPoint) -> SweepPoint:
        point.records = info_series(point.cfg)
        write_series(point.path, point.records)
        logger.info(f"Sweep point {point.index} ({axis}={point.value}) done")
        return point

    with ThreadPoolExecutor(max_workers=workers) as pool:
        done = list(pool.map(evaluate, points))

    index_path = os.path.join(out_dir, f"{cfg.name}_index.csv")
    write_csv(index_path, INDEX_COLUMNS, (_index_row(p, axis) for p in done))
    return [p.path for p in done] + [index_path]

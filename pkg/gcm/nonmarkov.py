"""
Divisibility-based non-Markovianity of the single-mode dissipative channel.

After L collisions the channel acting on the system mode is
sigma -> X_L sigma X_L^T + Y_L with X_L = c11(L) I and
Y_L = sum_{k>=2} c_{1k}(L)^2 sigma_{E_k}, read off the single-channel
scattering matrix. The intermediate map from L-1 to L is completely positive
iff Lambda_L is positive semidefinite; D(L) accumulates the negative parts of
its spectrum over the steps 3..L.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from gcm.config import current_config
from gcm.gstate import SingleModeSpec, single_mode_cov, symplectic_form
from gcm.logger import get_logger
from gcm.optics import ScatterError, channel_scatter, iter_channel_scatter
from gcm.scenario import PhaseGrid, ScenarioConfig

logger = get_logger(__name__)

MARKOV_TOL = 1e-12
DEGENERATE_TOL = 1e-12
OMEGA = symplectic_form(1)

EnvLike = Union[SingleModeSpec, Sequence[SingleModeSpec]]


class DegenerateStepError(ValueError):
    """Raised when c11(L-1) vanishes and the one-step map is undefined."""

    pass


@dataclass(frozen=True)
class ChannelMap:
    L: int
    c11: float
    X: NDArray[np.float64]
    Y: NDArray[np.float64]

    def apply(self, sigma_in: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.X @ np.asarray(sigma_in, dtype=float) @ self.X.T + self.Y


@dataclass(frozen=True)
class LambdaMat:
    L: int
    matrix: NDArray[np.complex128]
    x2: float

    def eigenvalues(self) -> NDArray[np.float64]:
        """Ascending real spectrum of the Hermitian matrix."""
        return np.linalg.eigvalsh(self.matrix)


def _env_covs(env: EnvLike, count: int) -> List[NDArray[np.float64]]:
    if isinstance(env, SingleModeSpec):
        cov = single_mode_cov(env).data
        return [cov] * count
    specs = list(env)
    if len(specs) < count:
        raise ValueError(f"need {count} environment states, got {len(specs)}")
    return [single_mode_cov(spec).data for spec in specs[:count]]


def _map_from_row(L: int, row: NDArray[np.float64], env_covs: List[NDArray[np.float64]]) -> ChannelMap:
    Y = np.zeros((2, 2))
    for k, cov in enumerate(env_covs, start=1):
        Y += row[k] ** 2 * cov
    return ChannelMap(L=L, c11=float(row[0]), X=row[0] * np.eye(2), Y=Y)


def channel_map(L: int, theta_se: float, theta_ee: float, env: EnvLike, channel: str = "C") -> ChannelMap:
    """
    Gaussian channel on the system mode after L >= 2 collisions.

    Args:
        env: One state shared by every environment mode, or a per-index list (E_1 first)
    """
    if L < 2:
        raise ScatterError(f"channel map needs L >= 2, got {L}")
    S = channel_scatter(L, theta_se, theta_ee, channel)
    return _map_from_row(L, S.data[0], _env_covs(env, L - 1))


def iter_channel_maps(
    L_max: int, theta_se: float, theta_ee: float, env: EnvLike, channel: str = "C"
) -> Iterator[ChannelMap]:
    covs = _env_covs(env, L_max - 1)
    for L, S in iter_channel_scatter(L_max, theta_se, theta_ee, channel):
        yield _map_from_row(L, S.data[0], covs[:L - 1])


def lambda_matrix(map_L: ChannelMap, map_Lm1: ChannelMap) -> LambdaMat:
    """
    Lambda_L = Y_{L,L-1} - (i/2) Omega + (i/2) X_{L,L-1} Omega X_{L,L-1}^T.

    Raises:
        DegenerateStepError: If X_{L-1} is singular
    """
    if map_L.L != map_Lm1.L + 1:
        raise ValueError(f"maps must be consecutive, got L={map_L.L} and L={map_Lm1.L}")
    if abs(map_Lm1.c11) < DEGENERATE_TOL:
        raise DegenerateStepError(f"c11({map_Lm1.L}) = {map_Lm1.c11:.3e}; one-step map undefined")
    x_step = map_L.X @ np.linalg.inv(map_Lm1.X)
    y_step = map_L.Y - x_step @ map_Lm1.Y @ x_step.T
    lam = y_step - 0.5j * OMEGA + 0.5j * (x_step @ OMEGA @ x_step.T)
    lam = 0.5 * (lam + lam.conj().T)
    return LambdaMat(L=map_L.L, matrix=lam, x2=(map_L.c11 / map_Lm1.c11) ** 2)


@dataclass
class StepRow:
    L: int
    c11: float
    x2: float
    lambda_minus: float
    lambda_plus: float
    D: float
    degenerate: bool

    @property
    def lnD(self) -> Optional[float]:
        return math.log(self.D) if self.D > 0 else None


@dataclass
class NegativityReport:
    """Cumulative negativity D(L_max) with the per-step table behind it."""

    L_max: int
    steps: List[StepRow] = field(default_factory=list)

    @property
    def D(self) -> float:
        return self.steps[-1].D if self.steps else 0.0

    @property
    def lnD(self) -> Optional[float]:
        return math.log(self.D) if self.D > 0 else None

    @property
    def degenerate_count(self) -> int:
        return sum(1 for s in self.steps if s.degenerate)

    @property
    def markovian(self) -> bool:
        return self.D <= MARKOV_TOL


def _negative_part(eigs: NDArray[np.float64]) -> float:
    return float(np.sum((np.abs(eigs) - eigs) / 2.0))


def negativity_at(
    L_max: int, theta_se: float, theta_ee: float, env: EnvLike, channel: str = "C"
) -> NegativityReport:
    """D(L) = sum over steps 3..L of the negative parts of spec(Lambda); degenerate steps are skipped."""
    if L_max < 3:
        raise ValueError(f"L_max must be >= 3, got {L_max}")
    report = NegativityReport(L_max=L_max)
    previous = None
    total = 0.0
    for current in iter_channel_maps(L_max, theta_se, theta_ee, env, channel):
        if previous is not None:
            try:
                lam = lambda_matrix(current, previous)
            except DegenerateStepError as e:
                logger.debug(f"skipping degenerate step L={current.L}: {e}")
                report.steps.append(StepRow(current.L, current.c11, math.nan, math.nan, math.nan, total, True))
            else:
                eigs = lam.eigenvalues()
                total += _negative_part(eigs)
                report.steps.append(
                    StepRow(current.L, current.c11, lam.x2, float(eigs[0]), float(eigs[1]), total, False)
                )
        previous = current
    if report.degenerate_count:
        logger.debug(
            f"negativity at theta_se={theta_se:.6g}, theta_ee={theta_ee:.6g}: "
            f"{report.degenerate_count} degenerate step(s) skipped"
        )
    return report


def negativity(cfg: ScenarioConfig, L_max: Optional[int] = None) -> NegativityReport:
    """Negativity of a scenario's channel up to L_max (default cfg.L_max)."""
    horizon = L_max or cfg.L_max
    report = negativity_at(horizon, cfg.theta_se, cfg.theta_ee, cfg.env_specs(horizon), cfg.channel)
    if report.degenerate_count:
        logger.warning(f"scenario '{cfg.name}': {report.degenerate_count} degenerate step(s) excluded from D")
    return report


@dataclass
class ClosedFormReport:
    L: int
    bracket: float
    numeric: Tuple[float, float]
    printed: Tuple[float, float]
    printed_ln: Tuple[float, float]
    consistent: Tuple[float, float]

    @property
    def printed_deviation(self) -> float:
        return float(np.max(np.abs(np.subtract(self.printed, self.numeric))))

    @property
    def printed_ln_deviation(self) -> float:
        """NaN when a printed eigenvalue is not positive."""
        return float(np.max(np.abs(np.subtract(self.printed_ln, self.numeric))))

    @property
    def consistent_deviation(self) -> float:
        return float(np.max(np.abs(np.subtract(self.consistent, self.numeric))))


def _safe_log(value: float) -> float:
    return math.log(value) if value > 0 else math.nan


def closed_form_eigs(L: int, theta_se: float, theta_ee: float, env: SingleModeSpec) -> ClosedFormReport:
    """
    Closed-form spectra of Lambda_L for identical environments, against the eigen-solver.

    Three readings: (X +- sqrt(|Y|^2 + 1)/2) * bracket, the same wrapped in ln,
    and (X +- sqrt(4|Y|^2 + 1)/2) * bracket, with bracket = 1 - c11(L)^2 / c11(L-1)^2.
    """
    if L < 3:
        raise ValueError(f"closed form needs L >= 3, got {L}")
    map_L = channel_map(L, theta_se, theta_ee, env)
    map_Lm1 = channel_map(L - 1, theta_se, theta_ee, env)
    lam = lambda_matrix(map_L, map_Lm1)
    bracket = 1.0 - lam.x2
    X, absY = env.X, abs(env.Y)

    def pair(root: float) -> Tuple[float, float]:
        lo, hi = sorted(((X - 0.5 * root) * bracket, (X + 0.5 * root) * bracket))
        return lo, hi

    printed = pair(math.sqrt(absY**2 + 1.0))
    eigs = lam.eigenvalues()
    return ClosedFormReport(
        L=L,
        bracket=bracket,
        numeric=(float(eigs[0]), float(eigs[1])),
        printed=printed,
        printed_ln=tuple(sorted(_safe_log(v) for v in printed)),
        consistent=pair(math.sqrt(4.0 * absY**2 + 1.0)),
    )


@dataclass
class ScalingReport:
    D_G: float
    D_vac: float
    factor: float
    both_branches_negative: bool

    @property
    def predicted(self) -> float:
        return self.factor * self.D_vac

    @property
    def relative_deviation(self) -> float:
        if self.predicted == 0.0:
            return 0.0 if self.D_G == 0.0 else math.inf
        return abs(self.D_G - self.predicted) / self.predicted

    @property
    def zero_iff_zero(self) -> bool:
        return (self.D_G <= MARKOV_TOL) == (self.D_vac <= MARKOV_TOL)


def gaussian_scaling(L_max: int, theta_se: float, theta_ee: float, env: SingleModeSpec) -> ScalingReport:
    """Compare D for a squeezed thermal environment with (2n + 1) cosh(2r) times the vacuum value."""
    gauss = negativity_at(L_max, theta_se, theta_ee, env)
    vac = negativity_at(L_max, theta_se, theta_ee, SingleModeSpec())
    contributing = [s for s in gauss.steps if not s.degenerate and s.lambda_minus < -MARKOV_TOL]
    both = all(s.lambda_plus <= MARKOV_TOL for s in contributing)
    factor = (2.0 * env.n + 1.0) * math.cosh(2.0 * env.r)
    return ScalingReport(D_G=gauss.D, D_vac=vac.D, factor=factor, both_branches_negative=both)


@dataclass
class PhaseResult:
    """D over the grid; axis values are kept in units of pi."""

    se_values_pi: NDArray[np.float64]
    ee_values_pi: NDArray[np.float64]
    D: NDArray[np.float64]
    degenerate: NDArray[np.int64]

    @property
    def markovian(self) -> NDArray[np.bool_]:
        return self.D <= MARKOV_TOL

    def rows(self) -> Iterator[Tuple[float, float, float, int]]:
        """(theta_se/pi, theta_ee/pi, D, markovian), row-major in theta_se then theta_ee."""
        for i, se in enumerate(self.se_values_pi):
            for j, ee in enumerate(self.ee_values_pi):
                yield float(se), float(ee), float(self.D[i, j]), int(self.markovian[i, j])


def phase_diagram(grid: PhaseGrid, env: EnvLike, channel: str = "C", workers: Optional[int] = None) -> PhaseResult:
    """D(grid.L) at every (theta_se, theta_ee) point, evaluated on a bounded thread pool."""
    se_values, ee_values = grid.se_values(), grid.ee_values()
    points = [(i, j, se, ee) for i, se in enumerate(se_values) for j, ee in enumerate(ee_values)]
    workers = workers or current_config.worker_count()

    def evaluate(point):
        i, j, se, ee = point
        report = negativity_at(grid.L, se, ee, env, channel)
        return i, j, report.D, report.degenerate_count

    D = np.zeros((len(se_values), len(ee_values)))
    degenerate = np.zeros_like(D, dtype=np.int64)
    logger.info(f"Phase diagram: {len(points)} points at L={grid.L} on {workers} worker(s)")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i, j, value, count in pool.map(evaluate, points):
            D[i, j] = value
            degenerate[i, j] = count
    if degenerate.any():
        logger.warning(f"Phase diagram: {int(np.count_nonzero(degenerate))} point(s) with degenerate steps")
    return PhaseResult(
        se_values_pi=grid.se_values_pi(), ee_values_pi=grid.ee_values_pi(), D=D, degenerate=degenerate
    )

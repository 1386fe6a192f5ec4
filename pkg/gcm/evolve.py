"""
Covariance propagation through the collision network.

The joint input is block-diagonal over the layout of ModeLayout.for_step(L)
except for the TMSV correlation between B and A. The direct symplectic path
(propagate / system_cov) is normative; appendix_cov evaluates the closed-form
element expressions as an independent comparator.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Literal, Tuple

import numpy as np
from numpy.typing import NDArray

from gcm.gstate import (
    PHYSICALITY_TOL,
    CovMatrix,
    CovLike,
    ModeLayout,
    UnphysicalCovarianceError,
    direct_sum,
    physicality_margin,
    select_modes,
    single_mode_cov,
    tmsv_cov,
)
from gcm.logger import get_logger
from gcm.optics import ScatterError, ScatterMatrix, iter_total_scatter, lift, total_scatter
from gcm.scenario import ScenarioConfig, ScenarioError, SqueezedC

logger = get_logger(__name__)

APPENDIX_TARGET = 1e-9
SYSTEM_LABELS = ("A", "B", "C")


def assemble_input(cfg: ScenarioConfig, L: int) -> Tuple[CovMatrix, ModeLayout]:
    """
    Joint input covariance at step L, ordered [E^B_{L-1}..E^B_1, B, A, C, E^C_1..E^C_{L-1}].

    Raises:
        ScenarioError: If L exceeds the horizon or the environment list is too short
    """
    if not 1 <= L <= cfg.L_max:
        raise ScenarioError("L_max", f"step {L} outside 1..{cfg.L_max}")
    layout = ModeLayout.for_step(L)
    env = [single_mode_cov(spec) for spec in cfg.env_specs(L)]
    # TMSV is built over [A, B]; the layout wants B before A
    ba = select_modes(tmsv_cov(cfg.xi_ab), [1, 0])
    blocks = list(reversed(env)) + [ba, cfg.c_state.cov()] + env
    return direct_sum(*blocks), layout


def propagate(sigma_in: CovLike, S: ScatterMatrix) -> CovMatrix:
    """
    sigma_out = lift(S) sigma_in lift(S)^T, symmetrized against round-off.

    Raises:
        ScatterError: If the dimensions disagree
    """
    arr = sigma_in.data if isinstance(sigma_in, CovMatrix) else np.asarray(sigma_in, dtype=float)
    if arr.shape[0] != 2 * S.N:
        raise ScatterError(f"covariance has {arr.shape[0] // 2} modes but scattering matrix has {S.N}")
    M = lift(S)
    out = M @ arr @ M.T
    return CovMatrix(0.5 * (out + out.T))


def _system_block(cfg: ScenarioConfig, L: int, S: ScatterMatrix) -> CovMatrix:
    sigma_in, layout = assemble_input(cfg, L)
    sigma_out = propagate(sigma_in, S)
    margin = physicality_margin(sigma_out)
    if margin < -PHYSICALITY_TOL:
        raise UnphysicalCovarianceError(f"propagated state at L={L} violates the uncertainty bound ({margin:.3e})")
    return select_modes(sigma_out, [layout.index(label) for label in SYSTEM_LABELS])


def system_cov(cfg: ScenarioConfig, L: int) -> CovMatrix:
    """Covariance of (A, B, C) after L collisions, in that mode order."""
    S = total_scatter(L, cfg.theta_ss, cfg.theta_se, cfg.theta_ee)
    return _system_block(cfg, L, S)


def iter_system_cov(cfg: ScenarioConfig) -> Iterator[Tuple[int, CovMatrix]]:
    """(L, sigma_ABC) for L = 1..L_max, reusing each step's scattering matrix."""
    for L, S in iter_total_scatter(cfg.L_max, cfg.theta_ss, cfg.theta_se, cfg.theta_ee):
        yield L, _system_block(cfg, L, S)


@dataclass
class AppendixReport:
    """Deviation of the closed-form (A, B, C) covariance from the propagated one."""

    L: int
    variant: str
    blocks: Dict[str, float] = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return max(self.blocks.values()) if self.blocks else 0.0

    @property
    def within_target(self) -> bool:
        return self.max_deviation < APPENDIX_TARGET


def _input_moments(cfg: ScenarioConfig, L: int, variant: str) -> Tuple[NDArray, NDArray, NDArray]:
    """
    Per-input weights (2a, 2b, 2g) with sigma_w = [[a + b, g], [g, a - b]].

    The literal reading takes the environmental weight as cosh(2r) + n + 1/2,
    drops the thermal factor from the squeezing terms and ignores phi_C.
    """
    n_modes = 2 * L + 1
    a2, b2, g2 = np.zeros(n_modes), np.zeros(n_modes), np.zeros(n_modes)
    specs = cfg.env_specs(L)

    def env_weights(spec):
        if variant == "literal":
            return (
                np.cosh(2 * spec.r) + spec.n + 0.5,
                np.sinh(2 * spec.r) * np.cos(spec.phi),
                np.sinh(2 * spec.r) * np.sin(spec.phi),
            )
        s = single_mode_cov(spec).data
        return s[0, 0] + s[1, 1], s[0, 0] - s[1, 1], 2 * s[0, 1]

    for j, spec in enumerate(specs, start=1):
        w = env_weights(spec)
        a2[L - 1 - j], b2[L - 1 - j], g2[L - 1 - j] = w
        a2[L + 1 + j], b2[L + 1 + j], g2[L + 1 + j] = w

    a2[L - 1] = np.cosh(cfg.xi_ab)
    if variant == "literal" and isinstance(cfg.c_state, SqueezedC):
        a2[L + 1] = np.cosh(cfg.c_state.xi_c)
        b2[L + 1] = np.sinh(cfg.c_state.xi_c)
    else:
        s = cfg.c_state.cov().data
        a2[L + 1], b2[L + 1], g2[L + 1] = s[0, 0] + s[1, 1], s[0, 0] - s[1, 1], 2 * s[0, 1]
    return a2, b2, g2


def appendix_cov(
    cfg: ScenarioConfig, L: int, variant: Literal["literal", "corrected"] = "corrected"
) -> Tuple[CovMatrix, AppendixReport]:
    """
    Closed-form (A, B, C) covariance from the elements c_ij of S^{-1}(L) = S(L)^T.

    Output mode k collects sum_w c_{w,k}^2 sigma_w from every independent input w.
    The literal variant keeps K + M on both diagonal entries of sigma_BC; the
    corrected one uses K - M on the second. Deviations are reported, never raised.
    """
    if variant not in ("literal", "corrected"):
        raise ValueError(f"variant must be 'literal' or 'corrected', got {variant!r}")
    S = total_scatter(L, cfg.theta_ss, cfg.theta_se, cfg.theta_ee)
    c = S.data.T
    b, cc = L - 1, L + 1
    a2, b2, g2 = _input_moments(cfg, L, variant)

    def local(k):
        w = c[:, k] ** 2
        alpha, beta, gamma = 0.5 * w @ a2, 0.5 * w @ b2, 0.5 * w @ g2
        return np.array([[alpha + beta, gamma], [gamma, alpha - beta]])

    z = np.diag([1.0, -1.0])
    sigma_a = 0.5 * np.cosh(cfg.xi_ab) * np.eye(2)
    sigma_ab = 0.5 * np.sinh(cfg.xi_ab) * c[b, b] * z
    sigma_ac = 0.5 * np.sinh(cfg.xi_ab) * c[b, cc] * z
    cross = c[:, b] * c[:, cc]
    K, M, P = cross @ a2, cross @ b2, cross @ g2
    Q = 0.0  # imaginary parts vanish for a real network
    second = K + M if variant == "literal" else K - M
    sigma_bc = 0.5 * np.array([[K + M, P + Q], [P - Q, second]])

    full = np.block([
        [sigma_a, sigma_ab, sigma_ac],
        [sigma_ab.T, local(b), sigma_bc],
        [sigma_ac.T, sigma_bc.T, local(cc)],
    ])
    closed = CovMatrix(0.5 * (full + full.T))

    direct = system_cov(cfg, L)
    report = AppendixReport(L=L, variant=variant)
    names = {(0, 0): "A", (1, 1): "B", (2, 2): "C", (0, 1): "AB", (0, 2): "AC", (1, 2): "BC"}
    for (i, j), name in names.items():
        report.blocks[name] = float(np.max(np.abs(closed.block(i, j) - direct.block(i, j))))
    if variant == "corrected" and not report.within_target:
        logger.warning(f"appendix comparator at L={L}: max deviation {report.max_deviation:.3e}")
    return closed, report


def appendix_series(cfg: ScenarioConfig, variant: str = "corrected") -> List[AppendixReport]:
    return [appendix_cov(cfg, L, variant)[1] for L in range(1, cfg.L_max + 1)]

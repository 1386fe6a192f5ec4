"""
Beam-splitter scattering matrices of the collision network.

Mode ordering at step L is [E^B_{L-1}, ..., E^B_1, B, A, C, E^C_1, ..., E^C_{L-1}]
(0-based: B at L-1, A at L, C at L+1). Every factor is built at the native
dimension 2L+1 of the step it belongs to.
"""

from dataclasses import dataclass
from typing import Iterator, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from gcm.logger import get_logger

logger = get_logger(__name__)

ANGLE_TOL = 1e-12
LIFT_WARN_TOL = 1e-8


class ScatterError(ValueError):
    """Raised for invalid beam-splitter angles, indices or network sizes."""

    pass


@dataclass(frozen=True)
class BSAngle:
    """Beam-splitter angle theta in [0, pi/2]; r = sin(theta), t = cos(theta)."""

    theta: float

    def __post_init__(self):
        theta = float(self.theta)
        if theta < -ANGLE_TOL or theta > np.pi / 2 + ANGLE_TOL:
            raise ScatterError(f"beam-splitter angle {theta} outside [0, pi/2]")
        object.__setattr__(self, "theta", min(max(theta, 0.0), np.pi / 2))

    @property
    def r(self) -> float:
        return float(np.sin(self.theta))

    @property
    def t(self) -> float:
        return float(np.cos(self.theta))


AngleLike = Union[BSAngle, float]


def _angle(theta: AngleLike) -> BSAngle:
    return theta if isinstance(theta, BSAngle) else BSAngle(theta)


@dataclass(frozen=True)
class ScatterMatrix:
    """Real orthogonal mode-mixing matrix of the network after `step` collisions."""

    data: NDArray[np.float64]
    step: int = 0

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ScatterError(f"scattering matrix must be square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def N(self) -> int:
        return self.data.shape[0]

    def orthogonality_error(self) -> float:
        return float(np.max(np.abs(self.data @ self.data.T - np.eye(self.N))))

    def __matmul__(self, other: "ScatterMatrix") -> "ScatterMatrix":
        return ScatterMatrix(self.data @ other.data, step=max(self.step, other.step))


def _place_block(m: NDArray[np.float64], i: int, j: int, r: float, t: float) -> None:
    """Write [[r, t], [-t, r]] onto rows/cols (i, j) of m."""
    m[i, i] = r
    m[i, j] = t
    m[j, i] = -t
    m[j, j] = r


def bs2(theta: AngleLike) -> ScatterMatrix:
    a = _angle(theta)
    return ScatterMatrix(np.array([[a.r, a.t], [-a.t, a.r]]), step=0)


def _check_step(L: int, minimum: int = 1) -> None:
    if L < minimum:
        raise ScatterError(f"step L must be >= {minimum}, got {L}")


def s_ss(L: int, theta_ss: AngleLike) -> ScatterMatrix:
    """System-system collision: mixes B and C, leaves A and the environments alone."""
    _check_step(L)
    a = _angle(theta_ss)
    m = np.eye(2 * L + 1)
    _place_block(m, L - 1, L + 1, a.r, a.t)
    return ScatterMatrix(m, step=L)


def s_se(L: int, j: int, theta_se_b: AngleLike, theta_se_c: AngleLike) -> ScatterMatrix:
    """
    System-environment collision of B with E^B_{j+1} and C with E^C_{j+1}.

    B channel block over (E^B_{j+1}, B) is [[r, -t], [t, r]]; the C channel
    block over (C, E^C_{j+1}) is [[r, t], [-t, r]].
    """
    _check_step(L, 2)
    if not 0 <= j <= L - 2:
        raise ScatterError(f"system-environment index j={j} outside [0, {L - 2}] at L={L}")
    b, c = _angle(theta_se_b), _angle(theta_se_c)
    m = np.eye(2 * L + 1)
    _place_block(m, L - j - 2, L - 1, b.r, -b.t)
    _place_block(m, L + 1, L + j + 2, c.r, c.t)
    return ScatterMatrix(m, step=L)


def s_ee(L: int, j: int, theta_ee_b: AngleLike, theta_ee_c: AngleLike) -> ScatterMatrix:
    """Environment-environment collision of E_j with E_{j+1} in both channels."""
    _check_step(L, 3)
    if not 1 <= j <= L - 2:
        raise ScatterError(f"environment index j={j} outside [1, {L - 2}] at L={L}")
    b, c = _angle(theta_ee_b), _angle(theta_ee_c)
    m = np.eye(2 * L + 1)
    _place_block(m, L - j - 2, L - j - 1, b.r, -b.t)
    _place_block(m, L + j + 1, L + j + 2, c.r, c.t)
    return ScatterMatrix(m, step=L)


def _step_factor(L: int, theta_ss: BSAngle, theta_se: BSAngle, theta_ee: BSAngle) -> NDArray[np.float64]:
    """Collisions added at step L >= 2: (4) then (2) then (3)."""
    f = s_ss(L, theta_ss).data @ s_se(L, L - 2, theta_se, theta_se).data
    if L >= 3:
        f = f @ s_ee(L, L - 2, theta_ee, theta_ee).data
    return f


def total_scatter(L: int, theta_ss: AngleLike, theta_se: AngleLike, theta_ee: AngleLike) -> ScatterMatrix:
    """
    S(1) = S_SS; S(2) = S_SS S_SE1 S(1);
    S(L) = prod_{j=1}^{L-2} (S_SS S_SE_{j+1} S_{E_j E_{j+1}}) S(2), later j to the left.
    """
    _check_step(L)
    ss, se, ee = _angle(theta_ss), _angle(theta_se), _angle(theta_ee)
    m = s_ss(L, ss).data
    for step in range(2, L + 1):
        # factor for step `step`, embedded at dimension 2L+1
        f = s_ss(L, ss).data @ s_se(L, step - 2, se, se).data
        if step >= 3:
            f = f @ s_ee(L, step - 2, ee, ee).data
        m = f @ m
    return ScatterMatrix(m, step=L)


def _pad(m: NDArray[np.float64], before: int, after: int) -> NDArray[np.float64]:
    n = m.shape[0]
    out = np.eye(n + before + after)
    out[before:before + n, before:before + n] = m
    return out


def iter_total_scatter(
    L_max: int, theta_ss: AngleLike, theta_se: AngleLike, theta_ee: AngleLike
) -> Iterator[Tuple[int, ScatterMatrix]]:
    """Yield (L, S(L)) for L = 1..L_max, embedding S(L-1) into the next step."""
    _check_step(L_max)
    ss, se, ee = _angle(theta_ss), _angle(theta_se), _angle(theta_ee)
    m = s_ss(1, ss).data
    yield 1, ScatterMatrix(m, step=1)
    for L in range(2, L_max + 1):
        m = _step_factor(L, ss, se, ee) @ _pad(m, 1, 1)
        yield L, ScatterMatrix(m, step=L)


def _channel_factor(L: int, kind: str, j: int, theta: BSAngle, channel: str) -> NDArray[np.float64]:
    """
    One collision of the single-channel network, ordered [X, E_1, ..., E_{L-1}].

    kind "se" couples X with E_j, kind "ee" couples E_j with E_{j+1}. The B
    channel is assembled in its native outward order [E_{L-1}, ..., E_1, B]
    with the transmissivity flipped (t -> -t), then reindexed so B comes first.
    """
    m = np.eye(L)
    if channel == "C":
        if kind == "se":
            _place_block(m, 0, j, theta.r, theta.t)
        else:
            _place_block(m, j, j + 1, theta.r, theta.t)
        return m
    pos = lambda k: L - 1 - k  # noqa: E731  native position of E_k (B is k = 0)
    if kind == "se":
        _place_block(m, pos(j), pos(0), theta.r, -theta.t)
    else:
        _place_block(m, pos(j + 1), pos(j), theta.r, -theta.t)
    return m[::-1, ::-1].copy()


def _check_channel(channel: str) -> str:
    channel = channel.upper()
    if channel not in ("B", "C"):
        raise ScatterError(f"channel must be 'B' or 'C', got {channel!r}")
    return channel


def channel_scatter(L: int, theta_se: AngleLike, theta_ee: AngleLike, channel: str = "C") -> ScatterMatrix:
    """
    Single-channel network S~_E(L) over [X, E_1, ..., E_{L-1}] (L >= 2).

    S~_E(L) = prod_{j=1}^{L-2} (S~_{SE_{j+1}} S~_{E_j E_{j+1}}) S~_{SE_1}: at each
    step the new environment mode first meets the previous one, then the system.
    """
    _check_step(L, 2)
    channel = _check_channel(channel)
    se, ee = _angle(theta_se), _angle(theta_ee)
    m = _channel_factor(L, "se", 1, se, channel)
    for j in range(1, L - 1):
        f = _channel_factor(L, "se", j + 1, se, channel) @ _channel_factor(L, "ee", j, ee, channel)
        m = f @ m
    return ScatterMatrix(m, step=L)


def iter_channel_scatter(
    L_max: int, theta_se: AngleLike, theta_ee: AngleLike, channel: str = "C"
) -> Iterator[Tuple[int, ScatterMatrix]]:
    """Yield (L, S~_E(L)) for L = 2..L_max, appending one environment mode per step."""
    _check_step(L_max, 2)
    channel = _check_channel(channel)
    se, ee = _angle(theta_se), _angle(theta_ee)
    m = _channel_factor(2, "se", 1, se, channel)
    yield 2, ScatterMatrix(m, step=2)
    for L in range(3, L_max + 1):
        f = _channel_factor(L, "se", L - 1, se, channel) @ _channel_factor(L, "ee", L - 2, ee, channel)
        m = f @ _pad(m, 0, 1)
        yield L, ScatterMatrix(m, step=L)


def lift(S: Union[ScatterMatrix, NDArray[np.float64]]) -> NDArray[np.float64]:
    """
    Covariance image of a passive mode transform: 2x2 block (i, j) is S_ij I_2.

    The result is orthogonal and symplectic (M Omega M^T = Omega).
    """
    arr = S.data if isinstance(S, ScatterMatrix) else np.asarray(S, dtype=float)
    err = float(np.max(np.abs(arr @ arr.T - np.eye(arr.shape[0]))))
    if err > LIFT_WARN_TOL:
        logger.warning(f"lift() input deviates from orthogonality by {err:.3e}")
    return np.kron(arr, np.eye(2))

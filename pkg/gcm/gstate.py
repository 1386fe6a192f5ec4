"""
Gaussian state bookkeeping.

Covariance matrices use interleaved quadratures (x1, p1, ..., xN, pN) with
x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(sqrt(2) i), so the vacuum is I/2.
Squeezing follows the characteristic-function convention in which a
squeezed-thermal mode has X = (n + 1/2) cosh(2r) and
Y = -(n + 1/2) sinh(2r) e^{i phi}; at phi = 0 the x quadrature is the
anti-squeezed one.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.linalg import block_diag
from scipy.special import xlogy

from gcm.logger import get_logger

logger = get_logger(__name__)

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
PURE_CLAMP = 1e-12
UNPHYSICAL_NU = 1e-6


class UnphysicalCovarianceError(ValueError):
    """Raised for malformed or unphysical covariance matrices."""

    pass


class SingleModeSpec(BaseModel):
    """Parameters (n, r, phi, alpha) of a generic single-mode Gaussian state."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: float = Field(0.0, ge=0.0, description="mean thermal photon number")
    r: float = Field(0.0, ge=0.0, description="squeezing strength")
    phi: float = Field(0.0, description="squeezing angle in radians, folded into [0, 2pi)")
    alpha: Tuple[float, float] = Field((0.0, 0.0), description="displacement (re, im); must be zero")

    @field_validator("phi")
    @classmethod
    def _fold_phi(cls, value: float) -> float:
        folded = float(np.mod(value, 2.0 * np.pi))
        # np.mod can return 2pi for tiny negative inputs
        return 0.0 if folded >= 2.0 * np.pi else folded

    @field_validator("alpha")
    @classmethod
    def _zero_alpha(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] != 0.0 or value[1] != 0.0:
            raise ValueError("nonzero displacement is not supported (zero first moments only)")
        return value

    @property
    def X(self) -> float:
        return (self.n + 0.5) * np.cosh(2.0 * self.r)

    @property
    def Y(self) -> complex:
        return -(self.n + 0.5) * np.sinh(2.0 * self.r) * np.exp(1j * self.phi)


@dataclass(frozen=True)
class CovMatrix:
    """Real symmetric 2N x 2N covariance matrix over interleaved quadratures."""

    data: NDArray[np.float64]

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise UnphysicalCovarianceError(f"covariance must be square, got shape {arr.shape}")
        if arr.shape[0] % 2 != 0 or arr.shape[0] == 0:
            raise UnphysicalCovarianceError(f"covariance dimension must be even and positive, got {arr.shape[0]}")
        scale = max(1.0, float(np.max(np.abs(arr))))
        asym = float(np.max(np.abs(arr - arr.T)))
        if asym >= SYMMETRY_TOL * scale:
            raise UnphysicalCovarianceError(f"covariance is not symmetric (max asymmetry {asym:.3e})")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def N(self) -> int:
        return self.data.shape[0] // 2

    def block(self, i: int, j: int) -> NDArray[np.float64]:
        """2x2 block between modes i and j (0-based)."""
        return self.data[2 * i:2 * i + 2, 2 * j:2 * j + 2]


@dataclass(frozen=True)
class ModeLayout:
    """Ordered mode labels of a joint covariance matrix."""

    labels: Tuple[str, ...]

    @classmethod
    def for_step(cls, L: int) -> "ModeLayout":
        """
        Layout [E^B_{L-1}, ..., E^B_1, B, A, C, E^C_1, ..., E^C_{L-1}].

        With 1-based positions B sits at L, A at L+1 and C at L+2.
        """
        if L < 1:
            raise ValueError(f"step L must be >= 1, got {L}")
        env_b = [f"EB{j}" for j in range(L - 1, 0, -1)]
        env_c = [f"EC{j}" for j in range(1, L)]
        return cls(tuple(env_b + ["B", "A", "C"] + env_c))

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        """0-based position of a mode label."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown mode label {label!r}")


CovLike = Union[CovMatrix, NDArray[np.float64]]


def _as_array(sigma: CovLike) -> NDArray[np.float64]:
    return sigma.data if isinstance(sigma, CovMatrix) else np.asarray(sigma, dtype=float)


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Omega_N: direct sum of N copies of [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_cov(n_modes: int = 1) -> CovMatrix:
    return CovMatrix(0.5 * np.eye(2 * n_modes))


def single_mode_cov(spec: SingleModeSpec) -> CovMatrix:
    """
    2x2 covariance of the squeezed thermal state described by spec.

    sigma_xx = X - Re(Y), sigma_pp = X + Re(Y), sigma_xp = -Im(Y).
    """
    X, Y = spec.X, spec.Y
    return CovMatrix(np.array([
        [X - Y.real, -Y.imag],
        [-Y.imag, X + Y.real],
    ]))


def thermal_cov(n: float) -> CovMatrix:
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    return CovMatrix((n + 0.5) * np.eye(2))


def squeezed_vac_cov(xi_c: float, phi_c: float = 0.0) -> CovMatrix:
    """
    Single-mode squeezed vacuum in the system-mode convention.

    The characteristic-function squeezing operator carries a 1/2 prefactor,
    so strength xi_c corresponds to r = xi_c / 2: the result is
    diag(e^xi/2, e^-xi/2) rotated by phi_c / 2.
    """
    if xi_c < 0:
        raise ValueError(f"squeezing xi_c must be >= 0, got {xi_c}")
    return single_mode_cov(SingleModeSpec(n=0.0, r=xi_c / 2.0, phi=phi_c))


def tmsv_cov(xi_ab: float) -> CovMatrix:
    """Two-mode squeezed vacuum in layout [A, B]."""
    c = np.cosh(xi_ab) / 2.0
    s = np.sinh(xi_ab) / 2.0
    z = np.diag([1.0, -1.0])
    return CovMatrix(np.block([
        [c * np.eye(2), s * z],
        [s * z, c * np.eye(2)],
    ]))


def direct_sum(*covs: CovLike) -> CovMatrix:
    """Block-diagonal joint covariance of independent subsystems."""
    return CovMatrix(block_diag(*[_as_array(c) for c in covs]))


def physicality_margin(sigma: CovLike) -> float:
    """Minimum eigenvalue of sigma + (i/2) Omega_N."""
    arr = _as_array(sigma)
    n_modes = arr.shape[0] // 2
    herm = arr + 0.5j * symplectic_form(n_modes)
    return float(np.min(np.linalg.eigvalsh(herm)))


def is_physical(sigma: CovLike, tol: float = PHYSICALITY_TOL) -> bool:
    return physicality_margin(sigma) >= -tol


def symplectic_eigenvalues(sigma: CovLike) -> NDArray[np.float64]:
    """
    Sorted symplectic spectrum.

    Computed as the positive half of the spectrum of the Hermitian matrix
    i sigma^{1/2} Omega sigma^{1/2}, which shares its eigenvalues with
    i Omega sigma.
    """
    arr = _as_array(sigma)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 != 0:
        raise UnphysicalCovarianceError(f"expected a 2N x 2N matrix, got shape {arr.shape}")
    n_modes = arr.shape[0] // 2
    w, v = np.linalg.eigh(0.5 * (arr + arr.T))
    if np.min(w) < -PHYSICALITY_TOL:
        raise UnphysicalCovarianceError(f"covariance is not positive definite (min eigenvalue {np.min(w):.3e})")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    spectrum = np.linalg.eigvalsh(1j * (root @ symplectic_form(n_modes) @ root))
    return np.sort(np.abs(spectrum[n_modes:]))


def entropy_of_nu(nu: float) -> float:
    """f(nu) = (nu + 1/2) ln(nu + 1/2) - (nu - 1/2) ln(nu - 1/2), in nats."""
    if nu < 0.5 - UNPHYSICAL_NU:
        raise UnphysicalCovarianceError(f"symplectic eigenvalue {nu:.9f} is below 1/2")
    if nu <= 0.5 + PURE_CLAMP:
        return 0.0
    return float(xlogy(nu + 0.5, nu + 0.5) - xlogy(nu - 0.5, nu - 0.5))


def entropy(sigma: CovLike) -> float:
    """Von Neumann entropy (nats) of the Gaussian state with covariance sigma."""
    return float(sum(entropy_of_nu(nu) for nu in symplectic_eigenvalues(sigma)))


def mean_photon_number(sigma: CovLike) -> float:
    """Mean photon number of a single-mode covariance: (tr sigma - 1) / 2."""
    arr = _as_array(sigma)
    if arr.shape != (2, 2):
        raise UnphysicalCovarianceError(f"expected a single-mode covariance, got shape {arr.shape}")
    return float((np.trace(arr) - 1.0) / 2.0)


def select_modes(sigma: CovLike, indices: Sequence[int]) -> CovMatrix:
    """Sub-covariance of the given 0-based mode indices, in the given order."""
    arr = _as_array(sigma)
    quads = np.array([[2 * i, 2 * i + 1] for i in indices], dtype=int).ravel()
    return CovMatrix(arr[np.ix_(quads, quads)])


def reduce(sigma: CovLike, layout: ModeLayout, subset: Iterable[str]) -> CovMatrix:
    """
    Reduced covariance of the labelled modes, kept in layout order.

    Raises:
        KeyError: If a label is not part of the layout
    """
    arr = _as_array(sigma)
    if arr.shape[0] != 2 * layout.n_modes:
        raise UnphysicalCovarianceError(
            f"covariance has {arr.shape[0] // 2} modes but layout has {layout.n_modes}"
        )
    indices = sorted({layout.index(label) for label in subset})
    return select_modes(arr, indices)

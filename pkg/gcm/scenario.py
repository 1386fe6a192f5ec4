"""
Scenario configuration: pydantic models for experiment descriptions, the
named scenario presets, and the canonical serialization whose SHA-256
digest identifies a run.

Angles are stored in units of pi (``*_pi`` fields) and exposed in radians
through properties.
"""

import hashlib
import json
from typing import Annotated, Callable, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from gcm.gstate import CovMatrix, SingleModeSpec, single_mode_cov, squeezed_vac_cov, thermal_cov
from gcm.logger import get_logger

logger = get_logger(__name__)

AnglePi = Annotated[float, Field(ge=0.0, le=0.5)]


class ScenarioError(ValueError):
    """Config parse or validation failure, located by field path and (when known) line."""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        where = f"{field} (line {line})" if line is not None else field
        super().__init__(f"{where}: {message}")
        self.field = field
        self.line = line


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def nc_convention_consistent(xi_ab: float) -> float:
    """Photon number of the reduced TMSV mode: sinh^2(xi_ab / 2)."""
    return float(np.sinh(xi_ab / 2.0) ** 2)


def nc_literal(xi_ab: float) -> float:
    """sinh^2(xi_ab), the value quoted for the thermal-C scenario."""
    return float(np.sinh(xi_ab) ** 2)


# System mode C

class SqueezedC(_Strict):
    kind: Literal["squeezed"] = "squeezed"
    xi_c: float = Field(1.0, ge=0.0)
    phi_c_pi: float = 0.0

    def cov(self) -> CovMatrix:
        return squeezed_vac_cov(self.xi_c, self.phi_c_pi * np.pi)


class ThermalC(_Strict):
    kind: Literal["thermal"] = "thermal"
    n_c: float = Field(..., ge=0.0)

    def cov(self) -> CovMatrix:
        return thermal_cov(self.n_c)


class GenericMode(_Strict):
    """Squeezed thermal mode (n, r, phi) with phi in units of pi."""

    n: float = Field(0.0, ge=0.0)
    r: float = Field(0.0, ge=0.0)
    phi_pi: float = 0.0

    def spec(self) -> SingleModeSpec:
        return SingleModeSpec(n=self.n, r=self.r, phi=self.phi_pi * np.pi)


class GenericC(GenericMode):
    kind: Literal["generic"] = "generic"

    def cov(self) -> CovMatrix:
        return single_mode_cov(self.spec())


CState = Annotated[Union[SqueezedC, ThermalC, GenericC], Field(discriminator="kind")]


# Environment patterns; env_spec(j) is the state of E^B_j and E^C_j (j >= 1)

class VacuumEnv(_Strict):
    kind: Literal["vacuum"] = "vacuum"

    def env_spec(self, j: int) -> SingleModeSpec:
        return SingleModeSpec()

    @property
    def uniform(self) -> bool:
        return True


class SqueezedSameEnv(_Strict):
    kind: Literal["squeezed-same"] = "squeezed-same"
    r_e: float = Field(0.5, ge=0.0)
    phi_e_pi: float = 0.0
    n_e: float = Field(0.0, ge=0.0)

    def env_spec(self, j: int) -> SingleModeSpec:
        return SingleModeSpec(n=self.n_e, r=self.r_e, phi=self.phi_e_pi * np.pi)

    @property
    def uniform(self) -> bool:
        return True


class SqueezedAltEnv(_Strict):
    """Squeezing angle phi_e for even j and phi_e + delta_phi for odd j."""

    kind: Literal["squeezed-alternative"] = "squeezed-alternative"
    r_e: float = Field(0.5, ge=0.0)
    phi_e_pi: float = 0.0
    delta_phi_pi: float = 1.0
    n_e: float = Field(0.0, ge=0.0)

    def env_spec(self, j: int) -> SingleModeSpec:
        phi_pi = self.phi_e_pi + (self.delta_phi_pi if j % 2 == 1 else 0.0)
        return SingleModeSpec(n=self.n_e, r=self.r_e, phi=phi_pi * np.pi)

    @property
    def uniform(self) -> bool:
        return self.r_e == 0.0 or self.delta_phi_pi % 2.0 == 0.0


class ThermalEnv(_Strict):
    kind: Literal["thermal"] = "thermal"
    n_e: float = Field(..., ge=0.0)

    def env_spec(self, j: int) -> SingleModeSpec:
        return SingleModeSpec(n=self.n_e)

    @property
    def uniform(self) -> bool:
        return True


class ListEnv(_Strict):
    """Explicit per-index environment states; modes[j-1] is E_j."""

    kind: Literal["list"] = "list"
    modes: List[GenericMode] = Field(..., min_length=1)

    def env_spec(self, j: int) -> SingleModeSpec:
        if not 1 <= j <= len(self.modes):
            raise ScenarioError("env.modes", f"no environment state for index {j} (have {len(self.modes)})")
        return self.modes[j - 1].spec()

    @property
    def uniform(self) -> bool:
        return all(m == self.modes[0] for m in self.modes)


EnvPattern = Annotated[
    Union[VacuumEnv, SqueezedSameEnv, SqueezedAltEnv, ThermalEnv, ListEnv],
    Field(discriminator="kind"),
]


class PhaseGrid(_Strict):
    """Rectangular (theta_se, theta_ee) grid for the non-Markovianity phase diagram."""

    L: int = Field(50, ge=3)
    se_min_pi: AnglePi = 0.0
    se_max_pi: AnglePi = 0.5
    se_points: int = Field(51, ge=1)
    ee_min_pi: AnglePi = 0.0
    ee_max_pi: AnglePi = 0.5
    ee_points: int = Field(51, ge=1)

    def se_values_pi(self) -> np.ndarray:
        return np.linspace(self.se_min_pi, self.se_max_pi, self.se_points)

    def ee_values_pi(self) -> np.ndarray:
        return np.linspace(self.ee_min_pi, self.ee_max_pi, self.ee_points)

    def se_values(self) -> np.ndarray:
        return self.se_values_pi() * np.pi

    def ee_values(self) -> np.ndarray:
        return self.ee_values_pi() * np.pi


class SweepSpec(_Strict):
    """One swept axis; angle axes are in units of pi, n_E is a photon number."""

    axis: str
    values: List[float] = Field(..., min_length=1)


class ScenarioConfig(_Strict):
    """Full experiment description."""

    name: str = "custom"
    description: str = ""
    L_max: int = Field(50, ge=1)
    theta_ss_pi: AnglePi = 0.4
    theta_se_pi: AnglePi = 0.35
    theta_ee_pi: AnglePi = 0.35
    xi_ab: float = 1.0
    c_state: CState = SqueezedC()
    env: EnvPattern = VacuumEnv()
    channel: Literal["B", "C"] = "C"
    phase: Optional[PhaseGrid] = None
    sweep: Optional[SweepSpec] = None

    @model_validator(mode="after")
    def _env_list_covers_horizon(self):
        if isinstance(self.env, ListEnv) and len(self.env.modes) < self.L_max - 1:
            raise ValueError(
                f"env.modes has {len(self.env.modes)} entries but L_max={self.L_max} needs {self.L_max - 1}"
            )
        return self

    @property
    def theta_ss(self) -> float:
        return self.theta_ss_pi * np.pi

    @property
    def theta_se(self) -> float:
        return self.theta_se_pi * np.pi

    @property
    def theta_ee(self) -> float:
        return self.theta_ee_pi * np.pi

    def env_specs(self, L: int) -> List[SingleModeSpec]:
        """States of E_1 .. E_{L-1} (shared by both channels)."""
        return [self.env.env_spec(j) for j in range(1, L)]

    def updated(self, **changes) -> "ScenarioConfig":
        """Validated copy with top-level fields replaced."""
        data = self.model_dump(mode="json")
        data.update(changes)
        return ScenarioConfig.model_validate(data)


def canonical_json(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def config_digest(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()


def _line_of(text: str, loc: Tuple) -> Optional[int]:
    """Best-effort line number of the last string key in an error location."""
    keys = [k for k in loc if isinstance(k, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def parse_scenario(text: str) -> ScenarioConfig:
    """
    Parse a JSON scenario document (strict: unknown fields are errors).

    Raises:
        ScenarioError: On malformed JSON or failed validation
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError("<document>", f"invalid JSON: {e.msg} (column {e.colno})", line=e.lineno)
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<document>"
        raise ScenarioError(field, first["msg"], line=_line_of(text, first["loc"]))


def load_scenario(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ScenarioError("<file>", f"cannot read {path}: {e}")
    cfg = parse_scenario(text)
    logger.info(f"Loaded scenario '{cfg.name}' from {path}")
    return cfg


# Presets

def _scrambling_scenario(name: str, env, description: str, sweep: Optional[SweepSpec] = None) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        description=description,
        L_max=50,
        theta_ss_pi=0.4,
        theta_se_pi=0.35,
        theta_ee_pi=0.35,
        xi_ab=1.0,
        c_state=SqueezedC(xi_c=1.0, phi_c_pi=0.0),
        env=env,
        sweep=sweep,
    )


def _thermal_c(literal_nc: bool) -> ScenarioConfig:
    n_c = nc_literal(1.0) if literal_nc else nc_convention_consistent(1.0)
    return ScenarioConfig(
        name="thermal-c",
        description="thermal C matching reduced B; squeezed-same environments at several angles",
        L_max=50,
        theta_ss_pi=0.4,
        theta_se_pi=0.35,
        theta_ee_pi=0.35,
        xi_ab=1.0,
        c_state=ThermalC(n_c=n_c),
        env=SqueezedSameEnv(r_e=0.5, phi_e_pi=0.0),
        sweep=SweepSpec(axis="phi_E", values=[0.0, 0.5, 1.0]),
    )


def _vacuum_transmission(name: str, se: float, ee: float, sweep: SweepSpec, description: str) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        description=description,
        L_max=50,
        theta_ss_pi=0.4,
        theta_se_pi=se,
        theta_ee_pi=ee,
        xi_ab=1.0,
        c_state=SqueezedC(xi_c=1.0),
        env=VacuumEnv(),
        sweep=sweep,
    )


PRESETS: Dict[str, Tuple[str, Callable[[bool], ScenarioConfig]]] = {
    "fig3a-vacuum": (
        "TMI series, vacuum environments, Markovian channel",
        lambda literal: _scrambling_scenario("vacuum-env", VacuumEnv(), "vacuum environments"),
    ),
    "fig3a-sq-same": (
        "TMI series, squeezed environments sharing C's squeezing angle",
        lambda literal: _scrambling_scenario(
            "squeezed-same-env", SqueezedSameEnv(r_e=0.5, phi_e_pi=0.0), "squeezed-same environments"
        ),
    ),
    "fig3a-sq-alt": (
        "TMI series, squeezing angle alternating by pi between neighbours",
        lambda literal: _scrambling_scenario(
            "squeezed-alt-env", SqueezedAltEnv(r_e=0.5, phi_e_pi=0.0, delta_phi_pi=1.0), "squeezed-alternative environments"
        ),
    ),
    "fig3b": (
        "sweep of the environment-minus-C squeezing angle difference",
        lambda literal: _scrambling_scenario(
            "squeeze-angle-sweep",
            SqueezedSameEnv(r_e=0.5, phi_e_pi=0.0),
            "squeezed-same environments, angle difference swept",
            sweep=SweepSpec(axis="delta_phi", values=[0.0, 0.25, 0.5, 0.75, 1.0]),
        ),
    ),
    "fig4": ("thermal C, environment squeezing angle swept", _thermal_c),
    "fig5a": (
        "BMI/TMI, theta_se = 0.25 pi, theta_ee swept",
        lambda literal: _vacuum_transmission(
            "theta-ee-sweep", 0.25, 0.2, SweepSpec(axis="theta_ee", values=[0.1, 0.2, 0.3]), "theta_ee swept at fixed theta_se"
        ),
    ),
    "fig5b": (
        "BMI/TMI, theta_ee = 0.2 pi, theta_se swept",
        lambda literal: _vacuum_transmission(
            "theta-se-sweep", 0.25, 0.2, SweepSpec(axis="theta_se", values=[0.2, 0.25, 0.3]), "theta_se swept at fixed theta_ee"
        ),
    ),
    "fig6": (
        "BMI/TMI, thermal environments with photon number swept",
        lambda literal: ScenarioConfig(
            name="thermal-env-sweep",
            description="thermal environments, n_E swept",
            L_max=50,
            theta_ss_pi=0.4,
            theta_se_pi=0.3,
            theta_ee_pi=0.15,
            xi_ab=1.0,
            c_state=SqueezedC(xi_c=1.0),
            env=ThermalEnv(n_e=0.0),
            sweep=SweepSpec(axis="n_E", values=[0.0, 0.5, 1.0, 2.0]),
        ),
    ),
    "fig2": (
        "non-Markovianity over the (theta_se, theta_ee) plane, vacuum environments, L = 50",
        lambda literal: ScenarioConfig(
            name="phase-diagram",
            description="phase diagram",
            L_max=50,
            env=VacuumEnv(),
            phase=PhaseGrid(L=50, se_points=51, ee_points=51),
        ),
    ),
    "closed": (
        "system decoupled from the environments (theta_se = pi/2)",
        lambda literal: ScenarioConfig(
            name="closed",
            description="closed system",
            L_max=50,
            theta_ss_pi=0.4,
            theta_se_pi=0.5,
            theta_ee_pi=0.35,
            xi_ab=1.0,
            c_state=SqueezedC(xi_c=1.0),
            env=VacuumEnv(),
        ),
    ),
}


# Descriptive names accepted wherever a preset name is.
PRESET_ALIASES: Dict[str, str] = {
    "vacuum-env": "fig3a-vacuum",
    "squeezed-same-env": "fig3a-sq-same",
    "squeezed-alt-env": "fig3a-sq-alt",
    "squeeze-angle-sweep": "fig3b",
    "thermal-c": "fig4",
    "theta-ee-sweep": "fig5a",
    "theta-se-sweep": "fig5b",
    "thermal-env-sweep": "fig6",
    "phase-diagram": "fig2",
}

LITERAL_NC_PRESETS = ("fig4",)


def canonical_preset(name: str) -> str:
    """Registry key for a preset name or alias."""
    key = PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        choices = ", ".join(list(PRESETS) + list(PRESET_ALIASES))
        raise ScenarioError("preset", f"unknown preset {name!r}; choose from {choices}")
    return key


def preset(name: str, literal_nc: bool = False) -> ScenarioConfig:
    """
    Build a named preset. The scenario is named after the name asked for,
    so an alias writes its outputs under the alias.

    Raises:
        ScenarioError: If the name is unknown
    """
    cfg = PRESETS[canonical_preset(name)][1](literal_nc)
    return cfg if cfg.name == name else cfg.updated(name=name)

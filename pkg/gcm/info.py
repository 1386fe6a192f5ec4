"""
Bipartite and tripartite mutual information of the (A, B, C) state.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List

from gcm.gstate import CovLike, ModeLayout, entropy, reduce
from gcm.evolve import iter_system_cov
from gcm.logger import get_logger
from gcm.scenario import ScenarioConfig

logger = get_logger(__name__)

ABC = ModeLayout(("A", "B", "C"))
PARTITIONS = ("B", "C", "BC")

CSV_COLUMNS = ("L", "I2_AB", "I2_AC", "I2_ABC", "I3", "S_A", "S_B", "S_C", "S_AB", "S_AC", "S_ABC")


@dataclass(frozen=True)
class InfoRecord:
    """Entropies (nats) and mutual informations at one step."""

    L: int
    I2_AB: float
    I2_AC: float
    I2_ABC: float
    I3: float
    S_A: float
    S_B: float
    S_C: float
    S_AB: float
    S_AC: float
    S_ABC: float
    S_BC: float

    def row(self) -> List:
        data = asdict(self)
        return [data[name] for name in CSV_COLUMNS]


def subsystem_entropies(sigma_abc: CovLike) -> Dict[str, float]:
    """Von Neumann entropies of every nonempty subset of {A, B, C}."""
    subsets = ("A", "B", "C", "AB", "AC", "BC", "ABC")
    return {s: entropy(reduce(sigma_abc, ABC, list(s))) for s in subsets}


def bmi(sigma_abc: CovLike, partition: str) -> float:
    """I2(A:X) = S(A) + S(X) - S(AX) for X in {B, C, BC}."""
    if partition not in PARTITIONS:
        raise ValueError(f"partition must be one of {PARTITIONS}, got {partition!r}")
    s = subsystem_entropies(sigma_abc)
    return s["A"] + s[partition] - s["A" + partition]


def tmi(sigma_abc: CovLike) -> float:
    """I3(A:B:C) = I2(A:B) + I2(A:C) - I2(A:BC); negative values signal scrambling."""
    return record_from_cov(0, sigma_abc).I3


def record_from_cov(L: int, sigma_abc: CovLike) -> InfoRecord:
    s = subsystem_entropies(sigma_abc)
    i2_ab = s["A"] + s["B"] - s["AB"]
    i2_ac = s["A"] + s["C"] - s["AC"]
    i2_abc = s["A"] + s["BC"] - s["ABC"]
    return InfoRecord(
        L=L,
        I2_AB=i2_ab,
        I2_AC=i2_ac,
        I2_ABC=i2_abc,
        I3=i2_ab + i2_ac - i2_abc,
        S_A=s["A"],
        S_B=s["B"],
        S_C=s["C"],
        S_AB=s["AB"],
        S_AC=s["AC"],
        S_ABC=s["ABC"],
        S_BC=s["BC"],
    )


def info_series(cfg: ScenarioConfig) -> List[InfoRecord]:
    """One InfoRecord per step L = 1..L_max."""
    records = [record_from_cov(L, sigma) for L, sigma in iter_system_cov(cfg)]
    worst = min(records, key=lambda r: r.I3)
    logger.debug(f"scenario '{cfg.name}': min I3 = {worst.I3:.6g} at L = {worst.L}")
    return records

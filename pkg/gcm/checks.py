"""
Invariant suite behind `gcm check`.

Every check returns a CheckResult; comparator tables (appendix closed forms,
closed-form Lambda spectra) are informational and never fail the suite.
"""

import itertools
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from tabulate import tabulate

from gcm.evolve import appendix_cov, assemble_input, propagate, system_cov
from gcm.gstate import SingleModeSpec, physicality_margin, single_mode_cov, symplectic_eigenvalues, symplectic_form
from gcm.info import info_series
from gcm.logger import get_logger
from gcm.nonmarkov import channel_map, closed_form_eigs, gaussian_scaling, negativity_at, phase_diagram
from gcm.optics import channel_scatter, iter_total_scatter, lift, total_scatter
from gcm.scenario import PhaseGrid, ThermalC, preset
from gcm.sweep import apply_axis

logger = get_logger(__name__)

PI = np.pi


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _scatter_validity(quick: bool) -> CheckResult:
    L, n = (10, 3) if quick else (50, 11)
    grid = np.linspace(0, PI / 2, n)
    omega = symplectic_form(2 * L + 1)
    worst_orth = worst_symp = 0.0
    for ss, se, ee in itertools.product(grid, grid, grid):
        S = total_scatter(L, ss, se, ee)
        M = lift(S)
        worst_orth = max(worst_orth, S.orthogonality_error())
        worst_symp = max(worst_symp, float(np.max(np.abs(M @ omega @ M.T - omega))))
    ok = worst_orth < 1e-10 and worst_symp < 1e-10
    return CheckResult("scattering orthogonal and symplectic", ok, f"L={L}, {n}^3 grid, orth {worst_orth:.1e}, symp {worst_symp:.1e}")


def _physicality(quick: bool) -> CheckResult:
    L_max = 12 if quick else 50
    worst_margin, worst_purity = 0.0, 0.0
    for name in ("vacuum-env", "squeezed-same-env", "squeezed-alt-env", "thermal-c"):
        cfg = preset(name).updated(L_max=L_max)
        pure = not isinstance(cfg.c_state, ThermalC)
        for L, S in iter_total_scatter(L_max, cfg.theta_ss, cfg.theta_se, cfg.theta_ee):
            sigma = propagate(assemble_input(cfg, L)[0], S)
            worst_margin = min(worst_margin, physicality_margin(sigma))
            if pure:
                worst_purity = max(worst_purity, float(np.max(np.abs(symplectic_eigenvalues(sigma) - 0.5))))
    ok = worst_margin >= -1e-9 and worst_purity < 1e-8
    return CheckResult("global state physical and pure inputs stay pure", ok, f"margin {worst_margin:.1e}, purity {worst_purity:.1e}")


def _closed_system(quick: bool) -> CheckResult:
    cfg = preset("closed").updated(L_max=15 if quick else 50)
    worst = max(abs(r.I3) for r in info_series(cfg))
    return CheckResult("closed system has zero TMI", worst < 1e-9, f"max |I3| {worst:.1e}")


def _scrambling_presets(quick: bool) -> CheckResult:
    details, ok = [], True
    for name in ("vacuum-env", "squeezed-alt-env", "squeezed-same-env"):
        series = info_series(preset(name))
        low = min(r.I3 for r in series)
        final = series[-1].I3
        if name == "squeezed-same-env":
            ok &= low >= -1e-9
        else:
            ok &= low < -1e-3 and abs(final) < abs(low)
        details.append(f"{name}: min {low:.3g}, final {final:.3g}")
    return CheckResult("vacuum/alternative environments scramble, same-angle does not", ok, "; ".join(details))


def _angle_crossover(quick: bool) -> CheckResult:
    cfg = preset("squeeze-angle-sweep")
    lows = [min(r.I3 for r in info_series(apply_axis(cfg, "delta_phi", v))) for v in cfg.sweep.values]
    ok = all(b <= a + 1e-12 for a, b in zip(lows, lows[1:])) and int(np.argmin(lows)) == len(lows) - 1
    return CheckResult("min TMI decreases with squeezing-angle difference", ok, ", ".join(f"{v:.3g}" for v in lows))


def _thermal_c_angle_independence(quick: bool) -> CheckResult:
    cfg = preset("thermal-c")
    series = [np.array([r.I3 for r in info_series(apply_axis(cfg, "phi_E", v))]) for v in cfg.sweep.values]
    spread = max(float(np.max(np.abs(s - series[0]))) for s in series)
    low = float(np.min(series[0]))
    return CheckResult("thermal-C TMI independent of environment angle", spread < 1e-9 and low < -1e-3, f"spread {spread:.1e}, min {low:.3g}")


def _markov_boundary(quick: bool) -> CheckResult:
    L = 50
    vac = SingleModeSpec()
    row = max(negativity_at(L, se, PI / 2, vac).D for se in np.linspace(0, PI / 2, 11 if quick else 51))
    markov = negativity_at(L, 0.35 * PI, 0.35 * PI, vac).D
    non_markov = negativity_at(L, 0.25 * PI, 0.2 * PI, vac).D
    ok = row <= 1e-12 and markov <= 1e-12 and non_markov > 1e-8
    return CheckResult("Markovian boundary facts", ok, f"row max {row:.1e}, (0.35,0.35) {markov:.1e}, (0.25,0.2) {non_markov:.3g}")


def _boundary_invariance(quick: bool) -> CheckResult:
    n = 6 if quick else 21
    grid = PhaseGrid(L=20 if quick else 50, se_points=n, ee_points=n)
    envs = [SingleModeSpec(), SingleModeSpec(n=1.0), SingleModeSpec(r=0.5)]
    maps = [phase_diagram(grid, env).markovian for env in envs]
    ok = all(np.array_equal(maps[0], m) for m in maps[1:])
    return CheckResult("Markovian region independent of environment state", ok, f"{n}x{n} grid, {int(maps[0].sum())} Markovian points")


def _scaling_law(quick: bool) -> CheckResult:
    L = 20 if quick else 50
    ok, details = True, []
    for n_e, r_e in ((1.0, 0.0), (2.0, 0.0), (0.0, 0.3)):
        rep = gaussian_scaling(L, 0.25 * PI, 0.2 * PI, SingleModeSpec(n=n_e, r=r_e))
        if rep.both_branches_negative:
            ok &= rep.relative_deviation < 1e-6 and rep.zero_iff_zero
        details.append(f"(n={n_e}, r={r_e}) rel {rep.relative_deviation:.1e}")
    return CheckResult("D scales with (2n+1)cosh(2r)", ok, "; ".join(details))


def _channel_oracle(quick: bool) -> CheckResult:
    rng = np.random.default_rng(2024)
    env = SingleModeSpec(n=0.3, r=0.2, phi=0.7)
    L, worst = 6, 0.0
    for se, ee in itertools.product((0.2 * PI, 0.35 * PI), (0.15 * PI, 0.35 * PI)):
        cmap = channel_map(L, se, ee, env)
        S = channel_scatter(L, se, ee)
        env_cov = single_mode_cov(env).data
        for _ in range(5):
            test = single_mode_cov(SingleModeSpec(r=rng.uniform(0, 1), phi=rng.uniform(0, 2 * PI))).data
            joint = np.zeros((2 * L, 2 * L))
            joint[:2, :2] = test
            for k in range(1, L):
                joint[2 * k:2 * k + 2, 2 * k:2 * k + 2] = env_cov
            direct = propagate(joint, S).block(0, 0)
            worst = max(worst, float(np.max(np.abs(cmap.apply(test) - direct))))
    return CheckResult("channel map reproduces propagated mode", worst < 1e-10, f"max deviation {worst:.1e}")


def _bmi_decay_ordering(quick: bool) -> CheckResult:
    cfg = preset("theta-ee-sweep")
    firsts, details = [], []
    for v in cfg.sweep.values:
        series = info_series(apply_axis(cfg, "theta_ee", v))
        half = series[0].I2_ABC / 2
        first = next((r.L for r in series if r.I2_ABC < half), cfg.L_max + 1)
        firsts.append(first)
        details.append(f"theta_ee={v:g}pi: I2_ABC(1) {series[0].I2_ABC:.3g}, first L below half {first}")
    ok = all(b <= a for a, b in zip(firsts, firsts[1:]))
    return CheckResult("BMI decays faster for larger theta_ee", ok, "; ".join(details))


def thermal_env_peaks(L_max: int = 50) -> List[Tuple[float, float, int]]:
    """(n_E, max_L |I3|, argmax L) for each point of the thermal-environment sweep."""
    cfg = preset("thermal-env-sweep").updated(L_max=L_max)
    peaks = []
    for v in cfg.sweep.values:
        series = info_series(apply_axis(cfg, "n_E", v))
        top = max(series, key=lambda r: abs(r.I3))
        peaks.append((v, abs(top.I3), top.L))
    return peaks


def _thermal_env_ordering(quick: bool) -> CheckResult:
    # The vacuum point (n_E = 0) peaks above every thermal point; only n_E > 0 is ordered.
    peaks = thermal_env_peaks()
    thermal = [p for n_e, p, _ in peaks if n_e > 0]
    ok = all(b > a for a, b in zip(thermal, thermal[1:]))
    detail = ", ".join(f"n_E={n_e:g}: {p:.3g} at L={L}" for n_e, p, L in peaks)
    return CheckResult("peak |TMI| grows with thermal n_E > 0", ok, detail)


def _appendix_sigma_a(quick: bool) -> CheckResult:
    cfg = preset("vacuum-env").updated(L_max=10 if quick else 50)
    expected = 0.5 * np.cosh(cfg.xi_ab) * np.eye(2)
    worst = 0.0
    for L in range(1, cfg.L_max + 1):
        closed, _ = appendix_cov(cfg, L, "literal")
        worst = max(worst, float(np.max(np.abs(closed.block(0, 0) - expected))))
        worst = max(worst, float(np.max(np.abs(system_cov(cfg, L).block(0, 0) - expected))))
    return CheckResult("auxiliary mode never evolves", worst < 1e-12, f"max deviation {worst:.1e}")


def _channel_variants(quick: bool) -> CheckResult:
    env = SingleModeSpec(n=0.5)
    diff = max(
        abs(negativity_at(20, se, ee, env, "B").D - negativity_at(20, se, ee, env, "C").D)
        for se, ee in ((0.25 * PI, 0.2 * PI), (0.3 * PI, 0.15 * PI), (0.1 * PI, 0.4 * PI))
    )
    return CheckResult("channel B and C negativities agree", diff < 1e-12, f"max difference {diff:.1e}")


CHECKS: List[Tuple[str, Callable[[bool], CheckResult]]] = [
    ("scatter", _scatter_validity),
    ("physicality", _physicality),
    ("closed", _closed_system),
    ("scrambling", _scrambling_presets),
    ("angle-crossover", _angle_crossover),
    ("thermal-c", _thermal_c_angle_independence),
    ("markov", _markov_boundary),
    ("boundary", _boundary_invariance),
    ("scaling", _scaling_law),
    ("channel-oracle", _channel_oracle),
    ("bmi-decay", _bmi_decay_ordering),
    ("thermal-env", _thermal_env_ordering),
    ("appendix-A", _appendix_sigma_a),
    ("channel-variants", _channel_variants),
]


def run_checks(quick: bool = False) -> List[CheckResult]:
    results = []
    for key, check in CHECKS:
        try:
            result = check(quick)
        except Exception as e:
            logger.error(f"Check {key} raised: {e}")
            result = CheckResult(key, False, f"error: {e}")
        logger.info(f"Check {key}: {'PASS' if result.passed else 'FAIL'} ({result.detail})")
        results.append(result)
    return results


def results_table(results: List[CheckResult]) -> str:
    rows = [("PASS" if r.passed else "FAIL", r.name, r.detail) for r in results]
    return tabulate(rows, headers=["status", "invariant", "detail"], tablefmt="github")


def appendix_table() -> str:
    cfg = preset("vacuum-env").updated(L_max=10)
    steps = (1, 2, 5, 10)
    rows = []
    for L in steps:
        _, literal = appendix_cov(cfg, L, "literal")
        _, corrected = appendix_cov(cfg, L, "corrected")
        rows.append((L, literal.max_deviation, max(literal.blocks, key=literal.blocks.get), corrected.max_deviation))
    return tabulate(
        rows, headers=["L", "literal max dev", "worst block", "corrected max dev"], tablefmt="github", floatfmt=".2e"
    )


def closed_form_table() -> str:
    rows = []
    for frac in (0.1, 0.2, 0.25, 0.3, 0.4):
        for env in (SingleModeSpec(), SingleModeSpec(n=1.0), SingleModeSpec(r=0.5)):
            rep = closed_form_eigs(5, frac * PI, 0.2 * PI, env)
            rows.append((frac, env.n, env.r, rep.printed_deviation, rep.printed_ln_deviation, rep.consistent_deviation))
    return tabulate(
        rows,
        headers=["theta_se/pi", "n_E", "r_E", "printed dev", "printed ln dev", "consistent dev"],
        tablefmt="github",
        floatfmt=".2e",
    )

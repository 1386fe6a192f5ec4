"""
Tests for channel extraction, the divisibility matrix and the negativity measure.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from gcm.evolve import propagate
from gcm.gstate import SingleModeSpec, single_mode_cov
from gcm.nonmarkov import (
    DegenerateStepError,
    channel_map,
    closed_form_eigs,
    gaussian_scaling,
    iter_channel_maps,
    lambda_matrix,
    negativity,
    negativity_at,
    phase_diagram,
)
from gcm.optics import ScatterError, channel_scatter
from gcm.scenario import PhaseGrid, preset

PI = np.pi
VACUUM = SingleModeSpec()


def test_identity_channel():
    for L in (2, 5, 9):
        cmap = channel_map(L, PI / 2, 0.3 * PI, SingleModeSpec(n=0.7))
        assert_allclose(cmap.X, np.eye(2), atol=1e-15)
        assert_allclose(cmap.Y, np.zeros((2, 2)), atol=1e-15)
    lam = lambda_matrix(channel_map(4, PI / 2, 0.3 * PI, VACUUM), channel_map(3, PI / 2, 0.3 * PI, VACUUM))
    assert_allclose(lam.matrix, np.zeros((2, 2)), atol=1e-15)


def test_two_step_vacuum_example():
    cmap = channel_map(2, PI / 4, 0.2 * PI, VACUUM)
    assert_allclose(cmap.X, np.sqrt(2) / 2 * np.eye(2), atol=1e-12)
    assert_allclose(cmap.Y, 0.25 * np.eye(2), atol=1e-12)


def test_channel_map_needs_two_steps():
    with pytest.raises(ScatterError):
        channel_map(1, PI / 4, 0.2 * PI, VACUUM)


def test_channel_map_reproduces_propagated_mode():
    rng = np.random.default_rng(11)
    env = SingleModeSpec(n=0.3, r=0.2, phi=0.7)
    L = 6
    cmap = channel_map(L, 0.3 * PI, 0.15 * PI, env)
    S = channel_scatter(L, 0.3 * PI, 0.15 * PI)
    env_cov = single_mode_cov(env).data
    for _ in range(5):
        test = single_mode_cov(SingleModeSpec(r=rng.uniform(0, 1), phi=rng.uniform(0, 2 * PI))).data
        joint = np.zeros((2 * L, 2 * L))
        joint[:2, :2] = test
        for k in range(1, L):
            joint[2 * k:2 * k + 2, 2 * k:2 * k + 2] = env_cov
        assert_allclose(cmap.apply(test), propagate(joint, S).block(0, 0), atol=1e-10)


def test_incremental_maps_match_fresh_ones():
    env = SingleModeSpec(n=0.2)
    for cmap in iter_channel_maps(7, 0.25 * PI, 0.2 * PI, env):
        fresh = channel_map(cmap.L, 0.25 * PI, 0.2 * PI, env)
        assert_allclose(cmap.Y, fresh.Y, atol=1e-12)
        assert cmap.c11 == pytest.approx(fresh.c11, abs=1e-12)


def test_lambda_hermitian_and_consecutive():
    env = SingleModeSpec(n=0.4, r=0.3, phi=1.1)
    m5, m4 = channel_map(5, 0.2 * PI, 0.3 * PI, env), channel_map(4, 0.2 * PI, 0.3 * PI, env)
    lam = lambda_matrix(m5, m4)
    assert_allclose(lam.matrix, lam.matrix.conj().T, atol=1e-12)
    with pytest.raises(ValueError):
        lambda_matrix(m5, channel_map(3, 0.2 * PI, 0.3 * PI, env))


def test_degenerate_step_is_flagged():
    m3, m2 = channel_map(3, 0.0, 0.3 * PI, VACUUM), channel_map(2, 0.0, 0.3 * PI, VACUUM)
    with pytest.raises(DegenerateStepError):
        lambda_matrix(m3, m2)
    report = negativity_at(10, 0.0, 0.3 * PI, VACUUM)
    assert report.degenerate_count == len(report.steps)
    assert report.D == 0.0


def test_markovian_examples():
    for se in np.linspace(0.0, 0.5, 51):
        assert negativity_at(50, se * PI, PI / 2, VACUUM).D <= 1e-12
    report = negativity_at(50, 0.35 * PI, 0.35 * PI, VACUUM)
    assert report.markovian
    assert report.lnD is None
    assert min(s.lambda_minus for s in report.steps) >= -1e-10


def test_non_markovian_example():
    report = negativity_at(50, 0.25 * PI, 0.2 * PI, VACUUM)
    assert report.D > 0
    assert not report.markovian
    assert report.lnD == pytest.approx(np.log(report.D))
    assert [s.L for s in report.steps] == list(range(3, 51))


def test_negativity_non_decreasing():
    report = negativity_at(40, 0.2 * PI, 0.15 * PI, SingleModeSpec(n=0.5))
    totals = [s.D for s in report.steps]
    assert all(b >= a for a, b in zip(totals, totals[1:]))


def test_negativity_requires_three_steps():
    with pytest.raises(ValueError):
        negativity_at(2, 0.25 * PI, 0.2 * PI, VACUUM)


def test_channel_variants_agree():
    env = SingleModeSpec(n=0.5)
    for se, ee in ((0.25, 0.2), (0.1, 0.4)):
        b = negativity_at(20, se * PI, ee * PI, env, "B").D
        c = negativity_at(20, se * PI, ee * PI, env, "C").D
        assert abs(b - c) < 1e-12


def test_scenario_negativity_uses_horizon():
    cfg = preset("theta-ee-sweep").updated(L_max=12)
    report = negativity(cfg)
    assert report.L_max == 12
    assert report.steps[-1].L == 12
    assert negativity(cfg, L_max=6).steps[-1].L == 6


def test_closed_form_thermal_matches_solver():
    rep = closed_form_eigs(5, 0.25 * PI, 0.2 * PI, SingleModeSpec(n=1.0))
    assert rep.printed_deviation < 1e-10
    assert rep.consistent_deviation < 1e-10


def test_closed_form_squeezed_prefers_consistent_reading():
    rep = closed_form_eigs(5, 0.25 * PI, 0.2 * PI, SingleModeSpec(r=0.5))
    assert rep.consistent_deviation < 1e-10
    assert rep.bracket != 0.0
    assert rep.printed_deviation > rep.consistent_deviation


def test_closed_form_ln_reading_is_reported():
    identity = closed_form_eigs(5, PI / 2, 0.2 * PI, SingleModeSpec(n=1.0))
    assert np.isnan(identity.printed_ln_deviation)
    rep = closed_form_eigs(5, 0.25 * PI, 0.2 * PI, SingleModeSpec(n=1.0))
    expected = np.max(np.abs(np.subtract(rep.printed_ln, rep.numeric)))
    assert_allclose(rep.printed_ln_deviation, expected, equal_nan=True)


def test_closed_form_identity_channel():
    rep = closed_form_eigs(5, PI / 2, 0.2 * PI, SingleModeSpec(n=1.0))
    assert rep.bracket == pytest.approx(0.0, abs=1e-15)
    assert_allclose(rep.numeric, (0.0, 0.0), atol=1e-15)


def test_gaussian_scaling():
    vac = gaussian_scaling(30, 0.25 * PI, 0.2 * PI, VACUUM)
    assert vac.factor == 1.0
    assert vac.relative_deviation == pytest.approx(0.0, abs=1e-12)
    thermal = gaussian_scaling(30, 0.25 * PI, 0.2 * PI, SingleModeSpec(n=1.0))
    assert thermal.D_G / thermal.D_vac == pytest.approx(3.0, rel=1e-6)
    squeezed = gaussian_scaling(30, 0.25 * PI, 0.2 * PI, SingleModeSpec(r=0.3))
    assert squeezed.relative_deviation < 1e-6
    markov = gaussian_scaling(30, 0.35 * PI, 0.35 * PI, SingleModeSpec(n=1.0))
    assert markov.zero_iff_zero


def test_phase_diagram_layout_and_markovian_row():
    grid = PhaseGrid(L=12, se_points=3, ee_points=3)
    result = phase_diagram(grid, VACUUM, workers=2)
    rows = list(result.rows())
    assert len(rows) == 9
    assert [(r[0], r[1]) for r in rows[:3]] == [(0.0, 0.0), (0.0, 0.25), (0.0, 0.5)]
    assert all(r[3] == 1 for r in rows if r[1] == 0.5)
    assert result.degenerate[0].all()


def test_phase_boundary_independent_of_environment():
    grid = PhaseGrid(L=20, se_points=5, ee_points=5)
    vacuum = phase_diagram(grid, VACUUM, workers=2).markovian
    for env in (SingleModeSpec(n=1.0), SingleModeSpec(r=0.5)):
        assert np.array_equal(phase_diagram(grid, env, workers=2).markovian, vacuum)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

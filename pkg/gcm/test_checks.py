"""
Tests that run the real invariant suite and repeat every preset run.
"""
import pytest

from gcm.checks import CHECKS, closed_form_table, results_table, run_checks
from gcm.scenario import PRESETS, preset
from gcm.sweep import run_evolve


def test_quick_suite_passes():
    results = run_checks(quick=True)
    assert len(results) == len(CHECKS)
    failed = [(r.name, r.detail) for r in results if not r.passed]
    assert not failed, failed
    assert "FAIL" not in results_table(results)

    by_key = {key: result for (key, _), result in zip(CHECKS, results)}
    detail = by_key["thermal-env"].detail
    for n_e in ("0", "0.5", "1", "2"):
        assert f"n_E={n_e}:" in detail
    assert "first L below half" in by_key["bmi-decay"].detail


def test_closed_form_table_shows_every_reading():
    table = closed_form_table()
    for header in ("printed dev", "printed ln dev", "consistent dev"):
        assert header in table


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_is_byte_identical_on_rerun(name, tmp_path):
    cfg = preset(name)
    [first] = run_evolve(cfg, str(tmp_path / "first"))
    [second] = run_evolve(cfg, str(tmp_path / "second"))
    with open(first, "rb") as f1, open(second, "rb") as f2:
        assert f1.read() == f2.read()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

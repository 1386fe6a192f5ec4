"""
Tests for Gaussian state construction, symplectic spectra and entropies.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from gcm.gstate import (
    CovMatrix,
    ModeLayout,
    SingleModeSpec,
    UnphysicalCovarianceError,
    direct_sum,
    entropy,
    entropy_of_nu,
    is_physical,
    mean_photon_number,
    reduce,
    single_mode_cov,
    squeezed_vac_cov,
    symplectic_eigenvalues,
    thermal_cov,
    tmsv_cov,
    vacuum_cov,
)


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _characteristic_oracle(spec, h=1e-4):
    """Second moments from central differences of exp(-X|mu|^2 - Re(Y mu*^2)) at mu = 0."""
    X, Y = spec.X, spec.Y

    def chi(a, b):
        return np.exp(-X * (a * a + b * b) - Y.real * (a * a - b * b) - 2.0 * a * b * Y.imag)

    d2_bb = (chi(0, h) - 2 * chi(0, 0) + chi(0, -h)) / h**2
    d2_aa = (chi(h, 0) - 2 * chi(0, 0) + chi(-h, 0)) / h**2
    d2_ab = (chi(h, h) - chi(h, -h) - chi(-h, h) + chi(-h, -h)) / (4 * h**2)
    return np.array([[-d2_bb / 2, d2_ab / 2], [d2_ab / 2, -d2_aa / 2]])


def test_single_mode_examples():
    assert_allclose(single_mode_cov(SingleModeSpec()).data, 0.5 * np.eye(2))
    assert_allclose(single_mode_cov(SingleModeSpec(n=1.0)).data, 1.5 * np.eye(2))
    squeezed = single_mode_cov(SingleModeSpec(r=0.5)).data
    assert_allclose(np.diag(squeezed), [np.e / 2, np.exp(-1) / 2], atol=1e-12)
    assert abs(squeezed[0, 1]) < 1e-15


def test_single_mode_rejects_bad_parameters():
    with pytest.raises(ValueError):
        SingleModeSpec(n=-0.1)
    with pytest.raises(ValueError):
        SingleModeSpec(r=-1.0)
    with pytest.raises(ValueError):
        SingleModeSpec(alpha=(0.1, 0.0))
    with pytest.raises(ValueError):
        SingleModeSpec(n=0.0, extra=1.0)


def test_phi_is_folded():
    assert SingleModeSpec(phi=2 * np.pi + 0.25).phi == pytest.approx(0.25)
    assert 0.0 <= SingleModeSpec(phi=-0.5).phi < 2 * np.pi


def test_single_mode_matches_characteristic_function_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        spec = SingleModeSpec(n=rng.uniform(0, 2), r=rng.uniform(0, 1), phi=rng.uniform(0, 2 * np.pi))
        assert_allclose(single_mode_cov(spec).data, _characteristic_oracle(spec), atol=1e-6)


def test_tmsv_blocks_and_purity():
    assert_allclose(tmsv_cov(0.0).data, 0.5 * np.eye(4))
    sigma = tmsv_cov(1.0)
    assert_allclose(sigma.block(0, 0), 0.77154 * np.eye(2), atol=1e-5)
    assert_allclose(sigma.block(1, 1), 0.77154 * np.eye(2), atol=1e-5)
    assert_allclose(sigma.block(0, 1), np.diag([0.58760, -0.58760]), atol=1e-5)
    assert_allclose(symplectic_eigenvalues(sigma), [0.5, 0.5], atol=1e-10)
    assert is_physical(sigma)


def test_squeezed_vacuum_orientation():
    assert_allclose(squeezed_vac_cov(0.0).data, 0.5 * np.eye(2))
    assert_allclose(squeezed_vac_cov(1.0, 0.0).data, np.diag([np.e / 2, np.exp(-1) / 2]), atol=1e-12)
    assert_allclose(squeezed_vac_cov(1.0, np.pi).data, np.diag([np.exp(-1) / 2, np.e / 2]), atol=1e-12)
    with pytest.raises(ValueError):
        squeezed_vac_cov(-0.2)


def test_thermal_examples():
    assert_allclose(thermal_cov(0.0).data, 0.5 * np.eye(2))
    assert_allclose(thermal_cov(np.sinh(1.0) ** 2).data, 1.88109 * np.eye(2), atol=1e-5)
    assert_allclose(thermal_cov(np.cosh(1.0) / 2 - 0.5).data, 0.77154 * np.eye(2), atol=1e-5)
    with pytest.raises(ValueError):
        thermal_cov(-1.0)


def test_symplectic_eigenvalues_examples():
    assert_allclose(symplectic_eigenvalues(vacuum_cov()), [0.5])
    assert_allclose(symplectic_eigenvalues(thermal_cov(1.0)), [1.5])
    with pytest.raises(UnphysicalCovarianceError):
        symplectic_eigenvalues(np.eye(3))


def test_symplectic_eigenvalues_rotation_invariant():
    rng = np.random.default_rng(11)
    for _ in range(5):
        spec = SingleModeSpec(n=rng.uniform(0, 2), r=rng.uniform(0, 1), phi=rng.uniform(0, 2 * np.pi))
        sigma = single_mode_cov(spec).data
        R = _rotation(rng.uniform(0, 2 * np.pi))
        assert_allclose(symplectic_eigenvalues(sigma), symplectic_eigenvalues(R @ sigma @ R.T), atol=1e-10)


def test_entropy_examples():
    assert entropy(vacuum_cov()) == 0.0
    assert entropy(thermal_cov(1.0)) == pytest.approx(2 * np.log(2), abs=1e-9)
    reduced_b = reduce(tmsv_cov(1.0), ModeLayout(("A", "B")), ["B"])
    assert entropy(reduced_b) == pytest.approx(0.65951, abs=1e-5)


def test_entropy_vanishes_on_pure_constructors():
    for sigma in (tmsv_cov(1.3), squeezed_vac_cov(0.8, 1.1), vacuum_cov(3)):
        assert abs(entropy(sigma)) < 1e-10


def test_entropy_additive_over_direct_sums():
    parts = [thermal_cov(0.7), single_mode_cov(SingleModeSpec(n=0.3, r=0.4, phi=1.0)), tmsv_cov(0.9)]
    joint = direct_sum(*parts)
    assert entropy(joint) == pytest.approx(sum(entropy(p) for p in parts), abs=1e-10)


def test_entropy_flags_unphysical_eigenvalue():
    with pytest.raises(UnphysicalCovarianceError):
        entropy_of_nu(0.4)
    assert entropy_of_nu(0.5 + 1e-13) == 0.0


def test_cov_matrix_validation():
    with pytest.raises(UnphysicalCovarianceError):
        CovMatrix(np.array([[1.0, 0.2], [0.0, 1.0]]))
    with pytest.raises(UnphysicalCovarianceError):
        CovMatrix(np.eye(3))
    assert not is_physical(0.1 * np.eye(2))


def test_reduce_examples():
    layout = ModeLayout(("A", "B"))
    sigma = tmsv_cov(1.0)
    assert_allclose(reduce(sigma, layout, ["A"]).data, np.cosh(1.0) / 2 * np.eye(2))
    assert_allclose(reduce(sigma, layout, ["B", "A"]).data, sigma.data)
    joint = direct_sum(vacuum_cov(), thermal_cov(1.0))
    assert_allclose(reduce(joint, ModeLayout(("V", "T")), ["T"]).data, 1.5 * np.eye(2))
    with pytest.raises(KeyError):
        reduce(sigma, layout, ["C"])


def test_layout_positions():
    layout = ModeLayout.for_step(3)
    assert layout.labels == ("EB2", "EB1", "B", "A", "C", "EC1", "EC2")
    assert layout.index("B") == 2 and layout.index("A") == 3 and layout.index("C") == 4
    assert layout.n_modes == 7


def test_mean_photon_number():
    assert mean_photon_number(thermal_cov(2.0)) == pytest.approx(2.0)
    assert mean_photon_number(squeezed_vac_cov(1.0)) == pytest.approx(np.sinh(0.5) ** 2)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

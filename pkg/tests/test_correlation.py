import numpy as np
import pytest

from conftest import narrowband_ula, paper_manifold
from oracles import dirichlet, psl_brute, ula_scf
from wbarray.correlation import (
    PSL_FLOOR_DB,
    CorrMap,
    ScfMap,
    apply_operator,
    correlation_function,
    correlation_function_with_operator,
    default_angle_grid,
    effective_scf,
    peak_sidelobe_level,
    scf,
)
from wbarray.design import OperatorTensor
from wbarray.errors import DimensionError, DomainError
from wbarray.manifold import PathParams, steering, steering_grid, synthesize_channel, uniform_angle_grid
from wbarray.multiway import random_complex_normal

GRID = default_angle_grid()
COARSE = uniform_angle_grid(120)


def test_default_grid():
    assert len(GRID) == 720
    assert GRID[-1] == np.pi
    assert GRID[0] > -np.pi
    assert np.diff(GRID) == pytest.approx(np.full(719, np.pi / 360))


def test_scf_unit_diagonal_and_hermitian(paper_low):
    z = scf(paper_low, COARSE).values
    np.testing.assert_allclose(np.diag(z), 1.0, atol=1e-12)
    np.testing.assert_allclose(z, z.conj().T, atol=1e-12)


def test_two_element_scf_null():
    m = narrowband_ula(2)
    z = scf(m, [0.0, np.pi / 2], normalize=False).values / 2
    assert abs(z[0, 1]) < 1e-15


def test_scf_matches_ula_dirichlet():
    m = narrowband_ula(6)
    z = scf(m, COARSE, normalize=False).values
    np.testing.assert_allclose(z, ula_scf(6, COARSE), atol=1e-10)


def test_cauchy_schwarz_on_raw_maps(paper_low):
    z = scf(paper_low, COARSE, normalize=False).values
    d = np.real(np.diag(z))
    assert np.all(np.abs(z) <= np.sqrt(np.outer(d, d)) + 1e-12)
    phi = random_complex_normal((32, 8, 32, 8), seed=5)
    z = effective_scf(paper_low, phi, COARSE, normalize=False).values
    d = np.real(np.diag(z))
    assert np.all(np.abs(z) <= np.sqrt(np.outer(d, d)) * (1 + 1e-12))


def test_bandwidth_reduces_ambiguity(paper_low, paper_high):
    lo = peak_sidelobe_level(scf(paper_low, GRID))
    hi = peak_sidelobe_level(scf(paper_high, GRID))
    assert lo > 20 * np.log10(0.9)
    assert hi < lo


def test_identity_operator_reproduces_scf(paper_low):
    eye = OperatorTensor.identity(32, 8).phi
    for normalize in (True, False):
        a = scf(paper_low, COARSE, normalize).values
        b = effective_scf(paper_low, eye, COARSE, normalize).values
        np.testing.assert_allclose(b, a, atol=1e-12)


def test_random_operator_does_not_help(paper_low, paper_high):
    target = scf(paper_high, COARSE).values
    plain = scf(paper_low, COARSE).values
    rand = effective_scf(paper_low, OperatorTensor.random(32, 8, seed=0).phi, COARSE).values
    assert np.linalg.norm(rand - target) >= 0.9 * np.linalg.norm(plain - target)


def test_effective_scf_dims_mismatch(paper_low):
    with pytest.raises(DimensionError):
        effective_scf(paper_low, np.zeros((4, 2, 4, 2)), COARSE)


def test_apply_operator_identity_and_homogeneity():
    s = random_complex_normal((4, 3), seed=1)
    eye = OperatorTensor.identity(4, 3).phi
    np.testing.assert_array_equal(apply_operator(eye, s), s)
    np.testing.assert_allclose(apply_operator(2 * eye, s), 2 * s, rtol=1e-15)


def test_apply_operator_matches_flattened_matvec():
    for seed in range(5):
        phi = random_complex_normal((3, 5, 4, 2), seed)
        s = random_complex_normal((4, 2), seed + 100)
        expected = (phi.reshape(15, 8) @ s.reshape(8)).reshape(3, 5)
        out = apply_operator(phi, s)
        assert np.linalg.norm(out - expected) <= 1e-12 * np.linalg.norm(expected)


def test_apply_operator_dims_mismatch():
    with pytest.raises(DimensionError):
        apply_operator(np.zeros((2, 2, 3, 3)), np.zeros((2, 2)))


def test_matched_filter_peaks_at_source(paper_low):
    theta0, tau0 = 0.9, 0.4
    x = synthesize_channel(paper_low, [PathParams(1.0, theta0, tau0)])
    c = correlation_function(x, paper_low, GRID, tau0)
    nearest = np.argmin(np.abs(GRID - theta0))
    assert np.argmax(np.abs(c.values)) == nearest


def test_corr_two_element_closed_form():
    m = narrowband_ula(2)
    theta0 = 0.4
    x = steering(m, theta0)
    c = correlation_function(x, m, COARSE, tau=1.0).values
    expected = 1 + np.exp(1j * np.pi * (np.sin(COARSE) - np.sin(theta0)))
    np.testing.assert_allclose(c, expected, atol=1e-12)


def test_corr_global_phase_invariance(paper_low):
    x = synthesize_channel(paper_low, [PathParams(1.0, -0.5, 0.7)], 0.01, seed=2)
    a = np.abs(correlation_function(x, paper_low, COARSE, 0.7).values)
    b = np.abs(correlation_function(np.exp(1.3j) * x, paper_low, COARSE, 0.7).values)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_corr_with_identity_and_zero_operator(paper_low):
    x = synthesize_channel(paper_low, [PathParams(1.0, np.pi / 4, 0.3)])
    plain = correlation_function(x, paper_low, COARSE, 0.3).values
    eye = OperatorTensor.identity(32, 8).phi
    with_eye = correlation_function_with_operator(x, eye, paper_low, COARSE, 0.3).values
    np.testing.assert_array_equal(with_eye, plain)
    zero = correlation_function_with_operator(x, np.zeros_like(eye), paper_low, COARSE, 0.3).values
    assert np.all(zero == 0)


def test_corr_dims_mismatch(paper_low):
    with pytest.raises(DimensionError):
        correlation_function(np.zeros((4, 8)), paper_low, COARSE, 0.3)


def test_precomputed_grid_equals_manifold_path(paper_low):
    grid = steering_grid(paper_low, COARSE)
    np.testing.assert_array_equal(scf(grid).values, scf(paper_low, COARSE).values)
    with pytest.raises(DimensionError):
        scf(grid, angles=COARSE[:-1])


def test_psl_dirichlet_ula():
    n = 16
    m = narrowband_ula(n)
    angles = uniform_angle_grid(720, -np.pi / 2, np.pi / 2)
    c = correlation_function(steering(m, angles[359]), m, angles, tau=1.0)
    halfwidth = np.deg2rad(8.0)
    closed = np.abs(dirichlet(n, np.sin(angles) - np.sin(angles[359])))
    level = peak_sidelobe_level(c, halfwidth)
    assert level == pytest.approx(psl_brute(angles, closed, halfwidth), abs=1e-9)
    assert -13.5 < level < -12.5


def test_psl_delta_map_reports_floor():
    values = np.zeros(10)
    values[3] = 1.0
    c = CorrMap(uniform_angle_grid(10), 0.5, values)
    assert peak_sidelobe_level(c, 0.1) == PSL_FLOOR_DB


def test_psl_scf_reports_worst_row():
    angles = uniform_angle_grid(36)
    z = np.eye(36, dtype=complex)
    z[0, 18] = z[18, 0] = 0.5
    z[5, 30] = z[30, 5] = 0.1
    level = peak_sidelobe_level(ScfMap(angles, z, True), np.deg2rad(15))
    assert level == pytest.approx(20 * np.log10(0.5))


def test_psl_domain_errors():
    c = CorrMap(uniform_angle_grid(10), 0.5, np.ones(10))
    with pytest.raises(DomainError):
        peak_sidelobe_level(c, 4.0)
    with pytest.raises(DomainError):
        peak_sidelobe_level(c, 0.0)
    with pytest.raises(DomainError):
        peak_sidelobe_level(CorrMap(c.angles, 0.5, np.zeros(10)), 0.1)

import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from scipy import special

from oscint import (
    ConvergenceError,
    DecayFit,
    DirectionSlope,
    QuadratureBudgetError,
    SurfacePatch,
    SurfaceQuadrature,
    composite_gauss_legendre,
    decay_directions,
    decay_fit,
    fit_loglog,
    fourier_surface_measure,
    gamma_bound_check,
    gamma_ratio,
    magnitude_grid,
    radial_mass,
    radial_oracle,
    stationary_phase_amplitude,
)
from polyalg import parse

PARABOLOID = parse("x1^2 + x2^2 + x3^2")


@pytest.fixture(scope="module")
def paraboloid():
    return SurfacePatch(PARABOLOID)


@pytest.fixture(scope="module")
def paraboloid_quadrature(paraboloid):
    return SurfaceQuadrature(paraboloid)


# ============================================================================
# SURFACE PATCH
# ============================================================================

def test_bump_is_supported_in_the_open_ball(paraboloid):
    x = np.array([[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.5, 0.0, 0.0], [0.4, 0.4, 0.0]])
    values = paraboloid.bump_values(x)
    assert values[0] == 1.0
    assert 0.0 < values[1] < 1.0
    assert values[2] == 0.0
    assert values[3] == 0.0


def test_poly_power_bump():
    patch = SurfacePatch(PARABOLOID, bump_kind='poly_power', bump_power=3)
    assert patch.bump_values(np.array([0.25, 0.0, 0.0])) == pytest.approx(0.75 ** 3)


def test_area_factor(paraboloid):
    x = np.array([[0.0, 0.0, 0.0], [0.1, 0.2, 0.2]])
    assert paraboloid.area_factor(x) == pytest.approx([1.0, math.sqrt(1.0 + 4 * 0.09)])
    flat = SurfacePatch(PARABOLOID, include_area_factor=False)
    assert np.all(flat.area_factor(x) == 1.0)


def test_gradient_bounds(paraboloid):
    assert paraboloid.gradient_bounds() == [1.0, 1.0, 1.0]
    quartic = SurfacePatch(parse("x1^2 + x2^2 + x3^4"))
    assert quartic.gradient_bounds() == [1.0, 1.0, 0.5]


def test_patch_validation():
    with pytest.raises(ValueError):
        SurfacePatch(PARABOLOID, bump_radius=0.0)
    with pytest.raises(ValueError):
        SurfacePatch(PARABOLOID, bump_kind='gaussian')
    with pytest.raises(ValueError):
        SurfacePatch(PARABOLOID, bump_kind='poly_power', bump_power=0)


# ============================================================================
# QUADRATURE
# ============================================================================

def test_composite_gauss_legendre_is_exact_on_polynomials():
    nodes, weights = composite_gauss_legendre(-1.0, 1.0, 1)
    assert np.sum(weights * nodes ** 14) == pytest.approx(2.0 / 15.0, rel=1e-13)
    nodes, weights = composite_gauss_legendre(0.0, 3.0, 5)
    assert np.sum(weights) == pytest.approx(3.0)
    assert np.all((nodes > 0.0) & (nodes < 3.0))


def test_zero_frequency_matches_radial_mass(paraboloid, paraboloid_quadrature):
    result = paraboloid_quadrature.compute(np.zeros(4))
    assert result.converged
    assert result.value.imag == pytest.approx(0.0, abs=1e-12)
    assert result.value.real == pytest.approx(radial_mass(paraboloid), rel=1e-6)
    assert radial_oracle(paraboloid, 0.0).real == pytest.approx(radial_mass(paraboloid), rel=1e-8)


def test_radial_mass_without_area_factor():
    flat = SurfacePatch(parse("x1^2 + x2^4 + x3^4"), include_area_factor=False)
    quadrature = SurfaceQuadrature(flat)
    assert quadrature.mass == pytest.approx(radial_mass(flat), rel=1e-6)


def test_conjugate_symmetry(paraboloid_quadrature):
    xi = np.array([3.0, -1.0, 2.0, 25.0])
    forward = paraboloid_quadrature.compute(xi).value
    backward = paraboloid_quadrature.compute(-xi).value
    assert backward == pytest.approx(forward.conjugate(), abs=1e-12)


def test_coordinate_swap_equivariance():
    quadrature = SurfaceQuadrature(SurfacePatch(parse("x1^2 + x2^2 + x3^4")))
    value = quadrature.compute([4.0, -1.5, 2.0, 30.0]).value
    swapped = quadrature.compute([-1.5, 4.0, 2.0, 30.0]).value
    assert abs(value - swapped) <= 1e-9 * abs(value)


@pytest.mark.parametrize("lam", [5.0, 20.0, 60.0])
def test_quadrature_matches_radial_oracle(paraboloid, paraboloid_quadrature, lam):
    value = paraboloid_quadrature.compute([0.0, 0.0, 0.0, lam]).value
    oracle = radial_oracle(paraboloid, lam)
    assert abs(value - oracle) <= 1e-5 * abs(oracle)


def test_fourier_surface_measure_shortcut(paraboloid):
    assert fourier_surface_measure(paraboloid, [0.0, 0.0, 0.0, 20.0]) == pytest.approx(
        radial_oracle(paraboloid, 20.0), rel=1e-5)


def test_stationary_phase_constant(paraboloid):
    # Hessian of |x|^2 is 2I, so the leading constant is (2 pi)^{3/2} / sqrt(8) = pi^{3/2}
    assert stationary_phase_amplitude(8.0, 3) == pytest.approx(math.pi ** 1.5)
    lam = 4000.0
    scaled = abs(radial_oracle(paraboloid, lam)) * lam ** 1.5
    assert scaled == pytest.approx(math.pi ** 1.5, rel=1e-2)
    with pytest.raises(ValueError):
        stationary_phase_amplitude(0.0, 3)


def test_radial_oracle_decays_at_three_halves(paraboloid):
    lams = np.geomspace(100.0, 6400.0, 7)
    values = [abs(radial_oracle(paraboloid, lam)) for lam in lams]
    slope, _, _ = fit_loglog(lams, values)
    assert slope == pytest.approx(-1.5, abs=0.02)


def test_radial_oracle_rejects_other_surfaces():
    with pytest.raises(ValueError):
        radial_oracle(SurfacePatch(parse("x1^2 + x2^2 + x3^4")), 10.0)
    with pytest.raises(ValueError):
        radial_mass(SurfacePatch(parse("x1^2 + x2^2 + x3^4")))


def test_budget_error_carries_the_request(paraboloid):
    quadrature = SurfaceQuadrature(paraboloid, budget=1000)
    with pytest.raises(QuadratureBudgetError) as info:
        quadrature.compute([0.0, 0.0, 0.0, 10.0])
    assert info.value.evaluations > 1000
    assert info.value.budget == 1000
    assert info.value.xi == (0.0, 0.0, 0.0, 10.0)
    assert info.value.partial == []


def test_convergence_guard(paraboloid):
    quadrature = SurfaceQuadrature(paraboloid, min_panels=1, rel_tol=0.0, abs_tol_factor=0.0,
                                   max_doublings=0)
    with pytest.raises(ConvergenceError) as info:
        quadrature.compute([0.0, 0.0, 0.0, 40.0])
    assert info.value.panels == 2 * quadrature.panel_count(np.array([0.0, 0.0, 0.0, 40.0]), 4.0)

    result = quadrature.compute([0.0, 0.0, 0.0, 40.0], strict=False)
    assert not result.converged
    assert result.value != result.coarse_value


def test_evaluations_count_only_the_ball(paraboloid_quadrature):
    total = (16 * 8) ** 3
    inside = paraboloid_quadrature.evaluations(16)
    assert inside / total == pytest.approx(math.pi / 6, rel=0.05)


def test_compute_validation(paraboloid_quadrature):
    with pytest.raises(ValueError):
        paraboloid_quadrature.compute([0.0, 1.0])
    with pytest.raises(ValueError):
        paraboloid_quadrature.compute([0.0, 0.0, 0.0, math.inf])
    with pytest.raises(ValueError):
        paraboloid_quadrature.compute([0.0, 0.0, 0.0, 1.0], nodes_per_wavelength=2.0)


# ============================================================================
# DIRECTIONS, GRIDS AND FITS
# ============================================================================

@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=1000),
       st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=30, deadline=None)
def test_decay_directions(n_dirs, seed, max_tilt):
    directions = decay_directions(n_dirs, seed=seed, max_tilt=max_tilt)
    assert directions.shape == (n_dirs, 4)
    assert np.allclose(directions[0], [0.0, 0.0, 0.0, 1.0])
    assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)
    assert np.all(directions[:, -1] >= math.cos(max_tilt) - 1e-12)
    assert np.array_equal(directions, decay_directions(n_dirs, seed=seed, max_tilt=max_tilt))


def test_magnitude_grid():
    grid = magnitude_grid(8.0, 512.0, 8)
    assert grid[0] == pytest.approx(8.0)
    assert grid[-1] == pytest.approx(512.0)
    assert np.allclose(grid[1:] / grid[:-1], grid[1] / grid[0])
    with pytest.raises(ValueError):
        magnitude_grid(8.0, 512.0, 7)
    with pytest.raises(ValueError):
        magnitude_grid(8.0, 128.0, 8)


@given(st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=0.1, max_value=10.0))
def test_fit_loglog_recovers_power_laws(exponent, scale):
    x = np.geomspace(1.0, 100.0, 6)
    slope, intercept, stderr = fit_loglog(x, scale * x ** exponent)
    assert slope == pytest.approx(exponent, abs=1e-9)
    assert intercept == pytest.approx(math.log(scale), abs=1e-9)
    assert stderr == pytest.approx(0.0, abs=1e-6)


def test_fit_loglog_edge_cases():
    slope, _, stderr = fit_loglog([1.0, 2.0, 4.0], [1.0, 0.5, 0.25])
    assert slope == pytest.approx(-1.0)
    assert math.isnan(stderr)
    with pytest.raises(ValueError):
        fit_loglog([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        fit_loglog([1.0], [1.0])


def _fit_with_slopes(*slopes):
    directions = [DirectionSlope(i, (0.0, 0.0, 0.0, 1.0), s, 0.0, 0.01, 8) for i, s in enumerate(slopes)]
    worst = max(directions, key=lambda d: d.slope)
    return DecayFit(samples=[], directions=[d.direction for d in directions], magnitudes=[],
                    slopes=directions, fitted_exponent=-worst.slope, fit_stderr=0.01,
                    worst_direction=worst.index)


def test_conformance_uses_every_direction():
    fit = _fit_with_slopes(-1.5, -1.42)
    assert fit.conforms(2 / 3, slack=0.15)
    assert not fit.conforms(2 / 3, slack=0.05)
    summary = fit.summary(2 / 3)
    assert summary['worst_direction'] == 1
    assert summary['reference_exponent'] == pytest.approx(1.5)


# ============================================================================
# DECAY FITS
# ============================================================================

@pytest.mark.slow
def test_paraboloid_decay_fit(paraboloid):
    fit = decay_fit(paraboloid, 8.0, 256.0, 8, 3, seed=0, workers=4)
    assert fit.fitted_exponent == pytest.approx(1.5, abs=0.1)
    assert fit.conforms(2 / 3)
    assert all(s.slope <= -1.5 + 0.1 for s in fit.slopes)
    assert len(fit.rows()) == 24
    assert all(s.result.converged for s in fit.samples)


@pytest.mark.slow
def test_quartic_decay_fit_along_the_normal():
    patch = SurfacePatch(parse("x1^2 + x2^2 + x3^4"))
    fit = decay_fit(patch, 8.0, 512.0, 8, 1, seed=0, workers=4)
    assert fit.worst_direction == 0
    assert fit.fitted_exponent == pytest.approx(1.25, abs=0.1)


@pytest.mark.slow
def test_paraboloid_decay_fit_over_many_directions(paraboloid):
    fit = decay_fit(paraboloid, 8.0, 512.0, 8, 9, seed=0, workers=4)
    assert len(fit.slopes) == 9
    assert fit.fitted_exponent == pytest.approx(1.5, abs=0.1)
    assert all(s.slope == pytest.approx(-1.5, abs=0.1) for s in fit.slopes)
    assert fit.conforms(2 / 3)


@pytest.mark.slow
def test_quartic_decay_fit_over_many_directions():
    patch = SurfacePatch(parse("x1^2 + x2^2 + x3^4"))
    fit = decay_fit(patch, 8.0, 512.0, 8, 9, seed=0, workers=4)
    assert len(fit.slopes) == 9
    # the normal is the slowest direction; tilted ones pick up a nondegenerate point
    assert fit.slopes[0].slope == pytest.approx(-1.25, abs=0.1)
    assert fit.fitted_exponent == pytest.approx(1.25, abs=0.1)
    assert fit.conforms(0.8)


@pytest.mark.slow
def test_quadrature_reaches_the_stationary_phase_regime(paraboloid, paraboloid_quadrature):
    lam = 512.0
    value = paraboloid_quadrature.compute([0.0, 0.0, 0.0, lam]).value
    assert abs(value - radial_oracle(paraboloid, lam)) <= 1e-4 * abs(value)
    leading = stationary_phase_amplitude(8.0, 3) * lam ** -1.5
    assert abs(value) == pytest.approx(leading, rel=0.05)


@pytest.mark.slow
def test_decay_fit_is_independent_of_workers(paraboloid):
    serial = decay_fit(paraboloid, 8.0, 256.0, 8, 1, seed=3, workers=1)
    threaded = decay_fit(paraboloid, 8.0, 256.0, 8, 1, seed=3, workers=4)
    assert serial.rows() == threaded.rows()


@pytest.mark.slow
def test_decay_fit_reports_partial_samples_on_budget(paraboloid):
    with pytest.raises(QuadratureBudgetError) as info:
        decay_fit(paraboloid, 8.0, 256.0, 8, 1, budget=12_000_000)
    partial = info.value.partial
    assert len(partial) == 7
    assert [s.abs_xi for s in partial] == sorted(s.abs_xi for s in partial)


# ============================================================================
# GAMMA BOUND
# ============================================================================

def test_gamma_ratio_matches_scipy():
    y = np.linspace(-6.0, 6.0, 241)
    expected = np.abs(1.0 / special.gamma(1.0 + 1j * y)) * np.exp(-np.pi * np.abs(y))
    assert np.allclose(gamma_ratio(y), expected, rtol=1e-10, atol=0.0)


def test_gamma_bound_check():
    max_ratio, argmax = gamma_bound_check(50.0, 1001)
    assert max_ratio == pytest.approx(1.0)
    assert max_ratio <= 1.0
    assert argmax == pytest.approx(0.0, abs=1e-9)


def test_gamma_ratio_is_stable_for_large_arguments():
    values = gamma_ratio([1e3, 1e6, -1e9])
    assert np.all(np.isfinite(values))
    assert np.all(values >= 0.0)
    assert gamma_ratio(0.0) == 1.0


def test_gamma_bound_validation():
    with pytest.raises(ValueError):
        gamma_bound_check(0.0, 200)
    with pytest.raises(ValueError):
        gamma_bound_check(10.0, 99)

import numpy as np
import pytest

from oscinv.asymptotics import (build_expansion, expansion_coefficients,
                                lambda_profile, residual_norm)
from oscinv.basis import SeparableAmplitude, build_dirichlet_interval_basis
from oscinv.forward import solve_direct
from oscinv.sources import FastProfile, corner_values
from oscinv.traces import TimeTrace, uniform_grid

PI = np.pi
FEXPR = "exp(-t)*(sin(x) + 0.3*sin(3*x))"
REXPR = "1 + t + (1 + t/2)*cos(tau) + 0.4*sin(2*tau)"


# -- slow mode response ------------------------------------------------------


def test_lambda_profile_constant_drive(grid3):
    prof = lambda_profile(np.ones_like(grid3), 1.0, grid3)
    np.testing.assert_allclose(prof.values, 1.0 - np.cos(grid3), atol=1e-10)


def test_lambda_profile_linear_drive(grid3):
    prof = lambda_profile(grid3.copy(), 1.0, grid3)
    np.testing.assert_allclose(prof.values, grid3 - np.sin(grid3), atol=1e-10)


def test_lambda_profile_affine_drive_endpoint(grid3):
    # r0 = 1 + t at lambda = 1, t = 3: value is 4 - cos 3 - sin 3
    prof = lambda_profile(1.0 + grid3, 1.0, grid3)
    assert prof.values[-1] == pytest.approx(4.0 - np.cos(3.0) - np.sin(3.0),
                                            abs=1e-10)


def test_lambda_profile_scales_with_eigenvalue(grid3):
    # constant drive at lambda: (1 - cos(sqrt(lam) t))/lam
    prof = lambda_profile(np.ones_like(grid3), 9.0, grid3)
    np.testing.assert_allclose(prof.values, (1 - np.cos(3 * grid3)) / 9.0,
                               atol=1e-10)


# -- free-oscillation coefficients -------------------------------------------


def test_expansion_coefficients_frozen_example(grid3):
    basis = build_dirichlet_interval_basis(PI, 3)
    amp = SeparableAmplitude.from_expr(FEXPR)
    fm = amp.mode_traces(basis, grid3)
    r1 = FastProfile.from_specs([(1, "cos", "1 + t/2"), (2, "sin", 0.4)],
                                grid3)
    co = expansion_coefficients(fm, corner_values(r1))
    c = np.sqrt(PI / 2)
    fm0 = np.array([c, 0.0, 0.3 * c])
    # corners: rho0 = -1, rho0_tau = -0.2, rho0_t = -0.5 and fm'(0) = -fm(0)
    np.testing.assert_allclose(co["b1"], 0.2 * fm0, atol=1e-11)
    np.testing.assert_allclose(co["d"], fm0, atol=1e-11)
    np.testing.assert_allclose(co["b2"], 0.5 * fm0, atol=1e-10)


def test_time_invariant_amplitude_kills_b1_correction_growth(grid3):
    basis = build_dirichlet_interval_basis(PI, 2)
    amp = SeparableAmplitude.from_expr("sin(x)")
    fm = amp.mode_traces(basis, grid3)
    r1 = FastProfile.from_specs([(1, "cos", 1.0)], grid3)
    co = expansion_coefficients(fm, corner_values(r1))
    # cos corner: rho0_tau(0,0) = 0, rho0_t(0,0) = 0, fm'(0) = 0
    np.testing.assert_allclose(co["b1"], 0.0, atol=1e-12)
    np.testing.assert_allclose(co["b2"], 0.0, atol=1e-12)


# -- assembled expansion -----------------------------------------------------


@pytest.fixture(scope="module")
def expansion():
    basis = build_dirichlet_interval_basis(PI, 3)
    grid = uniform_grid(3.0, 3000)
    return build_expansion(basis, FEXPR, REXPR, grid), basis, grid


def test_leading_term_solves_slow_problem(expansion):
    exp, basis, grid = expansion
    amp = SeparableAmplitude.from_expr(FEXPR)
    fm = amp.mode_traces(basis, grid)
    for m in range(basis.M):
        env = fm[m].values * (1.0 + grid)
        direct = lambda_profile(env, basis.eigenvalues[m], grid)
        np.testing.assert_allclose(exp.u0_coeffs[m], direct.values, atol=1e-9)


def test_trace_components_geometry(expansion):
    exp, basis, grid = expansion
    x0 = PI / 2
    phi0, phi1, phi2, chi = exp.trace_components(x0, grid)
    modes = basis.eval_modes(np.array([x0]))[:, 0]
    np.testing.assert_allclose(phi0.values, exp.u0_on(grid).T @ modes,
                               atol=1e-12)
    # chi carries the corrector's fast profile scaled by f at the point
    fx0 = np.exp(-grid) * (np.sin(x0) + 0.3 * np.sin(3 * x0))
    np.testing.assert_allclose(chi.coefficient(1, "cos").values,
                               -(1 + grid / 2) * fx0, atol=1e-12)


def test_expansion_orders_differ_by_corrections(expansion):
    exp, basis, grid = expansion
    pts = np.array([1.0, 2.0])
    w = 200.0
    full = exp.evaluate(w, pts, grid, order=2)
    lead = exp.evaluate(w, pts, grid, order=0)
    gap = np.max(np.abs(full - lead))
    assert 1e-6 < gap < 1e-2      # corrections enter at 1/omega


def test_residual_shrinks_with_frequency(expansion):
    exp, basis, grid = expansion
    res = []
    for w in (100.0, 200.0):
        u = solve_direct(basis, FEXPR, REXPR, w, T=3.0)
        res.append(residual_norm(u, exp, w, order=2))
    # order o(w^-2) means better than 4x shrink per doubling
    assert res[1] < res[0] / 4.0


def test_order_zero_residual_first_order(expansion):
    exp, basis, grid = expansion
    res = []
    for w in (100.0, 200.0):
        u = solve_direct(basis, FEXPR, REXPR, w, T=3.0)
        res.append(residual_norm(u, exp, w, order=0))
    assert res[1] < res[0] / 1.6

import numpy as np
import pytest

from oscinv.basis import SeparableAmplitude, build_dirichlet_interval_basis
from oscinv.traces import TimeTrace, uniform_grid
from oscinv.volterra import (VolterraKernel, build_kernel, solve_second_kind,
                             volterra_residual)

PI = np.pi


def _exp_decay_setup(h):
    # a = 1, K = 1, g = 1  =>  u(t) = exp(-t)
    grid = uniform_grid(1.0, int(round(1.0 / h)))
    ones = np.ones_like(grid)
    return grid, ones


def test_unit_kernel_closed_form():
    grid, ones = _exp_decay_setup(1e-3)
    u = solve_second_kind(ones, lambda t, s: np.ones_like(s), ones, grid=grid)
    assert np.max(np.abs(u.values - np.exp(-grid))) < 5e-7


def test_marching_is_second_order():
    errs = []
    for h in (1e-2, 5e-3):
        grid, ones = _exp_decay_setup(h)
        u = solve_second_kind(ones, lambda t, s: np.ones_like(s), ones,
                              grid=grid)
        errs.append(np.max(np.abs(u.values - np.exp(-grid))))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)


def test_variable_multiplier_and_kernel():
    # manufactured: u = cos t with a = 2 + t, K(t,s) = t - s
    # g(t) = (2+t) cos t + int_0^t (t-s) cos s ds = (2+t) cos t + 1 - cos t
    grid = uniform_grid(2.0, 4000)
    a = 2.0 + grid
    g = (2 + grid) * np.cos(grid) + 1.0 - np.cos(grid)
    u = solve_second_kind(a, lambda t, s: t - s, g, grid=grid)
    assert np.max(np.abs(u.values - np.cos(grid))) < 1e-6


def test_vanishing_multiplier_rejected():
    grid = uniform_grid(1.0, 100)
    a = grid.copy()          # a(0) = 0: first-kind degeneracy
    with pytest.raises(ValueError):
        solve_second_kind(a, lambda t, s: np.zeros_like(s),
                          np.ones_like(grid), grid=grid)


# -- spectral trace kernel ---------------------------------------------------


@pytest.fixture(scope="module")
def trace_kernel():
    basis = build_dirichlet_interval_basis(PI, 4)
    grid = uniform_grid(3.0, 3000)
    amp = SeparableAmplitude.from_expr("exp(-t)*(sin(x) + 0.3*sin(3*x))")
    K = build_kernel(basis, amp, PI / 2, grid=grid)
    return K, basis, grid


def test_kernel_vanishes_on_diagonal(trace_kernel):
    K, _, grid = trace_kernel
    for t in (0.5, 1.7, 2.9):
        assert abs(K.evaluate(t, np.array([t]))[0]) < 1e-14


def test_kernel_structure(trace_kernel):
    # single-mode check against the explicit formula
    K, basis, grid = trace_kernel
    s = np.array([0.3])
    t = 1.1
    expect = 0.0
    wts = basis.eval_modes(np.array([PI / 2]))[:, 0]
    c = np.sqrt(PI / 2)
    fm0 = np.array([c, 0.0, 0.3 * c, 0.0]) * np.exp(-s[0])
    for m in range(4):
        lam = basis.eigenvalues[m]
        expect -= np.sqrt(lam) * fm0[m] * wts[m] * np.sin(np.sqrt(lam) * (t - s[0]))
    assert K.evaluate(t, s)[0] == pytest.approx(expect, abs=1e-12)


def test_separable_path_matches_generic(trace_kernel):
    K, basis, grid = trace_kernel
    g = TimeTrace.from_expr("1 + t/3", grid)
    a = np.full(grid.size, 0.7)
    fast = solve_second_kind(a, K, g, grid=grid)
    slow = solve_second_kind(a, K.evaluate, g, grid=grid)
    # same order-2 rule, different summation path: near-identical results
    assert np.max(np.abs(fast.values - slow.values)) < 1e-10


def test_residual_checks_marched_solution(trace_kernel):
    K, basis, grid = trace_kernel
    coarse = uniform_grid(3.0, 600)
    g = TimeTrace.from_expr("1 + t/3", coarse)
    a = np.ones(coarse.size)
    u = solve_second_kind(a, K, g, grid=coarse)
    res = volterra_residual(a, K, g, u)
    assert res < 5e-5
    # a corrupted solution must be flagged
    bad = TimeTrace(coarse, u.values + 1e-2 * np.sin(5 * coarse))
    assert volterra_residual(a, K, g, bad) > 1e-3


def test_boundary_observation_warns():
    basis = build_dirichlet_interval_basis(PI, 3)
    grid = uniform_grid(1.0, 100)
    amp = SeparableAmplitude.from_expr("sin(x)")
    with pytest.warns(UserWarning):
        build_kernel(basis, amp, 0.0, grid=grid)


def test_kernel_mode_truncation(trace_kernel):
    _, basis, grid = trace_kernel
    amp = SeparableAmplitude.from_expr("sin(x)")
    K2 = build_kernel(basis, amp, PI / 2, grid=grid, M=2)
    assert K2.M == 2

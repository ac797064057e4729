import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oscinv.basis import (SeparableAmplitude, SpatialField,
                          build_dirichlet_interval_basis,
                          build_rectangle_basis, build_sturm_liouville_basis,
                          check_boundary_traces, project, synthesize)
from oscinv.traces import uniform_grid

PI = np.pi


# -- interval ----------------------------------------------------------------


def test_interval_eigenvalues_and_indexing(interval_basis):
    np.testing.assert_allclose(interval_basis.eigenvalues,
                               np.arange(1, 9) ** 2, atol=1e-14)
    assert interval_basis.mode_index == tuple(range(1, 9))


def test_interval_modes_normalized(interval_basis):
    G = interval_basis.gram_matrix()
    np.testing.assert_allclose(G, np.eye(8), atol=1e-12)


def test_first_mode_coefficient_of_sine():
    basis = build_dirichlet_interval_basis(PI, 3)
    f = SpatialField.from_expr("sin(x)")
    c = basis.project(f.evaluate(basis.nodes))
    assert c[0] == pytest.approx(np.sqrt(PI / 2), abs=1e-13)
    np.testing.assert_allclose(c[1:], 0.0, atol=1e-13)


def test_interval_length_scaling():
    basis = build_dirichlet_interval_basis(2.0, 2)
    np.testing.assert_allclose(basis.eigenvalues,
                               [(PI / 2) ** 2, PI ** 2], atol=1e-12)


# -- rectangle ---------------------------------------------------------------


def test_rectangle_ordering_and_eigenvalues():
    basis = build_rectangle_basis((PI, PI), 4)
    np.testing.assert_allclose(basis.eigenvalues, [2.0, 5.0, 5.0, 8.0],
                               atol=1e-13)
    # the degenerate pair is broken lexicographically
    assert basis.mode_index == ((1, 1), (1, 2), (2, 1), (2, 2))


def test_rectangle_gram_identity():
    basis = build_rectangle_basis((PI, 2.0), 6)
    G = basis.gram_matrix()
    np.testing.assert_allclose(G, np.eye(6), atol=1e-11)


def test_rectangle_projection_roundtrip():
    basis = build_rectangle_basis((PI, PI), 5)
    coeffs = np.array([0.3, -1.0, 2.0, 0.0, 0.7])
    vals = basis.modes_at_nodes().T @ coeffs
    rec = basis.project(vals)
    np.testing.assert_allclose(rec, coeffs, atol=1e-11)


def test_rectangle_points_shape_enforced():
    basis = build_rectangle_basis((PI, PI), 2)
    with pytest.raises(ValueError):
        basis.eval_modes(np.array([0.5, 0.5, 0.5]))


# -- Sturm-Liouville ---------------------------------------------------------


def test_sturm_liouville_recovers_laplacian():
    basis = build_sturm_liouville_basis(1.0, 0.0, PI, 4, grid_n=4000)
    np.testing.assert_allclose(basis.eigenvalues, [1.0, 4.0, 9.0, 16.0],
                               rtol=2e-6)


def test_sturm_liouville_constant_shift():
    # adding c shifts the whole spectrum by c
    basis = build_sturm_liouville_basis(1.0, 3.0, PI, 3, grid_n=4000)
    np.testing.assert_allclose(basis.eigenvalues, [4.0, 7.0, 12.0], rtol=2e-6)


def test_sturm_liouville_orthonormal_modes():
    basis = build_sturm_liouville_basis("1 + x/4", "x", 2.0, 5, grid_n=3000)
    G = basis.gram_matrix()
    np.testing.assert_allclose(G, np.eye(5), atol=1e-6)
    assert np.all(np.diff(basis.eigenvalues) > 0)


def test_sturm_liouville_rejects_degenerate_coefficient():
    with pytest.raises(ValueError):
        build_sturm_liouville_basis("x - 1", 0.0, 2.0, 3)
    with pytest.raises(ValueError):
        build_sturm_liouville_basis(1.0, -5.0, 2.0, 3)


# -- fields ------------------------------------------------------------------


def test_field_requires_exactly_one_description(interval_basis):
    with pytest.raises(ValueError):
        SpatialField()
    with pytest.raises(ValueError):
        SpatialField(expr="sin(x)", coeffs=np.ones(3), basis=interval_basis)


def test_field_table_evaluation():
    pts = np.linspace(0, PI, 200)
    f = SpatialField(table=(pts, np.sin(pts)))
    q = np.linspace(0.3, 2.8, 50)
    np.testing.assert_allclose(f.evaluate(q), np.sin(q), atol=1e-8)


def test_field_expr_accepts_x_and_x1():
    f = SpatialField.from_expr("x*(3.14159 - x)")
    g = SpatialField.from_expr("x1*(3.14159 - x1)")
    pts = np.linspace(0, 3.0, 7)
    np.testing.assert_allclose(f.evaluate(pts), g.evaluate(pts), atol=1e-14)


def test_project_synthesize_inverse_on_span(interval_basis):
    coeffs = np.array([1.0, -0.5, 0.25, 0.0, 0.0, 0.1, 0.0, 2.0])
    pts = np.linspace(0.2, 3.0, 40)
    vals = synthesize(coeffs, interval_basis, pts)
    fld = SpatialField(coeffs=coeffs, basis=interval_basis)
    np.testing.assert_allclose(fld.evaluate(pts), vals, atol=1e-13)
    rec = project(fld, interval_basis)
    np.testing.assert_allclose(rec, coeffs, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(coeffs=hnp.arrays(np.float64, 8, elements=st.floats(-10, 10)))
def test_projection_identity_property(coeffs, interval_basis):
    rec = interval_basis.project(interval_basis.modes_at_nodes().T @ coeffs)
    np.testing.assert_allclose(rec, coeffs, atol=1e-10 * (1 + np.max(np.abs(coeffs))))


# -- boundary traces ---------------------------------------------------------


def test_boundary_traces_pass_for_eigen_sum(interval_basis):
    f = SpatialField.from_expr("sin(x) + 0.3*sin(3*x)")
    rep = check_boundary_traces(f, interval_basis, orders=2)
    assert rep.passed
    assert max(rep.sup_boundary) < 1e-8


def test_boundary_traces_flag_nonvanishing_operator_image(interval_basis):
    # x(pi-x) vanishes on the boundary but its second derivative does not
    f = SpatialField.from_expr("x*(pi - x)")
    rep0 = check_boundary_traces(f, interval_basis, orders=0)
    rep1 = check_boundary_traces(f, interval_basis, orders=1)
    assert rep0.passed
    assert not rep1.passed


def test_boundary_traces_coefficient_fields(interval_basis):
    fld = SpatialField(coeffs=np.ones(8), basis=interval_basis)
    rep = check_boundary_traces(fld, interval_basis, orders=3)
    assert rep.passed


def test_boundary_traces_table_limited_to_order_zero():
    pts = np.linspace(0, PI, 300)
    fld = SpatialField(table=(pts, np.sin(pts)))
    basis = build_dirichlet_interval_basis(PI, 2)
    rep = check_boundary_traces(fld, basis, orders=2)
    assert rep.orders == (0,)
    assert rep.note


# -- separable amplitudes ----------------------------------------------------


def test_amplitude_mode_traces_match_projection(interval_basis, grid3):
    amp = SeparableAmplitude.from_expr("exp(-t)*(sin(x) + 0.3*sin(3*x))")
    traces = amp.mode_traces(interval_basis, grid3)
    c = np.sqrt(PI / 2)
    np.testing.assert_allclose(traces[0].values, c * np.exp(-grid3), atol=1e-12)
    np.testing.assert_allclose(traces[2].values, 0.3 * c * np.exp(-grid3),
                               atol=1e-12)
    np.testing.assert_allclose(traces[1].values, 0.0, atol=1e-12)


def test_amplitude_at_point(grid3):
    amp = SeparableAmplitude.from_expr("exp(-t)*sin(x)")
    tr = amp.at_point(PI / 2, grid3)
    np.testing.assert_allclose(tr.values, np.exp(-grid3), atol=1e-13)


def test_amplitude_time_invariance_flag():
    assert SeparableAmplitude.from_expr("sin(x)").time_invariant
    assert not SeparableAmplitude.from_expr("t*sin(x)").time_invariant


def test_amplitude_evaluate_grid():
    amp = SeparableAmplitude.from_expr("(1 + t)*sin(x)")
    pts = np.array([0.5, 1.0])
    tg = np.array([0.0, 2.0])
    vals = amp.evaluate(pts, tg)
    expect = np.outer(1 + tg, np.sin(pts))
    np.testing.assert_allclose(vals, expect, atol=1e-14)


def test_amplitude_from_field_roundtrip(interval_basis):
    fld = SpatialField(coeffs=np.arange(1.0, 9.0), basis=interval_basis)
    amp = SeparableAmplitude.from_field(fld)
    assert amp.time_invariant
    c = amp.term_coefficients(interval_basis)
    np.testing.assert_allclose(c.sum(axis=0), np.arange(1.0, 9.0), atol=1e-12)

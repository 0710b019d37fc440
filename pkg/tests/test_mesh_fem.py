import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpkhom.errors import ConfigurationError
from fpkhom.fem import (SCALAR, VECTOR2, AnalyticField, FeFunction, build_space,
                        constant_field, error_norm, integrate, parse_norm)
from fpkhom.mesh import build_periodic_mesh
from fpkhom.quadrature import integration_groups, quadrature


@pytest.mark.parametrize("N", [2, 3, 8, 17])
def test_mesh_counts_and_areas(N):
    m = build_periodic_mesh(N)
    assert m.n_vertices == N * N
    assert m.n_triangles == 2 * N * N
    assert len(np.unique(m.triangles)) == N * N
    assert np.allclose(m.signed_areas, 1 / (2 * N * N), rtol=1e-13)
    assert np.all(m.signed_areas > 0)
    assert abs(m.areas.sum() - 1.0) <= 1e-14


def test_mesh_small_examples():
    assert build_periodic_mesh(2).n_triangles == 8
    m = build_periodic_mesh(8)
    assert (m.n_vertices, m.n_triangles) == (64, 128)
    assert np.allclose(m.areas, 1 / 128)
    with pytest.raises(ConfigurationError):
        build_periodic_mesh(1)


def test_line_alignment_depends_on_parity():
    odd = build_periodic_mesh(3)
    assert not np.any(np.isclose(odd.vertices[:, 0], 0.5))
    assert odd.cut_elements([0.5]).sum() == 2 * 3
    even = build_periodic_mesh(4)
    assert not even.cut_elements([0.5]).any()


def test_periodic_map_wraps():
    m = build_periodic_mesh(4)
    assert m.periodic_map(4, 0) == m.periodic_map(0, 0) == 0
    assert m.periodic_map(-1, 5) == 3 + 4 * 1


def test_space_dofs():
    m = build_periodic_mesh(8)
    assert build_space(m, SCALAR).dof_count == 64
    assert build_space(m, VECTOR2).dof_count == 128
    with pytest.raises(ConfigurationError):
        build_space(m, "tensor")


def test_constant_projects_to_zero():
    sp = build_space(build_periodic_mesh(8), SCALAR)
    one = sp.interpolate(lambda y: np.ones(len(y)))
    assert np.allclose(sp.project_mean_zero(one).coeffs, 0.0, atol=1e-15)


@given(seed=st.integers(0, 2 ** 31 - 1))
def test_mean_zero_projection_contract(seed):
    rng = np.random.default_rng(seed)
    sp = build_space(build_periodic_mesh(5), VECTOR2)
    f = sp.project_mean_zero(FeFunction(sp, rng.normal(size=sp.dof_count)))
    l2 = math.sqrt(integrate(AnalyticField(lambda y: (f.eval(y) ** 2).sum(-1)), f.mesh,
                             rule=quadrature(5, 2)))
    assert np.all(np.abs(f.mean()) <= 1e-12 * l2)


def test_partition_of_unity(rng):
    m = build_periodic_mesh(7)
    sp = build_space(m, SCALAR)
    pts = rng.random((100, 2))
    total = np.zeros(100)
    for k in range(sp.dof_count):
        e = np.zeros(sp.dof_count)
        e[k] = 1.0
        total += FeFunction(sp, e).eval(pts)
    assert np.max(np.abs(total - 1.0)) <= 1e-14


def test_hat_function_nodal_values():
    m = build_periodic_mesh(5)
    sp = build_space(m, SCALAR)
    e = np.zeros(sp.dof_count)
    e[7] = 1.0
    vals = FeFunction(sp, e).eval(m.vertices)
    assert vals[7] == 1.0
    assert np.all(np.delete(vals, 7) == 0.0)


def test_interpolant_gradient_of_linear_function():
    m = build_periodic_mesh(6)
    sp = build_space(m, SCALAR)
    f = sp.interpolate(lambda y: y[:, 0])
    interior = m.tri_coords[:, :, 0].max(axis=1) < 1.0
    assert np.allclose(f.element_gradients()[interior], [1.0, 0.0], atol=1e-13)
    t = np.flatnonzero(interior)[0]
    assert np.allclose(f.grad_on_element(t), [1.0, 0.0])


def test_interpolation_error_bound(rng):
    N = 64
    sp = build_space(build_periodic_mesh(N), SCALAR)
    f = sp.interpolate(lambda y: np.sin(2 * np.pi * y[:, 0]))
    pts = rng.random((2000, 2))
    err = np.abs(f.eval(pts) - np.sin(2 * np.pi * pts[:, 0])).max()
    assert err <= (2 * np.pi) ** 2 / N ** 2 / 8


@given(seed=st.integers(0, 2 ** 31 - 1), t=st.floats(0.0, 0.999))
def test_periodic_continuity(seed, t):
    rng = np.random.default_rng(seed)
    sp = build_space(build_periodic_mesh(6), VECTOR2)
    f = FeFunction(sp, rng.normal(size=sp.dof_count))
    a = f.eval(np.array([[0.0, t], [t, 0.0]]))
    b = f.eval(np.array([[1.0, t], [t, 1.0]]))
    assert np.allclose(a, b, atol=1e-13)


def test_vector_gradient_layout():
    sp = build_space(build_periodic_mesh(4), VECTOR2)
    f = sp.interpolate(lambda y: np.stack([0 * y[:, 0], np.ones(len(y))], axis=-1))
    assert np.allclose(f.nodal()[:, 1], 1.0)
    assert np.allclose(f.element_gradients(), 0.0)
    assert np.allclose(f.divergence(), 0.0)


@pytest.mark.parametrize("order", [2, 5])
def test_quadrature_weights_and_exactness(order):
    for s in (1, 2, 3):
        q = quadrature(order, s)
        assert q.weights.sum() == pytest.approx(0.5, abs=1e-15)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
                got = q.integrate_reference(lambda x, y: x ** a * y ** b)
                assert got == pytest.approx(exact, abs=1e-14)


def test_quadrature_examples():
    assert quadrature(2).integrate_reference(lambda x, y: x + y) == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(ConfigurationError):
        quadrature(3)
    with pytest.raises(ConfigurationError):
        quadrature(5, 0)


def test_composite_rule_on_cut_element():
    # lower triangle of cell (1, 0) on N = 3: 1/72 of its area lies left of y1 = 1/2
    m = build_periodic_mesh(3)
    elem = 2 * 1
    exact = 1 / 72 - 3 / 72
    errs = {}
    for s in (1, 2, 3, 4, 8):
        q = quadrature(5, s)
        pts = np.einsum("qa,ad->qd", q.barycentric, m.tri_coords[elem])
        val = 2 * m.areas[elem] * np.dot(q.weights, np.sign(np.sin(2 * np.pi * pts[:, 0])))
        errs[s] = abs(val - exact)
    C = errs[1]
    for s, e in errs.items():
        assert e <= C / s ** 2 + 1e-16
    assert errs[4] <= 1e-16


def test_integration_groups_cover_mesh():
    m = build_periodic_mesh(5)
    groups = integration_groups(m, [0.5])
    elems = np.concatenate([g.elements for g in groups])
    assert sorted(elems) == list(range(m.n_triangles))
    assert sum(g.weights.sum() for g in groups) == pytest.approx(1.0, abs=1e-14)


def test_error_norm_examples():
    m = build_periodic_mesh(8)
    sp = build_space(m, SCALAR)
    zero = sp.zero()
    assert error_norm(zero, constant_field(1.0), "L2") == pytest.approx(1.0, abs=1e-14)
    ref = AnalyticField(lambda y: np.sin(2 * np.pi * y[..., 0]),
                        lambda y: np.stack([2 * np.pi * np.cos(2 * np.pi * y[..., 0]),
                                            0 * y[..., 0]], axis=-1))
    f = sp.interpolate(lambda y: np.sin(2 * np.pi * y[:, 0]))
    assert error_norm(f, ref, "H1semi") >= 0
    assert error_norm(f, ref, "L2") <= (2 * np.pi) ** 2 / 64 / 8
    with pytest.raises(ConfigurationError):
        error_norm(f, ref, ("L", 0.5))


def test_parse_norm():
    assert parse_norm("L2") == ("L", 2.0)
    assert parse_norm("W13") == ("W1", 3.0)
    assert parse_norm("H1") == ("W1", 2.0)
    assert parse_norm("H1semi") == ("H1semi", 2.0)
    assert parse_norm(("L", 3)) == ("L", 3.0)
    with pytest.raises(ConfigurationError):
        parse_norm("Q7")

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from triplelink.errors import SingularityError
from triplelink.forms import (DiscreteForm, GreenFormKernel, TorusGrid, d, integrate_top,
                              omega_eval, sphere_total, wedge, zero_form)


def test_sphere_total_is_one():
    assert abs(sphere_total(128) - 1.0) < 1e-12


def test_sphere_total_rejects_tiny_rule():
    with pytest.raises(ValueError):
        sphere_total(3)


def test_omega_singular_point():
    with pytest.raises(SingularityError) as info:
        omega_eval(np.zeros((2, 3)), np.eye(3)[:2], np.eye(3)[1:])
    assert info.value.distance == 0.0


def test_omega_on_orthonormal_frame():
    x = np.array([0.0, 0.0, 2.0])
    assert omega_eval(x, [1, 0, 0], [0, 1, 0]) == pytest.approx(1 / (16 * np.pi))


def test_green_kernel_antisymmetric():
    rng = np.random.default_rng(0)
    x, X, Y = rng.normal(size=(3, 5, 9))
    assert np.allclose(GreenFormKernel(1, 2)(x, X, Y), -GreenFormKernel(2, 1)(x, X, Y))


def test_grid_rules():
    with pytest.raises(ValueError):
        TorusGrid(2, 7)
    with pytest.raises(ValueError):
        TorusGrid(3, 4)
    g = TorusGrid(3, (8, 10, 12))
    assert g.shape == (8, 10, 12)
    assert g.wavenumbers()[0][4] == 0


def _random_form(grid, degree, seed, kmax=3):
    rng = np.random.default_rng(seed)
    X = np.meshgrid(*grid.axes(), indexing="ij")
    from itertools import combinations
    comps = {}
    for key in combinations(range(grid.dim), degree):
        acc = np.zeros(grid.shape)
        for _ in range(4):
            k = rng.integers(-kmax, kmax + 1, grid.dim)
            acc += rng.normal() * np.cos(sum(ki * xi for ki, xi in zip(k, X)) + rng.uniform(0, 6))
        comps[key] = acc
    return DiscreteForm(grid, degree, comps)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0, 1]))
def test_dd_vanishes(seed, degree):
    g = TorusGrid(3, 16)
    f = _random_form(g, degree, seed)
    assert d(d(f)).max_abs() < 1e-10 * max(1.0, f.max_abs())


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_wedge_of_one_forms_anticommutes(seed):
    g = TorusGrid(3, 8)
    a, b = _random_form(g, 1, seed), _random_form(g, 1, seed + 1)
    assert (wedge(a, b) + wedge(b, a)).max_abs() < 1e-12


def test_integrate_top_constant():
    g = TorusGrid(2, 8)
    f = DiscreteForm(g, 2, {(0, 1): np.full(g.shape, 3.0)})
    assert integrate_top(f) == pytest.approx(3.0 * (2 * np.pi) ** 2)


def test_sign_handling_of_components():
    g = TorusGrid(2, 8)
    f = DiscreteForm(g, 2, {(0, 1): np.ones(g.shape)})
    assert np.all(f[(1, 0)] == -1.0)
    assert np.all(f[(0, 0)] == 0.0)


def test_d_of_function_is_gradient():
    g = TorusGrid(2, 16)
    X, Y = np.meshgrid(*g.axes(), indexing="ij")
    df = d(zero_form(g, np.sin(X) * np.cos(2 * Y)))
    assert np.allclose(df[(0,)], np.cos(X) * np.cos(2 * Y), atol=1e-12)
    assert np.allclose(df[(1,)], -2 * np.sin(X) * np.sin(2 * Y), atol=1e-12)


def test_json_roundtrip():
    g = TorusGrid(3, 8)
    f = _random_form(g, 2, 5)
    back = DiscreteForm.from_json(f.to_json())
    assert (back - f).max_abs() == 0.0

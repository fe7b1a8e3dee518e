import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from triplelink.errors import NonExactForm, NotClosed
from triplelink.forms import DiscreteForm, TorusGrid, d
from triplelink.hodge import closedness_residual, codifferential_max, periods, solve_potential
from triplelink.verify import random_band_limited_1form


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_round_trip(seed):
    g = TorusGrid(3, 32)
    beta = d(random_band_limited_1form(g, np.random.default_rng(seed)))
    eta = solve_potential(beta)
    assert (d(eta) - beta).max_abs() <= 1e-10
    assert codifferential_max(eta) < 1e-9


def test_constant_form_is_not_exact():
    g = TorusGrid(3, 8)
    beta = DiscreteForm(g, 2, {(0, 1): np.ones(g.shape)})
    with pytest.raises(NonExactForm) as info:
        solve_potential(beta)
    assert info.value.which_period == (0, 1)
    assert periods(beta)[0] == pytest.approx((2 * np.pi) ** 2)


def test_non_closed_form_detected():
    g = TorusGrid(3, 16)
    X, Y, Z = np.meshgrid(*g.axes(), indexing="ij")
    beta = DiscreteForm(g, 2, {(0, 1): np.sin(Z)})
    assert closedness_residual(beta) > 0.5
    with pytest.raises(NotClosed):
        solve_potential(beta)


def test_two_torus_potential():
    g = TorusGrid(2, 16)
    X, Y = np.meshgrid(*g.axes(), indexing="ij")
    beta = DiscreteForm(g, 2, {(0, 1): np.cos(X + 2 * Y)})
    eta = solve_potential(beta)
    assert (d(eta) - beta).max_abs() < 1e-12


def test_coulomb_potential_has_no_mean():
    g = TorusGrid(3, 16)
    beta = d(random_band_limited_1form(g, np.random.default_rng(1)))
    eta = solve_potential(beta)
    for comp in eta.components.values():
        assert abs(comp.mean()) < 1e-12

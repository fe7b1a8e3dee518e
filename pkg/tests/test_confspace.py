import numpy as np
import pytest

from triplelink import confspace as cs
from triplelink.forms import GreenFormKernel


def test_duality_is_identity():
    assert np.abs(cs.duality_matrix(64) - np.eye(3)).max() < 1e-12


def test_projection_degrees():
    P = np.array([[cs.proj_degree(k, cs.A(*t)) for t in cs.TAGS] for k in (1, 2, 3)])
    want = np.array([[0 if k in t else 1 for t in cs.TAGS] for k in (1, 2, 3)])
    assert np.abs(P - want).max() < 1e-12


def test_cycles_avoid_diagonal():
    for t in cs.TAGS:
        assert cs.A(*t).check_diagonal()


def test_unknown_cycle():
    with pytest.raises(ValueError):
        cs.A(1, 2)


def test_sphere_rule_validation():
    with pytest.raises(ValueError):
        cs.sphere_rule(5)
    _, _, _, w = cs.sphere_rule(16)
    assert w.sum() == pytest.approx(2 * np.pi ** 2, rel=1e-12)


def test_permutation_identities():
    t23 = cs.transposition(2, 3)
    assert cs.pairing(cs.permute(cs.A(3, 2), t23), GreenFormKernel(3, 2)) == pytest.approx(-1, abs=1e-12)
    assert cs.pairing(cs.permute(cs.A(3, 1), t23), GreenFormKernel(2, 1)) == pytest.approx(1, abs=1e-12)
    assert cs.pairing(cs.permute(cs.A(3, 2), t23), GreenFormKernel(2, 1)) == pytest.approx(0, abs=1e-12)


def test_relation_integrals_small_and_decreasing():
    r16 = max(map(abs, cs.relation_integrals(16)))
    r32 = max(map(abs, cs.relation_integrals(32)))
    assert r32 < 1e-12
    assert r32 < r16


def test_single_term_is_not_exact():
    assert cs.single_term_integral(16) == pytest.approx(1.0, abs=1e-6)


def test_whitehead_cyclic_values():
    a = cs.alpha
    for p, q in (((1, 2), (2, 3)), ((2, 3), (3, 1)), ((3, 1), (1, 2))):
        assert cs.whitehead_I(a(*p), a(*q)) == pytest.approx(1.0, abs=1e-12)
    for t in cs.TAGS:
        assert abs(cs.whitehead_I(a(*t), a(*t))) < 1e-12


def test_whitehead_relation_chain():
    a = cs.alpha
    v1 = cs.whitehead_I(a(3, 2), a(3, 1))
    v2 = cs.whitehead_I(a(3, 1), a(2, 1))
    v3 = cs.whitehead_I(a(3, 2), a(2, 1))
    assert v1 == pytest.approx(v2, abs=1e-12)
    assert v1 == pytest.approx(-v3, abs=1e-12)


def test_jacobi_type_relations_vanish():
    a = cs.alpha
    assert abs(cs.whitehead_I(a(2, 1), a(3, 1) + a(3, 2))) < 1e-12
    assert abs(cs.whitehead_I(a(3, 2), a(2, 1) + a(3, 1))) < 1e-12


def test_class_algebra():
    a = cs.alpha
    assert (a(1, 2) + a(2, 1)).coeffs == (0, 0, 0)
    assert (2 * a(3, 1) - a(3, 1)).coeffs == a(3, 1).coeffs

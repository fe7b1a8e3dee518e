import numpy as np
import pytest

from triplelink.curves import (Link3, curl_component, hopf_pair, mirror, perturbed_link,
                               split_pair, split_unlink3, torus_link_pair)
from triplelink.diagram import mu123_diagram
from triplelink.errors import NonBorromean, PhiInconsistent
from triplelink.invariants import (InvariantReport, UNCERTIFIED, certify_integer, mu12_crossings,
                                   mu12_gauss, mu123_hopf, mu123_keylemma)


@pytest.mark.parametrize("pair,expected", [
    (hopf_pair(), 1),
    (torus_link_pair(2), 2),
    (split_pair(), 0),
])
def test_gauss_matches_crossings(pair, expected):
    rep = mu12_gauss(*pair)
    assert rep.certified
    assert rep.integer == mu12_crossings(*pair)
    assert abs(rep.integer) == expected


def test_gauss_values_frozen():
    rep = mu12_gauss(*hopf_pair(), ns=(32, 64))
    assert rep.values[0][1] == pytest.approx(1.0000000009382009, abs=1e-12)


def test_certify_rejects_wandering_values():
    rep = InvariantReport("x", [(8, 0.3), (16, 0.7)])
    assert certify_integer(rep) is UNCERTIFIED
    assert not rep.certified


def test_certify_needs_two_levels():
    with pytest.raises(ValueError):
        certify_integer(InvariantReport("x", [(8, 1.0)]))


def test_borromean_triple_linking(borromean):
    rep = mu123_hopf(borromean, ns=(32, 64))
    assert rep.certified and rep.integer == -1
    # frozen reference values of the quadrature
    assert rep.values[0][1] == pytest.approx(-1.0000379746827026, abs=1e-9)
    assert rep.values[1][1] == pytest.approx(-1.0000000001791642, abs=1e-9)


def test_hopf_agrees_with_diagram_oracle(borromean):
    assert mu123_diagram(borromean) == mu123_hopf(borromean).integer


def test_relabel_and_reverse_signs(borromean):
    cyc = borromean.relabeled((1, 2, 0))
    swap = borromean.relabeled((1, 0, 2))
    rev = Link3([borromean[0].reversed(), borromean[1], borromean[2]])
    assert mu123_hopf(cyc).integer == -1
    assert mu123_hopf(swap).integer == 1
    assert mu123_hopf(rev).integer == 1
    assert mu123_diagram(swap) == 1


def test_mirror_of_borromean(borromean):
    # the Borromean rings are amphichiral
    assert mu123_hopf(mirror(borromean)).integer == mu123_diagram(mirror(borromean)) == -1


def test_split_unlink_is_zero():
    rep = mu123_hopf(split_unlink3(), ns=(32, 48))
    assert rep.certified and rep.integer == 0


def test_linked_pair_rejected():
    a, b = hopf_pair()
    far = split_unlink3()[2].transformed(offset=[10, 0, 0])
    with pytest.raises(NonBorromean) as info:
        mu123_hopf(Link3([a, b, far]), ns=(16, 32))
    assert info.value.pair == (1, 2)


def test_period_gate_without_crossings():
    a, b = hopf_pair()
    far = split_unlink3()[2].transformed(offset=[10, 0, 0])
    with pytest.raises(NonBorromean):
        mu123_hopf(Link3([a, b, far]), ns=(16, 32), gate=False)


@pytest.mark.parametrize("seed", [0, 1])
def test_perturbation_preserves_value(borromean, seed):
    rep = mu123_hopf(perturbed_link(borromean, amplitude=0.1, seed=seed), ns=(32, 64))
    assert rep.certified and rep.integer == -1


@pytest.mark.parametrize("crossing", [1.0, -1.0])
def test_self_crossing_change_preserves_value(borromean, crossing):
    link = borromean.with_component(0, curl_component(borromean[0], s0=np.pi / 4, crossing=crossing))
    assert mu123_hopf(link, ns=(48, 64)).integer == -1


def test_keylemma_rejects_inconsistent_phi(borromean):
    def zero_phi(x, U, V, W):
        return np.zeros(np.shape(x)[:-1])
    with pytest.raises(PhiInconsistent):
        mu123_keylemma(borromean, zero_phi, ns=(16, 32))


def test_report_json_shape(borromean):
    d = mu123_hopf(borromean, ns=(16, 32)).to_dict()
    assert set(d) >= {"method", "values", "integer", "certified", "residual"}

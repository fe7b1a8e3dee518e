import numpy as np
import pytest

from triplelink.curves import ParametricCurve, split_unlink3
from triplelink.errors import NonBorromean
from triplelink.helicity import (SHORT_PATHS, _short_path, estimate_H123, identity_map,
                                 integrate_orbit, radial_scaling, sample_flux_weighted,
                                 sample_rng, sample_values, sdiff_invariance_test, shear)
from triplelink.invariants import mu12_crossings
from triplelink.tubes import FluxTube, TubeField


@pytest.fixture(scope="module")
def ring():
    return FluxTube(ParametricCurve.ellipse([0, 0, 0], [1, 0, 0], [0, 1, 0]), 0.2)


def test_zero_time_gives_no_loop(ring):
    cl = integrate_orbit(TubeField(ring), np.array([1.05, 0, 0]), 0.0)
    assert cl.loop is None and cl.windings == 0


def test_core_orbit_is_isotopic_to_core(ring):
    f = TubeField(ring)
    x0 = ring.core.eval(0.3)
    cl = integrate_orbit(f, x0, f.transit_time(x0))
    probe = ParametricCurve.ellipse([1, 0, 0], [0.5, 0, 0], [0, 0, 0.5])
    assert mu12_crossings(cl.loop, probe) == mu12_crossings(ring.core, probe) != 0


@pytest.mark.slow
def test_orbit_contained_for_many_transits(ring):
    f = TubeField(ring)
    x0 = np.reshape(ring.point(0.0, 0.17, 1.0), 3)
    cl = integrate_orbit(f, x0, 100 * f.transit_time(x0), rtol=1e-8)
    assert cl.windings == pytest.approx(100)
    assert np.all(ring.project(cl.orbit)[2] < ring.radius)


@pytest.mark.parametrize("system", SHORT_PATHS)
def test_short_paths_stay_in_tube(btubes, system):
    rng = np.random.default_rng(0)
    tube = btubes[0]
    for _ in range(5):
        a = sample_flux_weighted(tube, rng)
        b = sample_flux_weighted(tube, rng)
        path = _short_path(tube, a, b, system)
        assert np.all(tube.project(path)[2] < tube.radius)
        length = np.sum(np.linalg.norm(np.diff(path, axis=0), axis=-1))
        assert length <= 2 * tube.radius + tube.core.length()


def test_flux_weighted_sample_values(btubes):
    vals = sample_values(btubes, 0, 7, (1, 2))
    assert vals == [(-1.0, True), (-1.0, True)]


def test_identity_map_changes_nothing(btubes):
    before, after, diff, _ = sdiff_invariance_test(btubes, identity_map(), T=1, samples=2)
    assert diff == 0.0
    assert before.estimate == after.estimate


def test_volume_distorting_map_rejected():
    with pytest.raises(ValueError):
        radial_scaling(1.1)


def test_shear_is_volume_preserving():
    g = shear(0.3)
    x = np.random.default_rng(0).normal(size=(5, 3))
    assert np.allclose(np.linalg.det(g.jacobian(x)), 1.0)
    assert np.allclose(g.inverse(g(x)), x)
    h = g.compose(shear(0.2, source=0, target=1))
    assert np.allclose(h.inverse(h(x)), x)


def test_deterministic_series(btubes):
    a = estimate_H123(btubes, T_list=(1,), samples=2, seed=11)
    b = estimate_H123(btubes, T_list=(1,), samples=2, seed=11)
    assert a.to_dict() == b.to_dict()


def test_split_tubes_give_zero():
    tubes = [FluxTube(c, 0.2) for c in split_unlink3()]
    s = estimate_H123(tubes, T_list=(1,), samples=2)
    assert s.estimate == [0.0]


def test_linked_cores_rejected():
    a = ParametricCurve.ellipse([0, 0, 0], [1, 0, 0], [0, 1, 0])
    b = ParametricCurve.ellipse([1, 0, 0], [1, 0, 0], [0, 0, 1])
    c = ParametricCurve.ellipse([10, 0, 0], [1, 0, 0], [0, 1, 0])
    with pytest.raises(NonBorromean):
        estimate_H123([FluxTube(x, 0.1) for x in (a, b, c)], T_list=(1,), samples=1)


def test_counter_based_rng_is_indexed():
    a = sample_rng(7, 3).uniform(size=4)
    b = sample_rng(7, 3).uniform(size=4)
    c = sample_rng(7, 4).uniform(size=4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)

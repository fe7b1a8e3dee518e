import numpy as np
import pytest

from triplelink.curves import ParametricCurve
from triplelink.errors import TubeError
from triplelink.tubes import (FluxTube, StraightCore, TubeField, check_disjoint, dump_tubes,
                              load_tubes, make_tube_field)


def interior_points(tube, n, seed, frac=0.95):
    rng = np.random.default_rng(seed)
    return np.array([np.reshape(tube.point(rng.uniform(0, 6.28), frac * tube.radius * rng.uniform(),
                                           rng.uniform(0, 6.28)), 3) for _ in range(n)])


def test_section_flux(btubes):
    rng = np.random.default_rng(0)
    for tube in btubes:
        f = TubeField(tube)
        for th in rng.uniform(0, 2 * np.pi, 10):
            assert abs(f.section_flux(th) - tube.flux) < 1e-4


def test_divergence_free(btubes):
    f = TubeField(btubes[0])
    assert np.abs(f.divergence(interior_points(btubes[0], 12, 1))).max() <= 1e-6


def test_straight_core_divergence():
    tube = FluxTube(StraightCore(2 * np.pi), 0.5)
    f = make_tube_field(tube)
    x = np.array([[0.1, 0.2, 0.3], [-0.3, 0.1, 2.0]])
    assert np.abs(f.divergence(x)).max() <= 1e-10


def test_tangent_to_boundary(btubes):
    tube = btubes[1]
    f = TubeField(tube)
    pts = interior_points(tube, 8, 2, frac=1.0)
    th, rv, rho = tube.project(pts)
    out = rv / rho[:, None]
    edge = tube.core.eval(th) + 0.999 * tube.radius * out
    assert np.abs(np.sum(f(edge) * out, -1)).max() <= 1e-8


def test_radius_beyond_reach(btubes):
    with pytest.raises(TubeError):
        FluxTube(btubes[0].core, 0.6)


def test_overlapping_tubes():
    c = ParametricCurve.ellipse([0, 0, 0], [1, 0, 0], [0, 1, 0])
    d = ParametricCurve.ellipse([0, 0, 0.3], [1, 0, 0], [0, 1, 0])
    with pytest.raises(TubeError):
        check_disjoint([FluxTube(c, 0.2), FluxTube(d, 0.2)])


def test_margin(btubes):
    assert check_disjoint(btubes) == pytest.approx(0.4082482904638630 - 0.3, abs=1e-6)


def test_transit_returns_to_start(btubes):
    f = TubeField(btubes[2])
    x0 = interior_points(btubes[2], 1, 3)[0]
    t, end = f.transit(x0)
    assert t > 0
    assert np.linalg.norm(end - x0) < 1e-7


def test_scalar_and_array_field_agree(btubes):
    f = TubeField(btubes[0])
    for x in interior_points(btubes[0], 5, 4):
        f._hint = None
        f.at_point(x)
        assert np.allclose(f.at_point(x), f(x[None])[0], atol=1e-12)


def test_scaling_keeps_flux(btubes):
    t2 = btubes[0].scaled(2.0)
    assert t2.radius == pytest.approx(0.3)
    assert TubeField(t2).section_flux(0.4) == pytest.approx(1.0, abs=1e-10)


def test_json_roundtrip(tmp_path, btubes):
    p = tmp_path / "t.json"
    dump_tubes(btubes, p)
    back = load_tubes(p)
    assert [t.radius for t in back] == [t.radius for t in btubes]

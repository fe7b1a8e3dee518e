import numpy as np
import pytest

from triplelink.curves import ParametricCurve
from triplelink.energy import (BoundReport, assemble_bound, energy_L2, energy_closed_form,
                               green_l2_norms, kernel_sup, lambda1_neumann_proxy,
                               neumann_eigenvalue, r_T, sup_kernel_law, tube_energy)
from triplelink.tubes import FluxTube, StraightCore, TubeField


def test_straight_cylinder_energy():
    tube = FluxTube(StraightCore(3.0), 0.4, 2.0)
    assert tube_energy(TubeField(tube)) == pytest.approx(energy_closed_form(tube), rel=1e-6)


def test_curved_tube_energy(btubes):
    E = energy_L2([TubeField(t) for t in btubes])
    assert E == pytest.approx(sum(energy_closed_form(t) for t in btubes), rel=1e-9)


def test_energy_is_quadratic_in_flux(btubes):
    f1 = TubeField(btubes[0])
    f2 = TubeField(btubes[0].with_flux(2.0))
    assert tube_energy(f2) == pytest.approx(4 * tube_energy(f1), rel=1e-12)
    assert tube_energy(TubeField(btubes[0].with_flux(0.0))) == 0.0


def test_kernel_sup_values():
    assert kernel_sup(1.0) == pytest.approx(1 / (4 * np.pi), rel=1e-12)
    assert kernel_sup(2.0) == pytest.approx(1 / (16 * np.pi), rel=1e-12)
    slope, _ = sup_kernel_law((0.5, 1.0, 2.0, 4.0))
    assert slope == pytest.approx(-2.0, abs=0.01)


def test_cube_neumann_eigenvalue():
    n = 20
    lam = neumann_eigenvalue(np.ones((n, n, n), bool), 1.0 / n)
    exact_discrete = (2 * n * np.sin(np.pi / (2 * n))) ** 2
    assert lam == pytest.approx(exact_discrete, rel=1e-8)
    assert lam == pytest.approx(np.pi ** 2, rel=0.05)


def test_coarse_voxels_rejected(btubes):
    with pytest.raises(ValueError):
        lambda1_neumann_proxy(btubes[0], voxel_h=0.1)


def test_eigenvalue_dilation():
    tube = FluxTube(ParametricCurve.ellipse([0, 0, 0], [1, 0, 0], [0, 0.8, 0]), 0.12)
    l1 = lambda1_neumann_proxy(tube, 0.03)
    l2 = lambda1_neumann_proxy(tube.scaled(2.0), 0.06)
    assert l2 == pytest.approx(l1 / 4, rel=0.05)


def _two_far_tubes(dist):
    c = ParametricCurve.ellipse([0, 0, 0], [0.3, 0, 0], [0, 0.3, 0])
    return [FluxTube(c, 0.1), FluxTube(c.transformed(offset=[dist, 0, 0]), 0.1),
            FluxTube(c.transformed(offset=[0, dist, 0]), 0.1)]


def test_far_tubes_constant_kernel_oracle():
    d = 20.0
    tubes = _two_far_tubes(d)
    norms, errs = green_l2_norms(tubes, samples=20000, wedge_samples=2000, seed=1)
    v = tubes[0].volume()
    assert norms["w12"] == pytest.approx(v / (4 * np.pi * d ** 2), rel=0.2)
    assert errs["w12"] < 0.01 * norms["w12"]


def test_norms_decrease_with_separation():
    n1, _ = green_l2_norms(_two_far_tubes(3.0), samples=5000, wedge_samples=500)
    n2, _ = green_l2_norms(_two_far_tubes(6.0), samples=5000, wedge_samples=500)
    assert all(n2[k] < n1[k] for k in n1)


def test_coincident_tubes_rejected(btubes):
    with pytest.raises(ValueError):
        green_l2_norms([btubes[0], btubes[0], btubes[1]], samples=10, wedge_samples=10)


def test_bound_assembly():
    norms = {"a": 1.0, "b": 1.0}
    assert assemble_bound(-2.0, 0.5, 4.0, norms) == pytest.approx((2 * 0.25 * 2 / 2) ** 1.5)


def test_r_T_scales_linearly(btubes):
    assert r_T([t.scaled(2.0) for t in btubes]) == pytest.approx(2 * r_T(btubes), rel=1e-9)


def test_report_is_frozen():
    rep = BoundReport(1.0, 1.0, {}, {}, 1.0, 1.0, 1.0)
    with pytest.raises(Exception):
        rep.E2 = 2.0

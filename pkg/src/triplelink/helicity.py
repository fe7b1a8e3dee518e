"""Third-order helicity of flux-tube fields by orbit averaging.

Orbits of each tube field are integrated, closed by a short path inside the
tube and refit as Fourier loops; the triple linking number of the loop triple
is computed with :func:`mu123_hopf` and averaged over random starting points.

Normalization
-------------
With ``mode="flux"`` (default) starting points are drawn with the flux
density on a random normal disc, every orbit runs for ``W`` of its own core
transits, and a sample contributes ``mu123(loops) / (W1 W2 W3) * Phi1 Phi2 Phi3``.
This is the time average of the definition with the transit time as the
clock, so the flux-weighted measure ``dV / tau(x)`` (total mass ``Phi``)
replaces the volume measure. ``mode="volume"`` keeps uniform volume sampling
and a common flow time ``T = W * tau_ref`` with ``tau_ref`` the mean transit
time ``vol / Phi`` of each tube; it converges more slowly.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .curves import Link3, ParametricCurve
from .errors import NonBorromean, TubeError
from .invariants import mu123_hopf
from .tubes import TWO_PI, TubeField, _orthonormal_normals, _unit_tangent

SHORT_PATHS = ("radial", "tube-linear")


# --- volume-preserving maps --------------------------------------------------

class VolumePreservingMap:
    """Explicit diffeomorphism of R^3 with unit Jacobian determinant.

    The determinant and the inverse are checked at random points when the map
    is built; a map failing either check is rejected with ``ValueError``.
    """

    def __init__(self, forward, inverse, jacobian, name="map", check_points=64, seed=0):
        self.forward = forward
        self.inverse = inverse
        self.jacobian = jacobian
        self.name = name
        rng = np.random.default_rng(seed)
        x = rng.uniform(-3, 3, (check_points, 3))
        det = np.linalg.det(jacobian(x))
        if np.max(np.abs(det - 1.0)) > 1e-10:
            raise ValueError(f"{name} is not volume preserving (det J up to {det.max():.6f})")
        if np.max(np.abs(inverse(forward(x)) - x)) > 1e-9:
            raise ValueError(f"{name}: inverse does not undo forward")

    def __call__(self, x):
        return self.forward(np.asarray(x, dtype=float))

    def push_field(self, B):
        """``(g_* B)(y) = Dg(g^-1 y) B(g^-1 y)``."""
        def Bt(y):
            x = self.inverse(np.asarray(y, dtype=float))
            return np.einsum("...ij,...j->...i", self.jacobian(x), B(x))
        return Bt

    def compose(self, other):
        """``self o other``."""
        return VolumePreservingMap(
            lambda x: self.forward(other.forward(x)),
            lambda y: other.inverse(self.inverse(y)),
            lambda x: np.einsum("...ij,...jk->...ik", self.jacobian(other.forward(x)),
                                other.jacobian(x)),
            f"{self.name}*{other.name}")


def identity_map():
    def jac(x):
        return np.broadcast_to(np.eye(3), np.shape(x)[:-1] + (3, 3)).copy()
    return VolumePreservingMap(lambda x: np.array(x, dtype=float),
                               lambda y: np.array(y, dtype=float), jac, "identity")


def shear(amplitude=0.3, source=2, target=0, freq=1.0):
    """``x_target += amplitude * sin(freq * x_source)``; volume preserving."""
    if source == target:
        raise ValueError("shear needs distinct source and target axes")

    def fwd(x):
        y = np.array(x, dtype=float)
        y[..., target] += amplitude * np.sin(freq * x[..., source])
        return y

    def inv(y):
        x = np.array(y, dtype=float)
        x[..., target] -= amplitude * np.sin(freq * y[..., source])
        return x

    def jac(x):
        J = np.broadcast_to(np.eye(3), np.shape(x)[:-1] + (3, 3)).copy()
        J[..., target, source] = amplitude * freq * np.cos(freq * x[..., source])
        return J

    return VolumePreservingMap(fwd, inv, jac, f"shear({amplitude},{source}->{target})")


def radial_scaling(factor):
    """Isotropic dilation; only volume preserving for ``factor = 1`` (rejected otherwise)."""
    return VolumePreservingMap(lambda x: factor * np.asarray(x), lambda y: np.asarray(y) / factor,
                               lambda x: factor * np.broadcast_to(np.eye(3), np.shape(x)[:-1] + (3, 3)),
                               f"scale({factor})")


# --- orbits and their closure ------------------------------------------------

@dataclass
class OrbitClosure:
    """An orbit segment, its closing short path and the refit loop."""
    start: np.ndarray
    time: float
    orbit: np.ndarray
    short_path: np.ndarray
    loop: object = None
    windings: float = 0.0


def _short_path(tube, x_end, x_start, system, n=24):
    """In-tube path from ``x_end`` back to ``x_start`` (original coordinates)."""
    th1, rv1, r1 = tube.project(x_end)
    th0, rv0, r0 = tube.project(x_start)
    dth = np.angle(np.exp(1j * (th0 - th1)))
    core = tube.core
    if system == "radial":
        u = np.linspace(0, 1, n)[:, None]
        inward = x_end + u * (core.eval(th1) - x_end)
        m = max(2, int(np.ceil(abs(dth) / TWO_PI * 256)))
        along = core.eval(th1 + np.linspace(0, 1, m) * dth)
        outward = core.eval(th0) + u * (x_start - core.eval(th0))
        return np.vstack([inward[1:], along[1:], outward[1:-1]])
    if system == "tube-linear":
        u = np.linspace(0, 1, n + 1)[1:-1]
        th = th1 + u * dth
        T, _ = _unit_tangent(core, th)
        e1 = rv1 / max(r1, 1e-300)
        e0 = rv0 / max(r0, 1e-300)
        v = (1 - u)[:, None] * e1 + u[:, None] * e0
        v -= np.sum(v * T, -1, keepdims=True) * T
        nv = np.linalg.norm(v, axis=-1, keepdims=True)
        bad = nv[:, 0] < 1e-8
        if np.any(bad):
            v[bad] = _orthonormal_normals(T[bad])[0]
            nv[bad] = 1.0
        rho = (1 - u) * r1 + u * r0
        return core.eval(th) + rho[:, None] * v / nv
    raise ValueError(f"unknown short-path system {system!r}")


def _arclength_resample(points, n):
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=-1)
    keep = np.concatenate([[True], seg[:-1] > 1e-14])
    closed = np.vstack([points[keep], points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=-1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.linspace(0, s[-1], n, endpoint=False)
    return np.stack([np.interp(t, s, closed[:, k]) for k in range(3)], -1)


def refit_loop(points, M, smooth=0.0):
    """Fourier loop through a closed polyline, arclength-parametrized.

    ``smooth`` applies ``exp(-(smooth m / M)^2)`` to mode ``m``.
    """
    pts = _arclength_resample(points, 8 * M + 8)
    curve = ParametricCurve.from_points(pts, M=M, check_regular=False)
    if smooth > 0:
        damp = np.exp(-(smooth * curve.modes / M) ** 2)
        curve = ParametricCurve(curve.coeffs * damp, check_regular=False)
    return curve


class OrbitIntegrator:
    """Integrates one tube field (optionally pushed forward by a map).

    The solution is kept as a dense output so prefixes of a long orbit are
    available without re-integration.
    """

    def __init__(self, field, vp_map=None, rtol=1e-9, atol=1e-12, method="RK45", h=None):
        self.method = method
        self.max_step = np.inf if h is None else float(h)
        self.field = field
        self.tube = field.tube
        self.vp_map = vp_map
        self.rtol = rtol
        self.atol = atol
        if vp_map is None:
            self.rhs = lambda t, y: field.at_point(y)
        else:
            def rhs(t, y):
                x = vp_map.inverse(y[None])
                return vp_map.jacobian(x)[0] @ field.at_point(x[0])
            self.rhs = rhs

    def run(self, x0, T):
        y0 = np.asarray(x0, dtype=float) if self.vp_map is None else self.vp_map(x0)
        if T <= 0:
            return None
        self.field._hint = None
        sol = solve_ivp(self.rhs, (0.0, T), y0,
                        method=self.method, rtol=self.rtol, atol=self.atol,
                        max_step=self.max_step, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"orbit integration failed: {sol.message}")
        return sol

    def to_original(self, y):
        return y if self.vp_map is None else self.vp_map.inverse(y)

    def to_image(self, x):
        return x if self.vp_map is None else self.vp_map(x)


def close_orbit(integ, sol, x0, T, windings, short_paths="radial", modes_per_transit=16,
                samples_per_transit=128, smooth=0.0):
    """Cut the orbit at time ``T``, close it and refit it as a loop."""
    x0 = np.asarray(x0, dtype=float)
    if T <= 0 or sol is None:
        return OrbitClosure(x0, 0.0, x0[None], np.zeros((0, 3)), None, 0.0)
    n = max(64, int(np.ceil(samples_per_transit * max(windings, 1.0))))
    ts = np.linspace(0.0, T, n + 1)
    orbit = sol.sol(ts).T
    orig = integ.to_original(orbit)
    rho = integ.tube.project(orig)[2]
    if np.any(rho >= integ.tube.radius):
        raise TubeError("orbit left its tube")
    path = _short_path(integ.tube, orig[-1], orig[0], short_paths)
    path_img = integ.to_image(path) if len(path) else path
    poly = np.vstack([orbit[:-1], orbit[-1:], path_img])
    M0 = int(modes_per_transit * max(1, int(np.ceil(windings - 1e-6)))) + 8
    # orbits hugging the wall can overshoot it after the refit; add modes
    for M in (M0, 2 * M0, 4 * M0):
        loop = refit_loop(poly, M, smooth)
        check = integ.to_original(loop.sample(4 * M))
        if np.all(integ.tube.project(check)[2] < integ.tube.radius):
            return OrbitClosure(x0, float(T), orbit, path_img, loop, float(windings))
    raise TubeError("refit loop leaves its tube")


def integrate_orbit(field, x0, T, h=None, short_paths="radial", vp_map=None, rtol=1e-9, **kw):
    """Orbit of ``field`` from ``x0`` for time ``T``, closed inside its tube.

    Integration is adaptive RK45; ``h`` caps the step size. ``x0`` is given
    in original coordinates; with ``vp_map`` the pushed forward field is
    integrated from ``vp_map(x0)``.
    """
    integ = OrbitIntegrator(field, vp_map, rtol, h=h)
    if T <= 0:
        return close_orbit(integ, None, x0, 0.0, 0.0)
    th, _, rho = field.tube.project(np.asarray(x0, dtype=float))
    if rho >= field.tube.radius:
        raise TubeError("starting point is not inside the tube")
    tau = field.transit_time(x0)
    sol = integ.run(x0, T)
    return close_orbit(integ, sol, x0, T, T / tau, short_paths, **kw)


# --- sampling ---------------------------------------------------------------

def sample_rng(seed, index):
    """Counter-based generator keyed by ``(seed, index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def sample_flux_weighted(tube, rng):
    """Point on a random normal disc with density proportional to the flux density."""
    field = TubeField(tube)
    a = tube.radius
    while True:
        rho = a * np.sqrt(rng.uniform())
        if rng.uniform() < field.profile(rho):
            break
    return np.reshape(tube.point(rng.uniform(0, TWO_PI), rho, rng.uniform(0, TWO_PI)), 3)


def sample_volume(tube, rng):
    """Uniform point in the tube by rejection on the tube-coordinate Jacobian."""
    a = tube.radius
    core = tube.core
    kmax = float(np.max(core.curvature(TWO_PI * np.arange(512) / 512)))
    while True:
        th = rng.uniform(0, TWO_PI)
        rho = a * np.sqrt(rng.uniform())
        psi = rng.uniform(0, TWO_PI)
        x = np.reshape(tube.point(th, rho, psi), 3)
        sp = np.linalg.norm(core.eval(th, 1))
        Tt = core.eval(th, 2) / sp ** 2  # only its normal part matters below
        e = (x - core.eval(th)) / rho if rho > 0 else np.zeros(3)
        jac = sp - rho * (e @ (Tt * sp))
        if rng.uniform() * sp * (1 + a * kmax) < jac:
            return x


# --- the estimator -------------------------------------------------------------

@dataclass
class HelicitySeries:
    T: list
    estimate: list
    stderr: list
    aborted_samples: list
    uncertified: list
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"series": [{"T": t, "estimate": e, "stderr": s, "aborted_samples": a,
                            "uncertified": u}
                           for t, e, s, a, u in zip(self.T, self.estimate, self.stderr,
                                                    self.aborted_samples, self.uncertified)],
                "meta": self.meta}


def _grid_for(windings, base):
    return tuple(int(2 * np.ceil(base * max(1.0, w) / 2)) for w in windings)


def sample_values(tubes, k, seed, T_list, mode="flux", short_paths="radial", vp_map=None,
                  bases=(24, 32), modes_per_transit=16, smooth=0.0):
    """Per-sample contributions for every ``T``; ``None`` marks an aborted sample."""
    rng = sample_rng(seed, k)
    fields = [TubeField(t) for t in tubes]
    integs = [OrbitIntegrator(f, vp_map) for f in fields]
    fluxes = [t.flux for t in tubes]
    vols = [t.volume() for t in tubes]
    starts = [sample_flux_weighted(t, rng) if mode == "flux" else sample_volume(t, rng)
              for t in tubes]
    taus = [f.transit_time(x) for f, x in zip(fields, starts)]
    if mode == "flux":
        times = [[W * tau for W in T_list] for tau in taus]
    elif mode == "volume":
        tref = [v / abs(f) if f else np.inf for v, f in zip(vols, fluxes)]
        times = [[W * tr for W in T_list] for tr in tref]
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    sols = [integ.run(x, max(ts)) for integ, x, ts in zip(integs, starts, times)]
    out = []
    for j, W in enumerate(T_list):
        if W == 0:
            out.append((0.0, True))
            continue
        loops, winds = [], []
        try:
            for integ, sol, x, ts, tau in zip(integs, sols, starts, times, taus):
                wind = ts[j] / tau
                cl = close_orbit(integ, sol, x, ts[j], wind, short_paths, modes_per_transit,
                                 smooth=smooth)
                loops.append(cl.loop)
                winds.append(wind)
        except TubeError:
            out.append(None)
            continue
        # pairwise linking is ruled out by tube disjointness, so the period
        # gate only fires on under-resolved grids: retry once on finer ones
        rep = None
        for bs in (bases, (bases[-1], 2 * bases[-1])):
            try:
                rep = mu123_hopf(Link3(loops), ns=[_grid_for(winds, b) for b in bs], gate=False)
                break
            except NonBorromean:
                continue
        if rep is None:
            out.append(None)
            continue
        mu = rep.integer if rep.certified else rep.extrapolated
        if mode == "flux":
            val = mu / W ** 3 * np.prod(fluxes)
        else:
            val = mu * np.prod(vols) / np.prod([ts[j] for ts in times])
        out.append((float(val), rep.certified))
    return out


def estimate_H123(tubes, T_list=(1, 2, 3), samples=64, seed=7, mode="flux",
                  short_paths="radial", vp_map=None, bases=(24, 32), modes_per_transit=16,
                  smooth=0.0):
    """Monte-Carlo estimate of the third-order helicity for each ``T``.

    ``T`` counts core transits (see the module notes). Samples are processed
    in index order and each uses its own counter-based generator, so the
    series is reproducible for a fixed seed.
    """
    if len(tubes) != 3:
        raise ValueError("need three tubes")
    from .tubes import check_disjoint
    from .invariants import mu12_crossings
    check_disjoint(tubes)
    for i, j in ((0, 1), (1, 2), (0, 2)):
        lk = mu12_crossings(tubes[i].core, tubes[j].core)
        if lk:
            raise NonBorromean((i + 1, j + 1), float(lk))
    per_T = [[] for _ in T_list]
    aborted = [0] * len(T_list)
    uncert = [0] * len(T_list)
    for k in range(samples):
        vals = sample_values(tubes, k, seed, T_list, mode, short_paths, vp_map, bases,
                             modes_per_transit, smooth)
        for j, v in enumerate(vals):
            if v is None:
                aborted[j] += 1
            else:
                per_T[j].append(v[0])
                uncert[j] += 0 if v[1] else 1
    est, err = [], []
    for vals in per_T:
        arr = np.array(vals, dtype=float)
        est.append(float(np.mean(arr)) if len(arr) else float("nan"))
        err.append(float(np.std(arr, ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0)
    meta = {"mode": mode, "samples": samples, "seed": seed, "short_paths": short_paths,
            "fluxes": [t.flux for t in tubes], "map": vp_map.name if vp_map else None,
            "T_unit": "core transits"}
    return HelicitySeries(list(T_list), est, err, aborted, uncert, meta)


def sdiff_invariance_test(tubes, vp_map, T=3, samples=64, seed=7, **kw):
    """Estimates before and after a volume-preserving deformation.

    Returns ``(before, after, difference, combined_stderr)`` at the single
    transit count ``T``.
    """
    before = estimate_H123(tubes, (T,), samples, seed, **kw)
    after = estimate_H123(tubes, (T,), samples, seed, vp_map=vp_map, **kw)
    diff = after.estimate[0] - before.estimate[0]
    comb = float(np.hypot(before.stderr[0], after.stderr[0]))
    return before, after, diff, comb

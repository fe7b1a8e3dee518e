"""Flux tubes around closed cores and the divergence-free fields they carry.

Tube coordinates are ``x = gamma(theta) + rho (cos psi N1 + sin psi N2)`` with
a rotation-minimizing frame ``(T, N1, N2)``. Their volume element is
``J = rho (|gamma'| - rho <e_rho, T_theta>)``, and the field

    B = (h(rho) / J) dx/dtheta = (h(rho) / rho) T,   h = C rho f(rho)

is divergence-free because ``J B^theta = h`` does not depend on ``theta``. It is
tangent to every coaxial torus and carries flux ``2 pi int h drho = Phi``
through each normal disc. The profile is ``f = (1 - (rho/a)^2)^2`` with
``C = 3 Phi / (pi a^2)``.
"""

import json
import math

import numpy as np
from scipy.integrate import solve_ivp

from .curves import ParametricCurve
from .errors import TubeError

TWO_PI = 2.0 * np.pi


class StraightCore:
    """Straight core along the z-axis, periodic with the given period (test model)."""

    M = 1
    orientation = 1
    periodic = True

    def __init__(self, period=TWO_PI):
        self.period = float(period)

    def eval(self, s, deriv=0):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (3,))
        if deriv == 0:
            out[..., 2] = self.period * s / TWO_PI
        elif deriv == 1:
            out[..., 2] = self.period / TWO_PI
        return out

    def sample(self, n, deriv=0):
        return self.eval(TWO_PI * np.arange(n) / n, deriv)

    def length(self, n=None):
        return self.period

    def curvature(self, s):
        return np.zeros(np.shape(s))

    def transformed(self, matrix=None, offset=None):
        raise TubeError("straight cores are not transformed")


def _unit_tangent(core, s):
    d1 = core.eval(s, 1)
    sp = np.linalg.norm(d1, axis=-1, keepdims=True)
    return d1 / sp, sp[..., 0]


def tangent_derivative(core, s):
    """``dT/dtheta`` for the unit tangent ``T``."""
    d1, d2 = core.eval(s, 1), core.eval(s, 2)
    sp = np.linalg.norm(d1, axis=-1, keepdims=True)
    return d2 / sp - d1 * np.sum(d1 * d2, -1, keepdims=True) / sp ** 3


def rmf_frames(core, n):
    """Rotation-minimizing frames by the double reflection method.

    Returns ``(T, N1, N2)`` arrays of shape ``(n, 3)`` at ``theta_k = 2 pi k / n``.
    The frame is not closed up: after one transit it differs by the holonomy.
    """
    x = core.sample(n)
    T, _ = _unit_tangent(core, TWO_PI * np.arange(n + 1) / n)
    x = np.vstack([x, core.eval(TWO_PI)[None]])
    helper = np.array([0.0, 0.0, 1.0]) if abs(T[0, 2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    r = np.cross(T[0], helper)
    r /= np.linalg.norm(r)
    N1 = [r]
    for k in range(n - 1):
        v1 = x[k + 1] - x[k]
        c1 = v1 @ v1
        rL = r - (2 / c1) * (v1 @ r) * v1
        tL = T[k] - (2 / c1) * (v1 @ T[k]) * v1
        v2 = T[k + 1] - tL
        c2 = v2 @ v2
        r = rL - (2 / c2) * (v2 @ rL) * v2 if c2 > 0 else rL
        r = r - (r @ T[k + 1]) * T[k + 1]
        r /= np.linalg.norm(r)
        N1.append(r)
    N1 = np.array(N1)
    T = T[:n]
    return T, N1, np.cross(T, N1)


def _orthonormal_normals(T):
    helper = np.where(np.abs(T[..., 2:3]) < 0.9, [[0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0]])
    N1 = np.cross(T, helper)
    N1 /= np.linalg.norm(N1, axis=-1, keepdims=True)
    return N1, np.cross(T, N1)


class FluxTube:
    """Solid tube of radius ``a`` around ``core`` carrying flux ``Phi``."""

    def __init__(self, core, radius, flux=1.0, check=True, frame_samples=None):
        self.core = core
        self.radius = float(radius)
        self.flux = float(flux)
        if self.radius <= 0:
            raise TubeError("tube radius must be positive")
        self.periodic = getattr(core, "periodic", False)
        nf = frame_samples or max(256, 16 * core.M)
        self.frames = rmf_frames(core, nf)
        self._dense_n = max(512, 16 * core.M)
        self._dense = core.sample(self._dense_n)
        if check and not self.periodic:
            r = self.reach()
            if self.radius >= r:
                raise TubeError(f"radius {self.radius} exceeds the reach bound {r:.4f}")

    # --- geometry -----------------------------------------------------------
    def reach(self, n=1024):
        """``min(1 / kappa_max, half the non-local self-separation)`` of the core."""
        if self.periodic:
            return np.inf
        s = TWO_PI * np.arange(n) / n
        kmax = float(np.max(self.core.curvature(s)))
        p = self.core.eval(s)
        sp = np.linalg.norm(self.core.eval(s, 1), axis=-1)
        arc = np.concatenate([[0.0], np.cumsum(sp) * TWO_PI / n])
        L = arc[-1]
        arc = arc[:-1]
        da = np.abs(arc[:, None] - arc[None, :])
        da = np.minimum(da, L - da)
        dist = np.linalg.norm(p[:, None] - p[None], axis=-1)
        local = np.pi / kmax if kmax > 0 else L / 2
        dist[da < min(local, L / 2 - 1e-12)] = np.inf
        half_sep = 0.5 * float(dist.min()) if np.isfinite(dist.min()) else np.inf
        return min(1.0 / kmax if kmax > 0 else np.inf, half_sep)

    def volume(self, n=256):
        """Exact for the tube map: ``pi a^2 L`` (Pappus, the frame term integrates out)."""
        return np.pi * self.radius ** 2 * self.core.length()

    def project(self, x, iters=30, theta0=None):
        """Tube coordinates of points: ``(theta, rho_vec, rho)``.

        ``theta`` is the closest-point parameter on the core, found by Newton
        iteration from the nearest dense sample, or from ``theta0`` when a
        nearby guess is known.
        """
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        x = x.reshape(-1, 3)
        if self.periodic:
            th = TWO_PI * x[:, 2] / self.core.period
            rv = x.copy()
            rv[:, 2] = 0.0
        else:
            if theta0 is not None:
                th = np.broadcast_to(np.asarray(theta0, dtype=float), (len(x),)).copy()
            else:
                th = np.empty(len(x))
                blk = max(1, 2 ** 18 // self._dense_n)
                for st in range(0, len(x), blk):
                    d2 = np.sum((x[st:st + blk, None, :] - self._dense[None]) ** 2, -1)
                    th[st:st + blk] = TWO_PI * np.argmin(d2, axis=1) / self._dense_n
            for _ in range(iters):
                c0, g1, g2 = self.core.jet(th)
                g0 = c0 - x
                f = np.einsum("ij,ij->i", g0, g1)
                df = np.einsum("ij,ij->i", g1, g1) + np.einsum("ij,ij->i", g0, g2)
                step = f / df
                th = th - step
                if np.max(np.abs(step)) < 1e-14:
                    break
            th = np.mod(th, TWO_PI)
            rv = x - self.core.eval(th)
        rho = np.linalg.norm(rv, axis=-1)
        if theta0 is not None and not self.periodic and np.any(rho >= self.radius):
            return self.project(x.reshape(shape + (3,)), iters)
        return th.reshape(shape), rv.reshape(shape + (3,)), rho.reshape(shape)

    def contains(self, x, margin=0.0):
        return self.project(x)[2] < self.radius - margin

    def point(self, theta, rho, psi):
        """Position from tube coordinates using the orthonormal normals at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        T, _ = _unit_tangent(self.core, theta)
        N1, N2 = _orthonormal_normals(T)
        rho = np.asarray(rho, dtype=float)[..., None]
        psi = np.asarray(psi, dtype=float)[..., None]
        return self.core.eval(theta) + rho * (np.cos(psi) * N1 + np.sin(psi) * N2)

    def scaled(self, lam):
        """Dilation ``x -> lam x`` with the flux kept fixed."""
        core = self.core.transformed(lam * np.eye(3))
        return FluxTube(core, lam * self.radius, self.flux, check=False)

    def with_flux(self, flux):
        return FluxTube(self.core, self.radius, flux, check=False)

    def to_dict(self):
        return {"core": self.core.to_dict(), "radius": self.radius, "flux": self.flux}

    @classmethod
    def from_dict(cls, d):
        return cls(ParametricCurve.from_dict(d["core"]), d["radius"], d.get("flux", 1.0))


def check_disjoint(tubes):
    """Margin ``r_T`` between tubes; raises when tubes overlap."""
    from .curves import pair_separation
    margin = np.inf
    for i in range(len(tubes)):
        for j in range(i + 1, len(tubes)):
            d = pair_separation(tubes[i].core, tubes[j].core)[0]
            m = d - tubes[i].radius - tubes[j].radius
            if m <= 0:
                raise TubeError(f"tubes {i + 1} and {j + 1} overlap (margin {m:.3e})")
            margin = min(margin, m)
    return margin


def load_tubes(path):
    with open(path) as fh:
        d = json.load(fh)
    if "tubes" not in d:
        raise ValueError("tube file needs a 'tubes' list")
    return [FluxTube.from_dict(t) for t in d["tubes"]]


def dump_tubes(tubes, path):
    with open(path, "w") as fh:
        json.dump({"tubes": [t.to_dict() for t in tubes]}, fh)


def borromean_tubes(radius=0.15, fluxes=(1.0, 1.0, 1.0), scale_a=1.0, scale_b=0.5):
    from .curves import borromean_standard
    link = borromean_standard(scale_a, scale_b)
    tubes = [FluxTube(c, radius, f) for c, f in zip(link, fluxes)]
    check_disjoint(tubes)
    return tubes


class TubeField:
    """Divergence-free field ``C f(rho) T(theta)`` supported in a flux tube."""

    def __init__(self, tube):
        self.tube = tube
        a = tube.radius
        self.C = 3.0 * tube.flux / (np.pi * a * a)

    def profile(self, rho):
        u = np.clip(1.0 - (np.asarray(rho) / self.tube.radius) ** 2, 0.0, None)
        return u * u

    def speed_factor(self, rho):
        """``h(rho) / rho = C f(rho)``."""
        return self.C * self.profile(rho)

    def __call__(self, x):
        th, _, rho = self.tube.project(x)
        T, _ = _unit_tangent(self.tube.core, th)
        return self.speed_factor(rho)[..., None] * T

    def _real_coeffs(self):
        if getattr(self, "_rc", None) is None:
            c = self.tube.core.effective_coeffs
            M = self.tube.core.M
            A = [tuple(float(np.real(c[k, M])) for k in range(3))]
            B = [(0.0, 0.0, 0.0)]
            for m in range(1, M + 1):
                A.append(tuple(float(np.real(c[k, M + m] + c[k, M - m])) for k in range(3)))
                B.append(tuple(float(np.imag(c[k, M - m] - c[k, M + m])) for k in range(3)))
            self._rc = (A, B)
        return self._rc

    def _scalar_jet(self, th):
        A, B = self._real_coeffs()
        p = [0.0, 0.0, 0.0]
        d1 = [0.0, 0.0, 0.0]
        d2 = [0.0, 0.0, 0.0]
        for m in range(len(A)):
            cm, sm = math.cos(m * th), math.sin(m * th)
            a, b = A[m], B[m]
            for k in range(3):
                p[k] += a[k] * cm + b[k] * sm
                d1[k] += m * (b[k] * cm - a[k] * sm)
                d2[k] -= m * m * (a[k] * cm + b[k] * sm)
        return p, d1, d2

    def at_point(self, x):
        """Field at a single point, warm-starting the projection from the last call.

        Uses scalar arithmetic for low-order cores, where per-call array
        overhead would dominate an ODE right-hand side.
        """
        hint = getattr(self, "_hint", None)
        if self.tube.periodic or self.tube.core.M > 12 or hint is None:
            th, _, rho = self.tube.project(np.reshape(x, (1, 3)), theta0=hint)
            self._hint = float(th[0])
            T, _ = _unit_tangent(self.tube.core, th)
            return (self.speed_factor(rho)[:, None] * T)[0]
        x0, x1, x2 = float(x[0]), float(x[1]), float(x[2])
        th = hint
        for _ in range(30):
            p, d1, d2 = self._scalar_jet(th)
            g = (p[0] - x0, p[1] - x1, p[2] - x2)
            f = g[0] * d1[0] + g[1] * d1[1] + g[2] * d1[2]
            df = d1[0] ** 2 + d1[1] ** 2 + d1[2] ** 2 + g[0] * d2[0] + g[1] * d2[1] + g[2] * d2[2]
            step = f / df
            th -= step
            # quadratic convergence: the error left after this step is ~step^2
            if abs(step) < 1e-8:
                break
        p, d1, _ = self._scalar_jet(th)
        rho = math.sqrt((x0 - p[0]) ** 2 + (x1 - p[1]) ** 2 + (x2 - p[2]) ** 2)
        if rho >= self.tube.radius:
            self._hint = None
            return self.at_point(x)
        self._hint = th % TWO_PI
        sp = math.sqrt(d1[0] ** 2 + d1[1] ** 2 + d1[2] ** 2)
        u = 1.0 - (rho / self.tube.radius) ** 2
        h = self.C * u * u / sp
        return np.array([h * d1[0], h * d1[1], h * d1[2]])

    def divergence(self, x, h=None):
        """Fourth-order central-difference divergence at points ``x``."""
        h = h or 1e-3 * self.tube.radius
        x = np.atleast_2d(np.asarray(x, dtype=float))
        div = np.zeros(len(x))
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            div += (-self(x + 2 * e)[:, k] + 8 * self(x + e)[:, k]
                    - 8 * self(x - e)[:, k] + self(x - 2 * e)[:, k]) / (12 * h)
        return div

    def section_flux(self, theta, n_rho=16, n_psi=32):
        """Flux through the normal disc at ``theta`` by Gauss-Legendre x trapezoid."""
        a = self.tube.radius
        z, w = np.polynomial.legendre.leggauss(n_rho)
        rho = 0.5 * a * (z + 1)
        wr = 0.5 * a * w
        psi = TWO_PI * np.arange(n_psi) / n_psi
        R, P = np.meshgrid(rho, psi, indexing="ij")
        pts = self.tube.point(np.full(R.shape, theta), R, P)
        T, _ = _unit_tangent(self.tube.core, theta)
        bn = self(pts) @ T
        return float(np.sum(bn * R * wr[:, None]) * TWO_PI / n_psi)

    # --- exact field-line data in tube coordinates --------------------------
    def _line_rhs(self, rho):
        core = self.tube.core
        cf = self.C * self.profile(rho)

        def rhs(theta, y):
            e = y[:3]
            T, sp = _unit_tangent(core, theta)
            Tt = tangent_derivative(core, theta)
            de = -(e @ Tt) * T
            dt = (sp - rho * (e @ Tt)) / cf
            return np.concatenate([de, [dt]])
        return rhs

    def transit(self, x0, turns=1.0, rtol=1e-11):
        """Follow the field line through ``x0`` for ``turns`` core transits.

        Integrates the frame transport ``de/dtheta = -<e, T_theta> T`` and
        ``dt/dtheta = J / h`` in tube coordinates with DOP853. Returns
        ``(time, end_point)``.
        """
        th0, rv, rho = self.tube.project(np.asarray(x0, dtype=float).reshape(3))
        th0, rho, rv = float(np.ravel(th0)[0]), float(np.ravel(rho)[0]), np.reshape(rv, 3)
        if rho >= self.tube.radius:
            raise TubeError("point is not inside the tube")
        e0 = rv / rho if rho > 0 else np.reshape(_orthonormal_normals(_unit_tangent(self.tube.core, th0)[0])[0], 3)
        sol = solve_ivp(self._line_rhs(rho), (th0, th0 + TWO_PI * turns),
                        np.concatenate([e0, [0.0]]), method="DOP853", rtol=rtol, atol=1e-13)
        e, t = sol.y[:3, -1], sol.y[3, -1]
        end = np.reshape(self.tube.core.eval(th0 + TWO_PI * turns), 3) + rho * e / np.linalg.norm(e)
        return float(t), end

    def transit_time(self, x0):
        return self.transit(x0, 1.0)[0]


def make_tube_field(tube):
    """Field of a tube after checking the tube is embedded."""
    if not tube.periodic and tube.radius >= tube.reach():
        raise TubeError("tube radius exceeds the reach of its core")
    return TubeField(tube)

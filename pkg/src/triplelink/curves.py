"""Closed curves as truncated Fourier series, and 2/3-component links.

A curve is stored as three arrays of complex Fourier coefficients with modes
``-M..M`` on the parameter circle ``[0, 2*pi)``. Derivatives are exact
(multiplication by ``(i m)^k``), which is what the quadrature code downstream
relies on.
"""

import json

import numpy as np
from scipy.optimize import minimize

from .errors import SeparationError

TWO_PI = 2.0 * np.pi
DEFAULT_MODES = 16
SEP_REL = 1e-6


class ParametricCurve:
    """Smooth closed curve ``gamma: S^1 -> R^3``.

    Parameters
    ----------
    coeffs : array_like, shape (3, 2M+1)
        Complex coefficients, mode order ``-M..M``.
    orientation : {1, -1}
        ``-1`` traverses the same image backwards, ``gamma(-s)``.
    check_regular : bool
        Reject curves whose speed vanishes somewhere on a dense sample.
    """

    def __init__(self, coeffs, orientation=1, check_regular=True):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != 3 or c.shape[1] % 2 != 1:
            raise ValueError("coeffs must have shape (3, 2M+1)")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        # enforce conjugate symmetry so samples are real
        sym = 0.5 * (c + np.conj(c[:, ::-1]))
        scale = max(np.abs(c).max(), 1e-300)
        if np.abs(sym - c).max() > 1e-9 * scale:
            raise ValueError("coefficients are not conjugate-symmetric")
        sym.setflags(write=False)
        self._coeffs = sym
        self.orientation = int(orientation)
        self.M = (c.shape[1] - 1) // 2
        self.modes = np.arange(-self.M, self.M + 1)
        eff = sym if orientation == 1 else sym[:, ::-1].copy()
        eff.setflags(write=False)
        self._eff = eff
        if check_regular:
            n = max(256, 8 * self.M)
            speed = np.linalg.norm(self.sample(n, deriv=1), axis=-1)
            if speed.min() <= 1e-10 * max(speed.max(), 1e-300):
                raise ValueError("curve is not regular (speed vanishes)")

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def effective_coeffs(self):
        """Coefficients of the oriented parametrization."""
        return self._eff

    def eval(self, s, deriv=0):
        """Point (or ``deriv``-th derivative) at parameter(s) ``s``; shape ``s.shape + (3,)``."""
        s = np.asarray(s, dtype=float)
        c = self._eff * (1j * self.modes) ** deriv
        phase = np.exp(1j * s[..., None] * self.modes)
        return np.real(phase @ c.T)

    def jet(self, s, order=2):
        """Position and derivatives up to ``order`` from one phase evaluation."""
        s = np.asarray(s, dtype=float)
        phase = np.exp(1j * s[..., None] * self.modes)
        pc = phase * 1.0
        out = []
        for k in range(order + 1):
            out.append(np.real(pc @ self._eff.T))
            pc = pc * (1j * self.modes)
        return out

    def sample(self, n, deriv=0):
        return self.eval(TWO_PI * np.arange(n) / n, deriv=deriv)

    def reversed(self):
        return ParametricCurve(self._coeffs, -self.orientation, check_regular=False)

    def shifted(self, ds):
        """Same oriented curve with parameter ``s -> s + ds``."""
        c = self._eff * np.exp(1j * self.modes * ds)
        return ParametricCurve(c, check_regular=False)

    def transformed(self, matrix=None, offset=None):
        c = self._eff.copy()
        if matrix is not None:
            c = np.asarray(matrix, dtype=float) @ c
        if offset is not None:
            c[:, self.M] += np.asarray(offset, dtype=float)
        return ParametricCurve(c, check_regular=False)

    def resampled(self, phi, M=None, n=None):
        """Re-expand ``gamma(phi(s))`` where ``phi`` is a degree-one circle map."""
        M = M or 2 * self.M
        n = n or 4 * M + 4
        s = TWO_PI * np.arange(n) / n
        return ParametricCurve.from_points(self.eval(phi(s)), M=M)

    def length(self, n=None):
        n = n or max(256, 8 * self.M)
        return TWO_PI * np.linalg.norm(self.sample(n, 1), axis=-1).mean()

    def curvature(self, s):
        d1 = self.eval(s, 1)
        d2 = self.eval(s, 2)
        sp = np.linalg.norm(d1, axis=-1)
        return np.linalg.norm(np.cross(d1, d2), axis=-1) / sp ** 3

    def diameter(self, n=256):
        p = self.sample(n)
        return float(np.max(np.linalg.norm(p[:, None] - p[None], axis=-1)))

    # --- constructors -------------------------------------------------
    @classmethod
    def from_function(cls, f, M=DEFAULT_MODES, oversample=4, **kw):
        n = oversample * (2 * M + 1)
        s = TWO_PI * np.arange(n) / n
        return cls.from_points(np.asarray(f(s), dtype=float), M=M, **kw)

    @classmethod
    def from_points(cls, points, M=None, tol=1e-12, **kw):
        """Fit a closed polyline sampled at uniform parameter values.

        The last point must not repeat the first. When ``M`` is None the
        smallest mode count whose discarded spectral energy is below ``tol``
        (relative) is used.
        """
        p = np.asarray(points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or len(p) < 3:
            raise ValueError("points must be an (N, 3) array with N >= 3")
        if np.allclose(p[0], p[-1]) and len(p) > 3:
            p = p[:-1]
        n = len(p)
        spec = np.fft.fft(p, axis=0) / n
        mmax = (n - 1) // 2
        if M is None:
            k = np.fft.fftfreq(n, 1.0 / n).astype(int)
            power = np.sum(np.abs(spec) ** 2, axis=1)
            total = power.sum()
            M = mmax
            for m in range(1, mmax + 1):
                if power[np.abs(k) > m].sum() <= tol ** 2 * total:
                    M = m
                    break
        M = min(int(M), mmax)
        modes = np.arange(-M, M + 1)
        coeffs = spec[modes % n].T
        return cls(coeffs, **kw)

    @classmethod
    def ellipse(cls, center, u, v, **kw):
        """``center + u cos s + v sin s``."""
        c = np.zeros((3, 3), dtype=complex)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        c[:, 1] = center
        c[:, 2] = 0.5 * (u - 1j * v)
        c[:, 0] = 0.5 * (u + 1j * v)
        return cls(c, **kw)

    # --- serialization ------------------------------------------------
    def to_dict(self):
        d = {f"coeffs_{ax}": [[float(z.real), float(z.imag)] for z in self._coeffs[i]]
             for i, ax in enumerate("xyz")}
        d["orientation"] = self.orientation
        return d

    @classmethod
    def from_dict(cls, d, **kw):
        if "points" in d:
            curve = cls.from_points(d["points"], **kw)
            if d.get("orientation", 1) == -1:
                curve = curve.reversed()
            return curve
        rows = []
        for ax in "xyz":
            arr = np.asarray(d[f"coeffs_{ax}"], dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValueError(f"coeffs_{ax} must be a list of [re, im] pairs")
            rows.append(arr[:, 0] + 1j * arr[:, 1])
        if len({len(r) for r in rows}) != 1:
            raise ValueError("coordinate coefficient arrays differ in length")
        return cls(np.array(rows), orientation=int(d.get("orientation", 1)), **kw)

    def __repr__(self):
        return f"ParametricCurve(M={self.M}, orientation={self.orientation})"


def pair_separation(c1, c2, n=None, refine=True):
    """Minimum distance between two distinct curves, with its parameters.

    A dense ``(s, t)`` grid search is polished by local optimization, so the
    result is an attained distance and never below the true minimum.
    """
    if c1 is c2:
        raise ValueError("separation needs two distinct curves")
    n = n or max(256, 8 * max(c1.M, c2.M))
    s = TWO_PI * np.arange(n) / n
    p = c1.eval(s)
    q = c2.eval(s)
    d = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=-1)
    flat = np.argsort(d, axis=None)[:4]
    best = (float(d.flat[flat[0]]), s[flat[0] // n], s[flat[0] % n])
    if not refine:
        return best

    def f(x):
        diff = c1.eval(x[0]) - c2.eval(x[1])
        return float(diff @ diff)

    def g(x):
        diff = c1.eval(x[0]) - c2.eval(x[1])
        return np.array([2 * diff @ c1.eval(x[0], 1), -2 * diff @ c2.eval(x[1], 1)])

    for idx in flat:
        x0 = np.array([s[idx // n], s[idx % n]])
        res = minimize(f, x0, jac=g, method="BFGS", options={"gtol": 1e-14})
        val = np.sqrt(max(res.fun, 0.0))
        if val < best[0]:
            best = (float(val), float(res.x[0] % TWO_PI), float(res.x[1] % TWO_PI))
    return best


class Link3:
    """Ordered triple of pairwise disjoint closed curves (labels 1, 2, 3).

    Also used with two components for pairwise computations.
    """

    def __init__(self, components, eps_rel=SEP_REL):
        comps = tuple(components)
        if len(comps) not in (2, 3):
            raise ValueError("a link here has 2 or 3 components")
        self.components = comps
        diam = max(c.diameter() for c in comps)
        self.eps_sep = eps_rel * diam
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                d = pair_separation(comps[i], comps[j], refine=False)[0]
                if d <= self.eps_sep:
                    raise SeparationError(
                        f"components {i + 1} and {j + 1} are {d:.3e} apart "
                        f"(guard {self.eps_sep:.3e})")

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def transformed(self, matrix=None, offset=None):
        return Link3([c.transformed(matrix, offset) for c in self.components])

    def with_component(self, index, curve):
        comps = list(self.components)
        comps[index] = curve
        return Link3(comps)

    def relabeled(self, order):
        return Link3([self.components[k] for k in order])

    def to_dict(self):
        return {"components": [c.to_dict() for c in self.components]}

    @classmethod
    def from_dict(cls, d):
        if "components" not in d:
            raise ValueError("link JSON needs a 'components' list")
        return cls([ParametricCurve.from_dict(c) for c in d["components"]])

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def min_separation(link):
    """Smallest distance between points of different components."""
    comps = link.components
    return min(pair_separation(comps[i], comps[j])[0]
               for i in range(len(comps)) for j in range(i + 1, len(comps)))


# --- standard models -------------------------------------------------------

def borromean_standard(scale_a=1.0, scale_b=0.5, rel_gap=1e-2, validate=True):
    """Borromean rings as three perpendicular ellipses.

    Component 1 lies in the xy-plane, 2 in the yz-plane and 3 in the zx-plane,
    with semi-axes ``(a, b)`` cyclically permuted. The construction is checked,
    not assumed: separation above ``rel_gap * a``, zero pairwise linking, and
    ``|mu123| = 1``.
    """
    a, b = float(scale_a), float(scale_b)
    if not 0.0 < b < a:
        raise ValueError("need 0 < scale_b < scale_a")
    e1 = ParametricCurve.ellipse([0, 0, 0], [a, 0, 0], [0, b, 0])
    e2 = ParametricCurve.ellipse([0, 0, 0], [0, a, 0], [0, 0, b])
    e3 = ParametricCurve.ellipse([0, 0, 0], [0, 0, a], [b, 0, 0])
    link = Link3([e1, e2, e3])
    if validate:
        gap = min_separation(link)
        if gap < rel_gap * a:
            raise SeparationError(f"ellipses nearly intersect (gap {gap:.2e})")
        from .invariants import mu12_crossings, mu123_hopf
        for i, j in ((0, 1), (1, 2), (0, 2)):
            lk = mu12_crossings(link[i], link[j])
            if lk != 0:
                raise ValueError(f"pair {(i + 1, j + 1)} has linking number {lk}")
        rep = mu123_hopf(link, ns=(32, 48), gate=False)
        if not rep.certified or abs(rep.integer) != 1:
            raise ValueError(f"triple linking number check failed: {rep.values}")
    return link


def mirror(link):
    """Reflection through the xy-plane."""
    return link.transformed(np.diag([1.0, 1.0, -1.0]))


def hopf_pair():
    """Unit circle in the xy-plane and a unit circle through its center."""
    c1 = ParametricCurve.ellipse([0, 0, 0], [1, 0, 0], [0, 1, 0])
    c2 = ParametricCurve.ellipse([1, 0, 0], [1, 0, 0], [0, 0, 1])
    return c1, c2


def split_pair(distance=5.0):
    c1 = ParametricCurve.ellipse([0, 0, 0], [1, 0, 0], [0, 1, 0])
    c2 = ParametricCurve.ellipse([0, 0, distance], [1, 0, 0], [0, 1, 0])
    return c1, c2


def torus_link_pair(q=2, major=2.0, minor=0.7):
    """The two components of the (2, 2q) torus link; linking number ``q``."""
    def comp(phase):
        def f(s):
            r = major + minor * np.cos(q * s + phase)
            return np.stack([r * np.cos(s), r * np.sin(s), minor * np.sin(q * s + phase)], -1)
        return ParametricCurve.from_function(f, M=q + 2)
    return comp(0.0), comp(np.pi)


def split_unlink3(spacing=4.0):
    return Link3([ParametricCurve.ellipse([k * spacing, 0, 0], [1, 0, 0], [0, 1, 0])
                  for k in range(3)])


def fourier_noise(curve, amplitude, rng, modes=3):
    """Random displacement in modes ``1..modes`` with RMS magnitude ``amplitude``.

    Coefficients are padded to ``curve``'s mode count when that is larger.
    """
    K = max(curve.M, modes)
    out = np.zeros((3, 2 * K + 1), dtype=complex)
    z = rng.standard_normal((3, modes)) + 1j * rng.standard_normal((3, modes))
    z *= amplitude / np.sqrt(2 * np.sum(np.abs(z) ** 2))
    out[:, K + 1:K + modes + 1] = z
    out[:, K - modes:K][:, ::-1] = np.conj(z)
    return out


def _padded(curve, K):
    out = np.zeros((3, 2 * K + 1), dtype=complex)
    out[:, K - curve.M:K + curve.M + 1] = curve.effective_coeffs
    return out


def isotopy_gap(link, displacements, floor=0.0):
    """Smallest component gap along ``L + tau * delta``, ``tau`` in [0, 1].

    Steps are chosen so two components cannot meet between checked stations:
    the relative speed is at most twice the largest displacement. The scan
    stops early once the gap drops below ``floor``.
    """
    K = max(dc.shape[1] for dc in displacements) // 2
    base = [_padded(c, K) for c in link]
    delta = [np.pad(dc, ((0, 0), (K - dc.shape[1] // 2,) * 2)) for dc in displacements]
    speed = max(np.abs(ParametricCurve(dc, check_regular=False).sample(512)).max()
                for dc in delta) * np.sqrt(3)
    tau, worst = 0.0, np.inf
    while True:
        cur = [ParametricCurve(b + tau * dc, check_regular=False) for b, dc in zip(base, delta)]
        gap = min(pair_separation(cur[i], cur[j])[0]
                  for i in range(len(cur)) for j in range(i + 1, len(cur)))
        worst = min(worst, gap)
        if tau >= 1.0 or gap <= floor:
            return worst
        tau = min(1.0, tau + 0.9 * gap / max(2 * speed, 1e-300))


def perturbed_link(link, amplitude=0.1, seed=0, modes=3, min_gap=None):
    """Random Fourier-noise isotopy of every component.

    The straight-line family from ``link`` to the result keeps the components
    at least ``min_gap`` apart (default a quarter of the original gap), so the
    result is isotopic to the input. Draws are retried until that holds.
    """
    rng = np.random.default_rng(seed)
    min_gap = min_gap if min_gap is not None else 0.25 * min_separation(link)
    for _ in range(50):
        deltas = [fourier_noise(c, amplitude, rng, modes) for c in link]
        if isotopy_gap(link, deltas, min_gap) >= min_gap:
            K = max(d.shape[1] for d in deltas) // 2
            return Link3([ParametricCurve(_padded(c, K) + np.pad(d, ((0, 0), (K - d.shape[1] // 2,) * 2)))
                          for c, d in zip(link, deltas)])
    raise SeparationError("could not find a perturbation keeping the components apart")


def curl_component(curve, s0=0.0, width=0.6, radius=0.25, lift=0.15, crossing=1.0, M=96):
    """Insert a small curl near ``s0`` whose self-crossing has height ``crossing * lift``.

    Varying ``crossing`` from +1 to -1 pushes the curve through itself once
    (at ``crossing = 0`` the two strands meet), a self-pass of one component.
    The curl bulges along the outward in-plane normal at ``s0``; it is a
    prolate trochoid, so ``radius`` must exceed the base arc length over the
    window divided by ``2 pi`` for the loop to close up.
    """
    def f(s):
        base = curve.eval(s)
        ds = np.angle(np.exp(1j * (s - s0)))
        x = np.clip((ds + width) / (2 * width), 0.0, 1.0)
        w = x ** 4 * (35 - 84 * x + 70 * x ** 2 - 20 * x ** 3)  # C3 smoothstep
        tang = curve.eval(s0, 1)
        tang = tang / np.linalg.norm(tang)
        acc = curve.eval(s0, 2)
        nrm = -(acc - (acc @ tang) * tang)
        nrm = nrm / np.linalg.norm(nrm)
        binorm = np.cross(tang, nrm)
        ang = 2 * np.pi * w
        loop = (radius * (1 - np.cos(ang)))[..., None] * nrm \
            + (radius * np.sin(ang))[..., None] * tang \
            + (crossing * lift * np.sin(ang))[..., None] * binorm
        return base + loop
    return ParametricCurve.from_function(f, M=M, oversample=6, check_regular=False)

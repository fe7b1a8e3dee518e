"""Green forms, grid-sampled differential forms on tori, and pullbacks.

Conventions: right-handed R^3, torus orientation ``du_1 ^ ... ^ du_k``, and
the 2-form

    omega(x)(X, Y) = <x, X, Y> / (4 pi |x|^3)

whose restriction to the unit sphere is the normalized area form.
"""

from dataclasses import dataclass, field
from itertools import combinations
import json

import numpy as np
import scipy.fft as sfft

from .errors import SingularityError

FOUR_PI = 4.0 * np.pi
TWO_PI = 2.0 * np.pi


def triple(x, X, Y):
    """``<x, X, Y> = det[x, X, Y]`` along the last axis."""
    return np.einsum("...i,...i->...", x, np.cross(X, Y))


def omega_eval(x, X, Y, eps=1e-12):
    """Evaluate ``omega(x)(X, Y)``; arrays broadcast over leading axes."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r < eps):
        idx = np.unravel_index(np.argmin(r), np.shape(r)) if np.ndim(r) else None
        raise SingularityError("omega evaluated too close to the origin",
                               node=idx, distance=float(np.min(r)))
    return triple(x, np.asarray(X, dtype=float), np.asarray(Y, dtype=float)) / (FOUR_PI * r ** 3)


@dataclass(frozen=True)
class GreenFormKernel:
    """``omega_{i,j} = (x_i - x_j)^* omega`` on configurations ``(x_1, ..., x_k)``.

    Labels are 1-based. Configurations are arrays with last axis ``3k``.
    """
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j or min(self.i, self.j) < 1:
            raise ValueError("Green form needs two distinct positive labels")

    def _blk(self, a, k):
        return a[..., 3 * (k - 1):3 * k]

    def difference(self, x):
        return self._blk(x, self.i) - self._blk(x, self.j)

    def __call__(self, x, X, Y, eps=1e-12):
        return omega_eval(self.difference(x), self.difference(X), self.difference(Y), eps)


class SphereKernel:
    """``omega`` itself on ``R^3 \\ 0`` (the pulled-back normalized area form)."""

    def __call__(self, x, X, Y, eps=1e-12):
        return omega_eval(x, X, Y, eps)


def sphere_total(n):
    """Integral of ``omega`` over the unit sphere by Gauss-Legendre x trapezoid."""
    if n < 4:
        raise ValueError("sphere quadrature needs n >= 4")
    z, w = np.polynomial.legendre.leggauss(n)
    theta = 0.5 * np.pi * (z + 1)
    wt = 0.5 * np.pi * w
    phi = TWO_PI * np.arange(2 * n) / (2 * n)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    x = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1)
    xt = np.stack([np.cos(T) * np.cos(P), np.cos(T) * np.sin(P), -np.sin(T)], -1)
    xp = np.stack([-np.sin(T) * np.sin(P), np.sin(T) * np.cos(P), 0 * T], -1)
    vals = omega_eval(x, xt, xp)
    return float(np.sum(vals * wt[:, None]) * (TWO_PI / (2 * n)))


class TorusGrid:
    """Uniform periodic grid on ``(S^1)^dim``; ``n`` may be per-axis."""

    def __init__(self, dim, n):
        if dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        shape = (int(n),) * dim if np.isscalar(n) else tuple(int(v) for v in n)
        if len(shape) != dim:
            raise ValueError("per-axis resolution has wrong length")
        for v in shape:
            if v < 8 or v % 2:
                raise ValueError(f"grid resolution must be even and >= 8, got {v}")
        self.dim = dim
        self.shape = shape

    @property
    def n(self):
        return self.shape[0] if len(set(self.shape)) == 1 else self.shape

    @property
    def h(self):
        return tuple(TWO_PI / v for v in self.shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def axes(self):
        return [TWO_PI * np.arange(v) / v for v in self.shape]

    def wavenumbers(self, real_last=False):
        """Integer wavenumbers per axis with the Nyquist mode zeroed.

        With ``real_last`` the last axis holds the non-negative half used by
        real transforms.
        """
        out = []
        for i, v in enumerate(self.shape):
            if real_last and i == len(self.shape) - 1:
                k = np.arange(v // 2 + 1, dtype=float)
            else:
                k = np.fft.fftfreq(v, 1.0 / v)
            if v % 2 == 0:
                k[v // 2] = 0.0
            out.append(k)
        return out

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def __repr__(self):
        return f"TorusGrid(dim={self.dim}, shape={self.shape})"


def _sorted_sign(idx):
    """Sign of the permutation sorting ``idx``, and the sorted tuple (0 if repeated)."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, None
    sign = 1
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                sign = -sign
    return sign, tuple(sorted(idx))


@dataclass
class DiscreteForm:
    """Degree-``p`` form on a torus grid, keyed by increasing 0-based index tuples."""
    grid: TorusGrid
    degree: int
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = list(combinations(range(self.grid.dim), self.degree))
        comps = {}
        for key in keys:
            arr = self.components.get(key)
            if arr is None:
                arr = np.zeros(self.grid.shape)
            arr = np.asarray(arr, dtype=float)
            if arr.shape != self.grid.shape:
                raise ValueError(f"component {key} has shape {arr.shape}, grid is {self.grid.shape}")
            comps[key] = arr
        extra = set(self.components) - set(keys)
        if extra:
            raise ValueError(f"unexpected components {sorted(extra)}")
        self.components = comps

    def __getitem__(self, key):
        sign, k = _sorted_sign(key)
        if sign == 0:
            return np.zeros(self.grid.shape)
        return sign * self.components[k]

    def _combine(self, other, op):
        if other.grid != self.grid or other.degree != self.degree:
            raise ValueError("forms live on different grids or degrees")
        return DiscreteForm(self.grid, self.degree,
                            {k: op(v, other.components[k]) for k, v in self.components.items()})

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def scaled(self, c):
        return DiscreteForm(self.grid, self.degree, {k: c * v for k, v in self.components.items()})

    def max_abs(self):
        return max((float(np.abs(v).max()) for v in self.components.values()), default=0.0)

    def to_json(self):
        return json.dumps({
            "shape": list(self.grid.shape), "degree": self.degree,
            "components": {",".join(map(str, k)): v.ravel().tolist()
                           for k, v in self.components.items()}})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        grid = TorusGrid(len(d["shape"]), d["shape"])
        comps = {tuple(int(c) for c in k.split(",") if c != ""): np.reshape(v, grid.shape)
                 for k, v in d["components"].items()}
        return cls(grid, d["degree"], comps)


def zero_form(grid, values):
    return DiscreteForm(grid, 0, {(): values})


def _spectral_partial(arr, axis, grid):
    v = grid.shape[axis]
    k = np.arange(v // 2 + 1, dtype=float)
    if v % 2 == 0:
        k[-1] = 0.0
    shp = [1] * grid.dim
    shp[axis] = len(k)
    return sfft.irfft(1j * k.reshape(shp) * sfft.rfft(arr, axis=axis), n=v, axis=axis)


def d(form):
    """Spectral exterior derivative; ``d(d(.)) = 0`` up to round-off."""
    g = form.grid
    p = form.degree
    if p >= g.dim:
        raise ValueError("cannot differentiate a top-degree form")
    out = {}
    for key in combinations(range(g.dim), p + 1):
        acc = np.zeros(g.shape)
        for r, a in enumerate(key):
            rest = key[:r] + key[r + 1:]
            acc += (-1) ** r * _spectral_partial(form.components[rest], a, g)
        out[key] = acc
    return DiscreteForm(g, p + 1, out)


def wedge(alpha, beta):
    """Pointwise wedge product of two forms on the same grid."""
    if alpha.grid != beta.grid:
        raise ValueError("forms live on different grids")
    g = alpha.grid
    p, q = alpha.degree, beta.degree
    if p + q > g.dim:
        return DiscreteForm(g, g.dim, {})
    out = {}
    for key in combinations(range(g.dim), p + q):
        acc = np.zeros(g.shape)
        for J in combinations(key, p):
            K = tuple(a for a in key if a not in J)
            sign, _ = _sorted_sign(J + K)
            acc += sign * alpha.components[J] * beta.components[K]
        out[key] = acc
    return DiscreteForm(g, p + q, out)


def integrate_top(form):
    """Trapezoid (spectrally accurate) integral of a top-degree form."""
    if form.degree != form.grid.dim:
        raise ValueError("integrate_top needs a top-degree form")
    key = tuple(range(form.grid.dim))
    return float(np.sum(form.components[key]) * form.grid.cell_volume)


# --- maps from tori ----------------------------------------------------

class ProductMap:
    """``(u_1, ..., u_k) -> (c_1(u_1), ..., c_k(u_k))`` into ``(R^3)^k``.

    ``evaluate(axes)`` returns the configuration and its partial derivatives on
    the tensor grid spanned by ``axes``; derivatives come from Fourier data.
    """

    def __init__(self, curves):
        self.curves = list(curves)
        self.dim = len(self.curves)

    def evaluate(self, axes):
        k = self.dim
        shape = tuple(len(a) for a in axes)
        vals, parts = [], [[] for _ in range(k)]
        for m, (c, ax) in enumerate(zip(self.curves, axes)):
            bshape = [1] * k + [3]
            bshape[m] = len(ax)
            p = np.broadcast_to(c.eval(ax).reshape(bshape), shape + (3,))
            dp = np.broadcast_to(c.eval(ax, 1).reshape(bshape), shape + (3,))
            vals.append(p)
            for a in range(k):
                parts[a].append(dp if a == m else np.zeros(shape + (3,)))
        F = np.concatenate(vals, -1)
        return F, [np.concatenate(pa, -1) for pa in parts]


def pullback_2form(kernel, fmap, grid, eps=1e-12, chunk=None):
    """Sample ``(F^* kernel)_{ab} = kernel(F)(dF/du_a, dF/du_b)`` on ``grid``.

    ``fmap.evaluate(axes)`` must return values and analytic partials. Work is
    split into slabs along the first axis to bound memory.
    """
    axes = grid.axes()
    n0 = grid.shape[0]
    chunk = chunk or max(1, int(2 ** 21 // max(1, np.prod(grid.shape[1:]))))
    comps = {key: np.empty(grid.shape) for key in combinations(range(grid.dim), 2)}
    for start in range(0, n0, chunk):
        sl = slice(start, min(n0, start + chunk))
        F, dF = fmap.evaluate([axes[0][sl]] + axes[1:])
        try:
            for (a, b) in comps:
                comps[(a, b)][sl] = kernel(F, dF[a], dF[b], eps)
        except SingularityError as err:
            node = err.node
            if node is not None:
                node = (node[0] + start,) + tuple(node[1:])
            raise SingularityError(str(err), node=node, distance=err.distance) from None
    return DiscreteForm(grid, 2, comps)

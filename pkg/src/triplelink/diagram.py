"""Planar projections of links: crossings, linking numbers and a Milnor oracle.

The triple linking number oracle reads the Wirtinger presentation off a
generic projection and expands the longitudes in the truncated Magnus algebra
``Z<<X_1, X_2, X_3>> / (degree >= 3)``. It is independent of every integral
formula in the package and serves as the combinatorial cross-check.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GenericityError

DEFAULT_DIRECTION = np.array([0.2113, 0.3407, 0.9163])
MAX_RETRIES = 8


@dataclass(frozen=True)
class Crossing:
    """A crossing of strands ``(a, sa)`` and ``(b, sb)`` in the projection.

    ``height`` is ``<c_a(sa) - c_b(sb), d>``; the strand with the larger
    coordinate along ``d`` is over. ``sign`` is the right-handed crossing sign
    ``sign <d, T_over x T_under>``.
    """
    a: int
    sa: float
    b: int
    sb: float
    height: float
    sign: int

    @property
    def over(self):
        return (self.a, self.sa) if self.height > 0 else (self.b, self.sb)

    @property
    def under(self):
        return (self.b, self.sb) if self.height > 0 else (self.a, self.sa)


def _basis(d):
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    return d, e1, np.cross(d, e1)


def _segment_hits(P, Q, same):
    """Index pairs ``(i, j)`` and local parameters of intersecting 2D segments."""
    n, m = len(P), len(Q)
    P1 = np.roll(P, -1, axis=0)
    Q1 = np.roll(Q, -1, axis=0)
    out = []
    block = max(1, 2 ** 20 // m)
    for st in range(0, n, block):
        p0 = P[st:st + block, None, :]
        r = (P1 - P)[st:st + block, None, :]
        q0 = Q[None, :, :]
        sv = (Q1 - Q)[None, :, :]
        den = r[..., 0] * sv[..., 1] - r[..., 1] * sv[..., 0]
        w = q0 - p0
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (w[..., 0] * sv[..., 1] - w[..., 1] * sv[..., 0]) / den
            v = (w[..., 0] * r[..., 1] - w[..., 1] * r[..., 0]) / den
        hit = (u >= 0) & (u < 1) & (v >= 0) & (v < 1) & (den != 0)
        if same:
            ii = np.arange(st, min(n, st + block))[:, None]
            jj = np.arange(m)[None, :]
            gap = np.abs(ii - jj)
            hit &= (jj > ii) & (gap > 1) & (gap < n - 1)
        for i, j in zip(*np.nonzero(hit)):
            out.append((st + i, j, u[i, j], v[i, j]))
    return out


def _refine(ca, cb, s, t, e1, e2, tol=1e-13):
    for _ in range(40):
        diff = ca.eval(s) - cb.eval(t)
        g = np.array([diff @ e1, diff @ e2])
        da, db = ca.eval(s, 1), cb.eval(t, 1)
        J = np.array([[da @ e1, -(db @ e1)], [da @ e2, -(db @ e2)]])
        step = np.linalg.solve(J, g)
        s, t = s - step[0], t - step[1]
        if np.abs(step).max() < tol:
            return s % (2 * np.pi), t % (2 * np.pi), True
    return s % (2 * np.pi), t % (2 * np.pi), False


def _crossings_once(curves, d, n, include_self):
    d, e1, e2 = _basis(d)
    samples = [c.sample(n) for c in curves]
    proj = [np.stack([p @ e1, p @ e2], -1) for p in samples]
    diam = max(np.ptp(p, axis=0).max() for p in samples)
    h = 2 * np.pi / n
    found = []
    for a in range(len(curves)):
        for b in range(a, len(curves)):
            if a == b and not include_self:
                continue
            for i, j, u, v in _segment_hits(proj[a], proj[b], a == b):
                s0, t0 = (i + u) * h, (j + v) * h
                s, t, ok = _refine(curves[a], curves[b], s0, t0, e1, e2)
                if not ok:
                    raise GenericityError("crossing refinement did not converge")
                da, db = curves[a].eval(s, 1), curves[b].eval(t, 1)
                pa, pb = da - (da @ d) * d, db - (db @ d) * d
                sin = abs(d @ np.cross(pa, pb)) / (np.linalg.norm(pa) * np.linalg.norm(pb))
                if sin < 1e-3:
                    raise GenericityError("near-tangent crossing")
                height = float((curves[a].eval(s) - curves[b].eval(t)) @ d)
                if abs(height) < 1e-8 * diam:
                    raise GenericityError("strands meet in space")
                To, Tu = (da, db) if height > 0 else (db, da)
                sign = int(np.sign(d @ np.cross(To, Tu)))
                found.append(Crossing(a, float(s), b, float(t), height, sign))
    # dedupe crossings seen from two neighbouring segment pairs
    uniq = []
    for c in found:
        dup = False
        for u in uniq:
            if u.a == c.a and u.b == c.b and \
                    abs(np.angle(np.exp(1j * (u.sa - c.sa)))) < 1e-7 and \
                    abs(np.angle(np.exp(1j * (u.sb - c.sb)))) < 1e-7:
                dup = True
                break
        if not dup:
            uniq.append(c)
    # distinct crossings must have distinct projected positions
    pts = np.array([[(curves[c.a].eval(c.sa)) @ e1, curves[c.a].eval(c.sa) @ e2] for c in uniq])
    if len(pts) > 1:
        dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        dist[np.diag_indices(len(pts))] = np.inf
        if dist.min() < 1e-6 * diam:
            raise GenericityError("triple point in projection")
    return uniq


def find_crossings(curves, direction=None, n=None, include_self=True, seed=0):
    """Crossings of the projection along ``direction`` with jittered retries.

    Returns ``(crossings, direction_used)``.
    """
    d = np.asarray(DEFAULT_DIRECTION if direction is None else direction, dtype=float)
    d = d / np.linalg.norm(d)
    n = n or max(512, 8 * max(c.M for c in curves))
    rng = np.random.default_rng(seed)
    last = None
    for _ in range(MAX_RETRIES):
        try:
            return _crossings_once(curves, d, n, include_self), d
        except (GenericityError, np.linalg.LinAlgError) as err:
            last = err
            d = d + 0.05 * rng.standard_normal(3)
            d /= np.linalg.norm(d)
    raise GenericityError(f"no generic projection after {MAX_RETRIES} tries: {last}")


def linking_from_crossings(crossings, a, b):
    """Linking number of components ``a`` and ``b`` in the package convention.

    The package fixes ``lk = deg((x_a - x_b)/|x_a - x_b|)``, which is minus half
    the sum of right-handed crossing signs between the two components.
    """
    tot = sum(c.sign for c in crossings if {c.a, c.b} == {a, b} and c.a != c.b)
    if tot % 2:
        raise GenericityError("odd crossing sum between distinct components")
    return -tot // 2


# --- truncated Magnus algebra ------------------------------------------------

class Magnus:
    """Element ``c0 + sum c1_i X_i + sum c2_ij X_i X_j`` modulo degree 3."""

    __slots__ = ("c0", "c1", "c2")

    def __init__(self, c0, c1, c2):
        self.c0 = c0
        self.c1 = c1
        self.c2 = c2

    @classmethod
    def generator(cls, i, k=3):
        e = np.zeros(k)
        e[i] = 1.0
        return cls(1.0, e, np.zeros((k, k)))

    @classmethod
    def one(cls, k=3):
        return cls(1.0, np.zeros(k), np.zeros((k, k)))

    def __mul__(self, o):
        return Magnus(self.c0 * o.c0, self.c0 * o.c1 + o.c0 * self.c1,
                      self.c0 * o.c2 + o.c0 * self.c2 + np.outer(self.c1, o.c1))

    def inv(self):
        # valid for group-like elements with c0 = 1
        return Magnus(1.0, -self.c1, -self.c2 + np.outer(self.c1, self.c1))

    def power(self, e):
        return self if e > 0 else self.inv()


def _wirtinger(crossings, ncomp):
    """Undercrossing lists per component and arc lookup for over strands."""
    unders = [[] for _ in range(ncomp)]
    for c in crossings:
        comp, s = c.under
        unders[comp].append((s, c))
    for u in unders:
        u.sort(key=lambda item: item[0])
    params = [np.array([s for s, _ in u]) for u in unders]

    def arc_of(comp, s):
        m = len(params[comp])
        return 0 if m == 0 else int(np.sum(params[comp] < s)) % m

    return unders, arc_of


def milnor_longitudes(crossings, ncomp=3, iterations=4):
    """Magnus expansions of the longitudes of every component."""
    unders, arc_of = _wirtinger(crossings, ncomp)
    gens = [Magnus.generator(i, ncomp) for i in range(ncomp)]
    arcs = [[gens[c]] * max(1, len(unders[c])) for c in range(ncomp)]

    def letter(cr):
        comp, s = cr.over
        return arcs[comp][arc_of(comp, s)].power(cr.sign)

    for _ in range(iterations):
        new = []
        for c in range(ncomp):
            cur = gens[c]
            seq = [cur]
            for _, cr in unders[c][:-1]:
                w = letter(cr)
                cur = w.inv() * cur * w
                seq.append(cur)
            new.append(seq if unders[c] else [gens[c]])
        arcs = new
    longs = []
    for c in range(ncomp):
        lam = Magnus.one(ncomp)
        for _, cr in unders[c]:
            lam = lam * letter(cr)
        longs.append(lam)
    return longs


def mu123_diagram(link, direction=None, n=None, seed=0):
    """Triple linking number from a generic projection (Magnus coefficient).

    Returns ``mu(1,2;3)``, the ``X_1 X_2`` coefficient of the third longitude,
    rounded to an integer. Valid when all pairwise linking numbers vanish.
    """
    crossings, _ = find_crossings(list(link), direction, n, True, seed)
    lam = milnor_longitudes(crossings, len(link))
    return int(round(lam[2].c2[0, 1]))

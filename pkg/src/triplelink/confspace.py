"""Spherical cycles in the configuration space of three points in R^3.

Base points are ``q1 = 0, q2 = 4e, q3 = 8e`` with ``e = (1, 0, 0)``. The
cycles ``A_{2,1}, A_{3,2}, A_{3,1}`` are affine maps of the unit sphere, so
pulled-back Green forms are evaluated with exact tangent vectors and
integrated with a Gauss-Legendre x trapezoid rule.

Class conventions: ``alpha_{i,j}`` for ``i < j`` means ``-alpha_{j,i}``,
matching ``omega_{i,j} = -omega_{j,i}``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .forms import GreenFormKernel
from .invariants import CYCLIC_PAIRS, four_form_omega, wedge22

E = np.array([1.0, 0.0, 0.0])
Q = (np.zeros(3), 4.0 * E, 8.0 * E)
TAGS = ((2, 1), (3, 2), (3, 1))


def sphere_rule(n):
    """Nodes, tangent vectors and weights on the unit sphere.

    ``n // 2`` Gauss-Legendre nodes in the polar angle and ``n`` equispaced
    azimuths. The pair ``(d/dtheta, d/dphi)`` is positively oriented for the
    outward normal.
    """
    if n < 4 or n % 2:
        raise ValueError("sphere rule needs an even n >= 4")
    z, w = np.polynomial.legendre.leggauss(n // 2)
    th = 0.5 * np.pi * (z + 1)
    ph = 2 * np.pi * np.arange(n) / n
    T, P = np.meshgrid(th, ph, indexing="ij")
    x = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1)
    xt = np.stack([np.cos(T) * np.cos(P), np.cos(T) * np.sin(P), -np.sin(T)], -1)
    xp = np.stack([-np.sin(T) * np.sin(P), np.sin(T) * np.cos(P), np.zeros_like(T)], -1)
    wt = (0.5 * np.pi * w)[:, None] * (2 * np.pi / n) * np.ones_like(T)
    return x.reshape(-1, 3), xt.reshape(-1, 3), xp.reshape(-1, 3), wt.ravel()


@dataclass(frozen=True)
class SphereCycle:
    """Affine map ``xi -> base + M xi`` from ``S^2`` into ``(R^3)^3``."""
    base: tuple
    matrix: tuple
    label: str = ""

    @property
    def B(self):
        return np.array(self.base)

    @property
    def M(self):
        return np.array(self.matrix)

    def __call__(self, xi):
        return self.B + xi @ self.M.T

    def check_diagonal(self, n=16, tol=1e-9):
        x = self(sphere_rule(n)[0])
        for a in range(3):
            for b in range(a + 1, 3):
                gap = np.linalg.norm(x[:, 3 * a:3 * a + 3] - x[:, 3 * b:3 * b + 3], axis=-1).min()
                if gap <= tol:
                    raise ValueError(f"cycle {self.label} meets the diagonal")
        return True


def _block(k):
    m = np.zeros((9, 3))
    m[3 * k:3 * k + 3] = np.eye(3)
    return m


def _cycle(points, moving, label):
    base = np.concatenate(points)
    return SphereCycle(tuple(base), tuple(map(tuple, _block(moving))), label)


def A(i, j):
    """The cycle ``A_{i,j}``, ``(i, j)`` in ``{(2,1), (3,2), (3,1)}``."""
    q1, q2, q3 = Q
    if (i, j) == (2, 1):
        return _cycle((q1, np.zeros(3), q3), 1, "A21")
    if (i, j) == (3, 2):
        return _cycle((q1, q2, q2), 2, "A32")
    if (i, j) == (3, 1):
        return _cycle((q1, q2, np.zeros(3)), 2, "A31")
    raise ValueError(f"no cycle A_{(i, j)}")


def permutation_matrix(sigma):
    """``sigma`` maps label ``i`` to ``sigma[i]`` (1-based dict or tuple of images)."""
    imgs = sigma if isinstance(sigma, dict) else {k + 1: v for k, v in enumerate(sigma)}
    P = np.zeros((9, 9))
    for i, si in imgs.items():
        P[3 * (si - 1):3 * si, 3 * (i - 1):3 * i] = np.eye(3)
    return P


def transposition(a, b):
    s = {1: 1, 2: 2, 3: 3}
    s[a], s[b] = b, a
    return s


def permute(cycle, sigma):
    """Coordinate-permuted cycle: the point in slot ``i`` moves to slot ``sigma(i)``."""
    P = permutation_matrix(sigma)
    return SphereCycle(tuple(P @ cycle.B), tuple(map(tuple, P @ cycle.M)),
                       f"{sigma}.{cycle.label}")


def pairing(cycle, kernel, n=64):
    """``int_{S^2} cycle^* kernel`` by quadrature."""
    xi, xt, xp, w = sphere_rule(n)
    M = cycle.M
    return float(np.sum(kernel(cycle(xi), xt @ M.T, xp @ M.T) * w))


def duality_matrix(n=64):
    """Pairings of ``A_{i,j}`` (rows) with ``omega_{k,l}`` (columns), both in TAGS order."""
    return np.array([[pairing(A(*t), GreenFormKernel(*k), n) for k in TAGS] for t in TAGS])


def proj_degree(k, cycle, n=64):
    """Degree of ``r o Pi_k o cycle`` where ``r(x_lo, x_hi) = (x_hi - x_lo)/|.|``.

    The remaining pair is ordered with the higher label first, so the result
    is the pairing with ``omega_{hi,lo}``.
    """
    lo, hi = [m for m in (1, 2, 3) if m != k]
    return pairing(cycle, GreenFormKernel(hi, lo), n)


# --- the quadratic relation on S^2 x S^2 -------------------------------------

def product_cycles():
    """The two test 4-cycles ``(q1, q1+xi1, q1+5 xi2)`` and ``(q1, q1+xi1, q3+xi2)``."""
    q1, _, q3 = Q
    M1 = _block(1)
    c1 = (np.concatenate([q1, q1, q1]), M1, 5.0 * _block(2))
    c2 = (np.concatenate([q1, q1, q3]), M1, _block(2))
    return c1, c2


def integrate_4form(form, cycle, n=32, chunk=256):
    """Integrate ``form(x, [V0, V1, V2, V3])`` over ``(xi1, xi2) -> base + M1 xi1 + M2 xi2``."""
    base, M1, M2 = cycle
    xi, xt, xp, w = sphere_rule(n)
    x2 = xi @ M2.T
    t2, p2 = xt @ M2.T, xp @ M2.T
    total = 0.0
    for st in range(0, len(xi), chunk):
        sl = slice(st, st + chunk)
        x1 = (xi[sl] @ M1.T)[:, None, :]
        x = base + x1 + x2[None]
        shape = x.shape
        vecs = [np.broadcast_to((xt[sl] @ M1.T)[:, None, :], shape),
                np.broadcast_to((xp[sl] @ M1.T)[:, None, :], shape),
                np.broadcast_to(t2[None], shape), np.broadcast_to(p2[None], shape)]
        vals = form(x, vecs)
        total += float(np.sum(vals * w[sl, None] * w[None, :]))
    return total


def relation_integrals(n=32):
    """Integrals of ``sum_i omega_{i,i+1} ^ omega_{i+1,i+2}`` over both test cycles."""
    return [integrate_4form(four_form_omega, c, n) for c in product_cycles()]


def relation_residual(n=32):
    """Largest absolute integral of the exact 4-form over the test cycles."""
    return max(abs(v) for v in relation_integrals(n))


def single_term_integral(n=32):
    """``int omega_{2,1} ^ omega_{3,2}`` over the first test cycle (not exact)."""
    a, b = GreenFormKernel(2, 1), GreenFormKernel(3, 2)
    return integrate_4form(lambda x, v: wedge22(a, b, x, v), product_cycles()[0], n)


# --- the Whitehead-product functional ----------------------------------------

@dataclass(frozen=True)
class HomotopyClassSym:
    """Integer combination of ``alpha_{2,1}, alpha_{3,2}, alpha_{3,1}``."""
    coeffs: tuple = (0, 0, 0)

    def __add__(self, other):
        return HomotopyClassSym(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return HomotopyClassSym(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k):
        return HomotopyClassSym(tuple(k * a for a in self.coeffs))


def alpha(i, j):
    """Class of ``A_{i,j}``; ``alpha(i, j) = -alpha(j, i)`` for ``i < j``."""
    if (i, j) in TAGS:
        v = [0, 0, 0]
        v[TAGS.index((i, j))] = 1
        return HomotopyClassSym(tuple(v))
    if (j, i) in TAGS:
        return -alpha(j, i)
    raise ValueError(f"no class alpha_{(i, j)}")


@lru_cache(maxsize=8)
def _cyclic_pairings(n):
    """Rows: A-cycles in TAGS order. Columns: omega_{1,2}, omega_{2,3}, omega_{3,1}."""
    return np.array([[pairing(A(*t), GreenFormKernel(*p), n) for p in CYCLIC_PAIRS]
                     for t in TAGS])


def sphere_integrals(cls, n=64):
    """``omega_{i,i+1}(f)`` for ``i = 1, 2, 3`` over the class ``cls``."""
    return np.asarray(cls.coeffs, dtype=float) @ _cyclic_pairings(n)


def whitehead_I(c1, c2, n=64):
    """Value of the potential-independent functional on ``[c1, c2]``.

    ``sum_i w_{i,i+1}(f1) w_{i+1,i+2}(f2) + w_{i+1,i+2}(f1) w_{i,i+1}(f2)``
    with ``w_{i,j}(f) = int_{S^2} f^* omega_{i,j}``.
    """
    w1, w2 = sphere_integrals(c1, n), sphere_integrals(c2, n)
    return float(sum(w1[i] * w2[(i + 1) % 3] + w1[(i + 1) % 3] * w2[i] for i in range(3)))


def whitehead_map(f1, f2, base):
    """Pinch-map model of ``[f1, f2]`` on ``d(D^2 x D^2)``, for inspection only.

    ``f_k`` map the closed unit disc to configurations and send its boundary
    to ``base``. The returned callable takes ``(x1, x2)`` with ``|x1| = 1`` or
    ``|x2| = 1`` and picks the factor that is not on the boundary.
    """
    def f(x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        on2 = np.isclose(np.linalg.norm(x2, axis=-1), 1.0)
        out = np.where(on2[..., None], f1(x1), f2(x2))
        return out
    f.base = base
    return f

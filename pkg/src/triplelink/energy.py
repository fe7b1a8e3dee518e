"""Ingredients of the L2-energy lower bound for flux-tube fields.

All quantities are computed in tube coordinates ``x = c(theta) + rho e``
where the volume element is ``rho (|c'| - rho <e, dT/dtheta>) drho dpsi dtheta``.

Norm conventions
----------------
The pointwise norm of ``omega_{i,j}`` is the comass of the Green kernel in
R^3 at ``x_i - x_j``, namely ``1 / (4 pi |x_i - x_j|^2)``; its L2 norm is taken
over ``T_i x T_j``. The pointwise norm of a wedge ``omega_{i,a} ^ omega_{i,b}``
is the product of the two kernel norms, and its L2 norm is taken over
``T_1 x T_2 x T_3``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import diags, csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh

from .errors import TubeError
from .forms import omega_eval
from .tubes import TWO_PI, TubeField, _orthonormal_normals, _unit_tangent, check_disjoint, tangent_derivative

FOUR_PI = 4.0 * np.pi
WEDGE_TERMS = ((1, 3, 2), (2, 1, 3), (3, 2, 1))  # (i, i-1, i+1)
PAIR_TERMS = ((1, 2), (2, 3), (3, 1))


def _jacobian(tube, theta, rho, e):
    """Tube-coordinate volume density (without the ``rho`` factor)."""
    _, sp = _unit_tangent(tube.core, theta)
    Tt = tangent_derivative(tube.core, theta)
    return sp - rho * np.sum(e * Tt, -1)


def _disc_directions(tube, theta, psi):
    T, _ = _unit_tangent(tube.core, theta)
    N1, N2 = _orthonormal_normals(T)
    return np.cos(psi)[..., None] * N1 + np.sin(psi)[..., None] * N2


def tube_energy(field, n_theta=256, n_rho=16, n_psi=32):
    """``int_T |B|^2`` by Gauss-Legendre in ``rho`` and trapezoid in ``theta, psi``."""
    tube = field.tube
    a = tube.radius
    z, w = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * a * (z + 1)
    wr = 0.5 * a * w
    th = TWO_PI * np.arange(n_theta) / n_theta
    psi = TWO_PI * np.arange(n_psi) / n_psi
    TH, PS = np.meshgrid(th, psi, indexing="ij")
    e = _disc_directions(tube, TH, PS)
    total = 0.0
    for r, wk in zip(rho, wr):
        J = _jacobian(tube, TH, r, e)
        total += wk * r * field.speed_factor(r) ** 2 * float(np.sum(J))
    return total * (TWO_PI / n_theta) * (TWO_PI / n_psi)


def energy_L2(fields, **kw):
    """Sum of the tube energies (the field vanishes outside the tubes)."""
    return float(sum(tube_energy(f, **kw) for f in fields))


def energy_closed_form(tube):
    """``9 Phi^2 L / (5 pi a^2)`` for the profile ``(1 - (rho/a)^2)^2``."""
    return 9.0 * tube.flux ** 2 * tube.core.length() / (5.0 * np.pi * tube.radius ** 2)


def r_T(tubes):
    """Smallest distance between two tubes."""
    return float(check_disjoint(tubes))


# --- Monte-Carlo norms of the Green forms ---------------------------------------

def sample_tube_uniform(tube, n, rng, batch=None):
    """``n`` points uniformly distributed in the tube (vectorized rejection)."""
    a = tube.radius
    probe = TWO_PI * np.arange(1024) / 1024
    _, sp = _unit_tangent(tube.core, probe)
    tmax = np.linalg.norm(tangent_derivative(tube.core, probe), axis=-1)
    jmax = 1.05 * float(np.max(sp + a * tmax))
    out, have = [], 0
    batch = batch or max(1024, int(1.3 * n))
    while have < n:
        th = rng.uniform(0, TWO_PI, batch)
        rho = a * np.sqrt(rng.uniform(size=batch))
        psi = rng.uniform(0, TWO_PI, batch)
        u = rng.uniform(size=batch)
        e = _disc_directions(tube, th, psi)
        J = _jacobian(tube, th, rho, e)
        keep = u * jmax < J
        pts = tube.core.eval(th[keep]) + rho[keep, None] * e[keep]
        out.append(pts)
        have += len(pts)
    return np.vstack(out)[:n]


def _kernel_norm(r):
    return 1.0 / (FOUR_PI * np.sum(r * r, -1))


def green_l2_norms(tubes, samples=10 ** 6, wedge_samples=10 ** 5, seed=7, chunk=2 ** 17):
    """Monte-Carlo L2 norms of ``omega_{i,i+1}`` and ``omega_{i,i-1} ^ omega_{i,i+1}``.

    Returns ``(norms, stderr)`` keyed by ``"w12"``-style tags for pairs and
    ``"w13^w12"``-style tags for wedge terms.
    """
    if len(tubes) != 3:
        raise ValueError("need three tubes")
    try:
        check_disjoint(tubes)
    except TubeError as exc:
        raise ValueError(f"tubes must be pairwise disjoint: {exc}") from exc
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0])))
    vols = [t.volume() for t in tubes]
    norms, errs = {}, {}

    def mean_and_se(draw, n):
        s1 = s2 = 0.0
        done = 0
        while done < n:
            m = min(chunk, n - done)
            v = draw(m)
            s1 += float(np.sum(v))
            s2 += float(np.sum(v * v))
            done += m
        mean = s1 / n
        var = max(s2 / n - mean * mean, 0.0)
        return mean, np.sqrt(var / n)

    for i, j in PAIR_TERMS:
        ti, tj = tubes[i - 1], tubes[j - 1]
        mean, se = mean_and_se(lambda m: _kernel_norm(sample_tube_uniform(ti, m, rng)
                                                      - sample_tube_uniform(tj, m, rng)) ** 2,
                               samples)
        scale = vols[i - 1] * vols[j - 1]
        norms[f"w{i}{j}"] = float(np.sqrt(scale * mean))
        errs[f"w{i}{j}"] = float(np.sqrt(scale) * se / (2 * np.sqrt(mean)))

    for i, lo, hi in WEDGE_TERMS:
        def draw(m):
            x = [sample_tube_uniform(t, m, rng) for t in tubes]
            k1 = _kernel_norm(x[i - 1] - x[lo - 1])
            k2 = _kernel_norm(x[i - 1] - x[hi - 1])
            return (k1 * k2) ** 2
        mean, se = mean_and_se(draw, wedge_samples)
        scale = float(np.prod(vols))
        tag = f"w{i}{lo}^w{i}{hi}"
        norms[tag] = float(np.sqrt(scale * mean))
        errs[tag] = float(np.sqrt(scale) * se / (2 * np.sqrt(mean)))
    return norms, errs


# --- sup of the kernel ----------------------------------------------------------

def kernel_sup(r, directions=64, radii=32, seed=0):
    """Numerical ``sup_{|x| >= r}`` of the kernel comass.

    For each sampled ``x`` the comass is attained on the plane orthogonal to
    ``x``, which is evaluated through :func:`omega_eval` together with random
    planes as a check that nothing larger appears.
    """
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(directions, 3))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    s = r * np.geomspace(1.0, 10.0, radii)
    x = (s[:, None, None] * d[None]).reshape(-1, 3)
    N1, N2 = _orthonormal_normals(x / np.linalg.norm(x, axis=-1, keepdims=True))
    best = np.abs(omega_eval(x, N1, N2))
    X = rng.normal(size=x.shape)
    X /= np.linalg.norm(X, axis=-1, keepdims=True)
    Y = rng.normal(size=x.shape)
    Y -= np.sum(Y * X, -1, keepdims=True) * X
    Y /= np.linalg.norm(Y, axis=-1, keepdims=True)
    other = np.abs(omega_eval(x, X, Y))
    return float(max(best.max(), other.max()))


def sup_kernel_law(r_list=(0.5, 1.0, 2.0, 4.0)):
    """Sups at each radius and the fitted log-log slope."""
    r = np.asarray(r_list, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    sups = np.array([kernel_sup(v) for v in r])
    slope = float(np.polyfit(np.log(r), np.log(sups), 1)[0])
    return slope, sups


# --- Neumann eigenvalue ------------------------------------------------------------

def neumann_eigenvalue(mask, h):
    """First nonzero eigenvalue of the voxel Neumann Laplacian on ``mask``.

    Faces between two interior voxels are the only couplings, so the graph
    Laplacian divided by ``h^2`` is the standard cell-centred Neumann
    discretization. The largest connected component is used.
    """
    mask = np.asarray(mask, dtype=bool)
    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(int(mask.sum()))
    rows, cols = [], []
    for ax in range(mask.ndim):
        lo = [slice(None)] * mask.ndim
        hi = [slice(None)] * mask.ndim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        a, b = idx[tuple(lo)], idx[tuple(hi)]
        both = (a >= 0) & (b >= 0)
        rows.append(a[both])
        cols.append(b[both])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    n = int(mask.sum())
    adj = csr_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    adj = adj + adj.T
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp > 1:
        keep = labels == np.argmax(np.bincount(labels))
        adj = adj[keep][:, keep]
        n = adj.shape[0]
    if n < 8:
        raise ValueError("voxel domain too small for an eigenvalue estimate")
    deg = np.asarray(adj.sum(axis=1)).ravel()
    L = (diags(deg) - adj) / h ** 2
    vals = eigsh(L.tocsc(), k=2, sigma=-1.0 / h, which="LM", return_eigenvectors=False)
    return float(np.sort(vals)[1])


def voxelize_tube(tube, h):
    """Voxel mask of cells whose centres lie in the tube, and the grid origin."""
    pts = tube.core.sample(1024)
    lo = pts.min(0) - tube.radius - h
    hi = pts.max(0) + tube.radius + h
    shape = tuple(int(np.ceil(v)) for v in (hi - lo) / h)
    axes = [lo[k] + h * (np.arange(shape[k]) + 0.5) for k in range(3)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
    # cheap prefilter by distance to dense core samples before projecting
    near = np.zeros(len(X), dtype=bool)
    for st in range(0, len(X), 2 ** 15):
        d2 = np.min(np.sum((X[st:st + 2 ** 15, None] - pts[None, ::4]) ** 2, -1), axis=1)
        near[st:st + 2 ** 15] = d2 < (tube.radius + 2 * h) ** 2
    inside = np.zeros(len(X), dtype=bool)
    inside[near] = tube.project(X[near])[2] < tube.radius
    return inside.reshape(shape), lo


def lambda1_neumann_proxy(tube, voxel_h=0.02):
    """Scalar Neumann eigenvalue of the voxelized tube (a proxy for the form Laplacian)."""
    if 2 * tube.radius / voxel_h < 8:
        raise ValueError(f"voxel size {voxel_h} resolves the tube diameter by fewer than 8 cells")
    mask, _ = voxelize_tube(tube, voxel_h)
    return neumann_eigenvalue(mask, voxel_h)


def lambda1_product(tubes, voxel_h=0.02):
    """Neumann spectra of products are sums, so the product value is the factor minimum."""
    return float(min(lambda1_neumann_proxy(t, voxel_h) for t in tubes))


# --- report -------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    E2: float
    r_T: float
    l2_norms: dict
    l2_stderr: dict
    lambda1N: float
    H123: float
    bound_without_C: float
    C: float = 1.0
    lambda1N_is_scalar_proxy: bool = True
    scaling_exponents: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def assemble_bound(H, rT, lam, norms, C=1.0):
    """``(|H| C r_T^2 sqrt(lambda) / sum of norms)^(3/2)``."""
    return float((abs(H) * C * rT ** 2 * np.sqrt(lam) / sum(norms.values())) ** 1.5)


def bound_report(tubes, H=None, mu_core=-1, seed=7, voxel_h=0.02, samples=10 ** 6,
                 wedge_samples=10 ** 5, scaling=False):
    """All ingredients and the assembled bound with ``C = 1``.

    ``H`` defaults to ``mu_core * Phi1 Phi2 Phi3``, the value for tubes
    modelled on a link with triple linking number ``mu_core``.
    """
    if H is None:
        H = mu_core * float(np.prod([t.flux for t in tubes]))
    E2 = energy_L2([TubeField(t) for t in tubes])
    rT = r_T(tubes)
    norms, errs = green_l2_norms(tubes, samples, wedge_samples, seed)
    lam = lambda1_product(tubes, voxel_h)
    expo = scaling_audit(tubes, seed=seed, voxel_h=voxel_h,
                         samples=min(samples, 10 ** 5)) if scaling else {}
    return BoundReport(E2, rT, norms, errs, lam, float(H), assemble_bound(H, rT, lam, norms),
                       scaling_exponents=expo)


def scaling_audit(tubes, lams=(1.0, 2.0), seed=7, voxel_h=0.02, samples=10 ** 5):
    """Fitted dilation exponents of ``r_T``, ``lambda_1`` and the pair norms."""
    rows = []
    for lam in lams:
        ts = [t.scaled(lam) for t in tubes]
        norms, _ = green_l2_norms(ts, samples, 1000, seed)
        rows.append((r_T(ts), lambda1_neumann_proxy(ts[0], voxel_h * lam),
                     [norms[f"w{i}{j}"] for i, j in PAIR_TERMS]))
    ll = np.log(np.asarray(lams))

    def fit(vals):
        return float(np.polyfit(ll, np.log(vals), 1)[0])

    out = {"r_T": fit([r[0] for r in rows]), "lambda1N": fit([r[1] for r in rows])}
    for k, (i, j) in enumerate(PAIR_TERMS):
        out[f"w{i}{j}"] = fit([r[2][k] for r in rows])
    return out

"""Self-check suite behind ``triplelink verify``."""

import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import confspace as cs
from .curves import Link3
from .forms import DiscreteForm, TorusGrid, d, sphere_total
from .hodge import solve_potential
from .invariants import hopf_form, hopf_integral, mu12_crossings, mu12_gauss, mu123_hopf


@dataclass
class Check:
    name: str
    passed: bool
    value: object
    tol: float
    seconds: float = 0.0

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "tol": self.tol}


def corpus_path(name):
    return resources.files("triplelink") / "data" / name


def load_corpus_link(name):
    return Link3.load(str(corpus_path(name)))


def _timed(name, tol, fn):
    t0 = time.perf_counter()
    passed, value = fn()
    return Check(name, bool(passed), value, tol, time.perf_counter() - t0)


def random_band_limited_1form(grid, rng, kmax=4):
    """Real 1-form whose components use Fourier modes up to ``kmax``."""
    comps = {}
    for a in range(grid.dim):
        spec = np.zeros(grid.shape, dtype=complex)
        sl = tuple(np.r_[0:kmax + 1, -kmax:0] for _ in range(grid.dim))
        idx = np.ix_(*sl)
        spec[idx] = rng.normal(size=spec[idx].shape) + 1j * rng.normal(size=spec[idx].shape)
        comps[(a,)] = np.real(np.fft.ifftn(spec)) * np.prod(grid.shape)
    return DiscreteForm(grid, 1, comps)


def hodge_roundtrip(n=32, seed=0):
    g = TorusGrid(3, n)
    alpha = random_band_limited_1form(g, np.random.default_rng(seed))
    beta = d(alpha)
    eta = solve_potential(beta)
    return float((d(eta) - beta).max_abs())


def harmonic_shift(link, n=32, seed=0):
    """Change of the Hopf-type integral when a constant 1-form is added to the potential."""
    beta = hopf_form(link, n)
    eta = solve_potential(beta, check=False)
    c = np.random.default_rng(seed).normal(size=3)
    h = DiscreteForm(beta.grid, 1, {(a,): np.full(beta.grid.shape, c[a]) for a in range(3)})
    return float(abs(hopf_integral(beta, eta + h) - hopf_integral(beta, eta)))


def quick_checks(n=64):
    out = []
    out.append(_timed("sphere normalization", 1e-6,
                      lambda: (abs(sphere_total(128) - 1) < 1e-6, sphere_total(128))))

    def duality():
        D = cs.duality_matrix(n)
        return np.abs(D - np.eye(3)).max() < 1e-3, D.round(6).tolist()
    out.append(_timed("duality matrix", 1e-3, duality))

    def degrees():
        P = np.array([[cs.proj_degree(k, cs.A(*t), n) for t in cs.TAGS] for k in (1, 2, 3)])
        want = np.array([[0 if k in t else 1 for t in cs.TAGS] for k in (1, 2, 3)])
        return np.abs(np.abs(P) - want).max() < 1e-3, P.round(6).tolist()
    out.append(_timed("projection degrees", 1e-3, degrees))

    def relation():
        r = cs.relation_residual(32)
        return r <= 1e-3, r
    out.append(_timed("relation residual", 1e-3, relation))

    def whitehead():
        a = cs.alpha
        vals = [cs.whitehead_I(a(1, 2), a(2, 3), n), cs.whitehead_I(a(2, 3), a(3, 1), n),
                cs.whitehead_I(a(3, 1), a(1, 2), n)]
        selfs = [cs.whitehead_I(a(*t), a(*t), n) for t in cs.TAGS]
        yb = [cs.whitehead_I(a(2, 1), a(3, 1) + a(3, 2), n),
              cs.whitehead_I(a(3, 2), a(2, 1) + a(3, 1), n)]
        ok = (max(abs(v - 1) for v in vals) < 1e-3 and max(map(abs, selfs)) < 1e-3
              and max(map(abs, yb)) < 1e-3)
        return ok, {"cyclic": vals, "self": selfs, "yang_baxter": yb}
    out.append(_timed("Whitehead identities", 1e-3, whitehead))

    def permutations():
        v1 = cs.pairing(cs.permute(cs.A(3, 2), cs.transposition(2, 3)), cs.GreenFormKernel(3, 2), n)
        v2 = cs.pairing(cs.permute(cs.A(3, 1), cs.transposition(2, 3)), cs.GreenFormKernel(2, 1), n)
        return abs(v1 + 1) < 1e-3 and abs(v2 - 1) < 1e-3, [v1, v2]
    out.append(_timed("permutation identities", 1e-3, permutations))

    def hopf_mu12():
        link = load_corpus_link("hopf.json")
        rep = mu12_gauss(*link)
        cr = mu12_crossings(*link)
        return rep.certified and rep.integer == cr and abs(cr) == 1, [rep.integer, cr]
    out.append(_timed("Hopf link mu12 agreement", 0.25, hopf_mu12))

    def borromean():
        rep = mu123_hopf(load_corpus_link("borromean.json"), ns=(32, 64))
        return rep.certified and abs(rep.integer) == 1, rep.extrapolated
    out.append(_timed("Borromean mu123", 0.25, borromean))

    def split():
        pair = load_corpus_link("split_pair.json")
        r2 = mu12_gauss(*pair)
        r3 = mu123_hopf(load_corpus_link("split_unlink3.json"), ns=(32, 48))
        return (r2.certified and r2.integer == 0 and r3.certified and r3.integer == 0,
                [r2.extrapolated, r3.extrapolated])
    out.append(_timed("split-link zeros", 0.25, split))

    def roundtrip():
        r = hodge_roundtrip()
        return r <= 1e-10, r
    out.append(_timed("Hodge round-trip", 1e-10, roundtrip))

    def harmonic():
        r = harmonic_shift(load_corpus_link("borromean.json"))
        return r <= 1e-6, r
    out.append(_timed("potential-ambiguity independence", 1e-6, harmonic))
    return out


def full_checks(n=64, samples=16, seed=7):
    from .energy import scaling_audit
    from .helicity import estimate_H123
    from .tubes import load_tubes

    out = quick_checks(n)
    tubes = load_tubes(str(corpus_path("borromean_tubes.json")))

    def helicity():
        s = estimate_H123(tubes, samples=samples, seed=seed)
        est = s.estimate[-1]
        return abs(abs(est) - 1) <= 0.1, s.to_dict()["series"]
    out.append(_timed("helicity benchmark", 0.1, helicity))

    def scaling():
        ex = scaling_audit(tubes, seed=seed, samples=20000)
        want = {"r_T": 1.0, "lambda1N": -2.0, "w12": 1.0, "w23": 1.0, "w31": 1.0}
        return all(abs(ex[k] - v) <= 0.1 * abs(v) for k, v in want.items()), ex
    out.append(_timed("energy scaling audit", 0.1, scaling))
    return out

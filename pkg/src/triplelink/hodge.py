"""Coulomb-gauge potentials for exact 2-forms on flat tori."""

from itertools import combinations

import numpy as np
import scipy.fft as sfft

from .errors import NonExactForm, NotClosed
from .forms import DiscreteForm, d

TOL_PERIOD = 1e-4
TOL_CLOSED = 1e-6


def periods(beta):
    """Integrals of ``beta`` over the coordinate 2-subtori, in index order.

    On ``T^3`` the transverse circle is averaged over, which is exact for a
    closed form and robust otherwise.
    """
    if beta.degree != 2:
        raise ValueError("periods are defined for 2-forms")
    return [float(np.mean(beta.components[key]) * (2 * np.pi) ** 2)
            for key in combinations(range(beta.grid.dim), 2)]


def closedness_residual(beta):
    """``max |d beta|`` relative to ``max |beta|`` (0 on T^2)."""
    if beta.grid.dim == 2:
        return 0.0
    scale = max(beta.max_abs(), 1e-300)
    return d(beta).max_abs() / scale


def solve_potential(beta, tol_period=TOL_PERIOD, tol_closed=TOL_CLOSED, check=True):
    """Return the Coulomb-gauge 1-form ``eta`` with ``d eta = beta``.

    Componentwise in Fourier space, ``eta_b = -i sum_a k_a beta_ab / |k|^2``;
    the zero mode and modes with ``|k| = 0`` after Nyquist removal are set to 0.

    Raises
    ------
    NonExactForm
        A coordinate period exceeds ``tol_period``.
    NotClosed
        ``d beta`` exceeds ``tol_closed`` relative to ``max |beta|``. Pass
        ``tol_closed=None`` for forms known to be closed analytically whose
        samples are not yet resolved by the grid.
    """
    if beta.degree != 2:
        raise ValueError("solve_potential needs a 2-form")
    g = beta.grid
    if check:
        for key, val in zip(combinations(range(g.dim), 2), periods(beta)):
            if abs(val) > tol_period:
                raise NonExactForm(key, val)
        if tol_closed is not None:
            res = closedness_residual(beta)
            if res > tol_closed:
                raise NotClosed(res)
    ks = g.wavenumbers(real_last=True)
    K = np.meshgrid(*ks, indexing="ij")
    K2 = sum(k * k for k in K)
    mask = K2 > 0
    inv = np.zeros_like(K2)
    inv[mask] = 1.0 / K2[mask]
    bh = {key: sfft.rfftn(v) for key, v in beta.components.items()}

    def comp(a, b):
        if a < b:
            return bh[(a, b)]
        return -bh[(b, a)]

    eta = {}
    for b in range(g.dim):
        acc = np.zeros(K2.shape, dtype=complex)
        for a in range(g.dim):
            if a != b:
                acc += K[a] * comp(a, b)
        eta[(b,)] = sfft.irfftn(-1j * acc * inv, s=g.shape)
    return DiscreteForm(g, 1, eta)


def codifferential_max(eta):
    """``max |delta eta|`` computed spectrally (gauge check)."""
    g = eta.grid
    ks = g.wavenumbers()
    K = np.meshgrid(*ks, indexing="ij")
    div = sum(1j * K[a] * np.fft.fftn(eta.components[(a,)]) for a in range(g.dim))
    return float(np.abs(np.fft.ifftn(div)).max())

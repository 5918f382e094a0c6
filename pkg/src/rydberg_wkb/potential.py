"""Effective single-electron potential, spin-orbit terms and the WKB function Q.

Every function accepts a scalar or an ndarray of radii. Energies are in Rydberg,
lengths in Bohr radii, so the Coulomb tail of ``v_eff`` is -2/r.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DomainError
from .params import Channel, ModelParams


def _positive(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be strictly positive")
    return r


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def z_eff(r, l: int, params: ModelParams):
    """Effective charge 1 + (Z-1)exp(-a1 r) - r exp(-a2 r)(a3 + a4 r)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    c = params.row(l)
    z = 1.0 + (params.Z - 1) * np.exp(-c.a1 * r) - r * np.exp(-c.a2 * r) * (c.a3 + c.a4 * r)
    return _out(z)


def dz_eff(r, l: int, params: ModelParams):
    """Closed-form radial derivative of :func:`z_eff`."""
    r = np.asarray(r, dtype=float)
    c = params.row(l)
    poly = c.a3 + 2 * c.a4 * r - c.a2 * r * (c.a3 + c.a4 * r)
    return _out(-(params.Z - 1) * c.a1 * np.exp(-c.a1 * r) - np.exp(-c.a2 * r) * poly)


def v_pol(r, l: int, params: ModelParams):
    """Core polarization term (alpha_c/2)(1 - exp(-(r/r_c)^6)) / r^4."""
    r = _positive(r)
    x6 = (r / params.r_c(l)) ** 6
    # -expm1 keeps the r -> 0 limit (alpha_c r^2 / 2 r_c^6) free of cancellation
    return _out(0.5 * params.alpha_c * -np.expm1(-x6) / r**4)


def dv_pol(r, l: int, params: ModelParams):
    r = _positive(r)
    x6 = (r / params.r_c(l)) ** 6
    return _out(0.5 * params.alpha_c * (6 * x6 * np.exp(-x6) + 4 * np.expm1(-x6)) / r**5)


def v_eff(r, l: int, params: ModelParams):
    """Spin-independent model potential -2[Z_eff/r + V_pol]."""
    r = _positive(r)
    return _out(-2.0 * (z_eff(r, l, params) / r + v_pol(r, l, params)))


def dv_eff(r, l: int, params: ModelParams):
    """Closed-form dV_eff/dr."""
    r = _positive(r)
    z = z_eff(r, l, params)
    dz = dz_eff(r, l, params)
    return _out(-2.0 * (dz / r - z / r**2 + dv_pol(r, l, params)))


def g_so(j, l: int) -> Fraction:
    """Angular factor <L.S> = [j(j+1) - l(l+1) - 3/4]/2, zero for l = 0."""
    if l == 0:
        return Fraction(0)
    jf = Fraction(j).limit_denominator(2)
    if abs(jf - l) != Fraction(1, 2):
        raise DomainError(f"j={j} is not l +- 1/2 for l={l}")
    return (jf * (jf + 1) - l * (l + 1) - Fraction(3, 4)) / 2


def v_so(r, channel: Channel, params: ModelParams):
    """Spin-orbit term alpha^2 g (1/r) dV_eff/dr (no small-r regularization)."""
    r = _positive(r)
    g = float(g_so(channel.j, channel.l))
    if g == 0.0:
        return _out(np.zeros_like(r))
    return _out(params.alpha_fs**2 * g * dv_eff(r, channel.l, params) / r)


def v_so_reg(r, channel: Channel, params: ModelParams):
    """Spin-orbit term divided by [1 - alpha^2 V_eff]^2."""
    r = _positive(r)
    denom = (1.0 - params.alpha_fs**2 * v_eff(r, channel.l, params)) ** 2
    return _out(v_so(r, channel, params) / denom)


def v_tilde(r, channel: Channel, params: ModelParams):
    """V_eff plus the regularized spin-orbit term at every radius."""
    r = _positive(r)
    if not channel.include_so:
        return v_eff(r, channel.l, params)
    return _out(v_eff(r, channel.l, params) + v_so_reg(r, channel, params))


def v_plain(r, channel: Channel, params: ModelParams):
    """V_eff plus the unregularized spin-orbit term at every radius."""
    r = _positive(r)
    if not channel.include_so:
        return v_eff(r, channel.l, params)
    return _out(v_eff(r, channel.l, params) + v_so(r, channel, params))


def v_mod(r, channel: Channel, params: ModelParams):
    """Cutoff potential: V_eff for r <= r_so(l), V_eff + V_SO beyond."""
    r = _positive(r)
    v = v_eff(r, channel.l, params)
    if not channel.include_so:
        return v
    r_so = params.cutoff(channel.l)
    so = np.where(r > r_so, v_so(r, channel, params), 0.0)
    return _out(v + so)


def centrifugal_coefficient(channel: Channel) -> float:
    """(l+1/2)^2 with the Langer shift, l(l+1) without; 0 for l = 0."""
    if channel.l == 0:
        return 0.0
    if channel.langer:
        return (channel.l + 0.5) ** 2
    return float(channel.l * (channel.l + 1))


def q_function(r, channel: Channel, E: float, params: ModelParams):
    """Q(r) = C/r^2 + V_mod(r) - E; classically allowed where Q < 0."""
    r = _positive(r)
    return _out(centrifugal_coefficient(channel) / r**2 + v_mod(r, channel, params) - E)

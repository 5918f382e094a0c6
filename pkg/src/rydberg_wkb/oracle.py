"""Numerov shooting solver for the radial equation, independent of the WKB path.

The equation -U'' + [l(l+1)/r^2 + V(r) - E] U = 0 is integrated on a uniform
grid in x = ln r with U = sqrt(r) y, which turns it into
y'' = [(l+1/2)^2 + r^2 (V - E)] y. The true l(l+1) is used; no Langer shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from . import potential as pot
from .errors import (ConfigurationError, DomainError, GridTooCoarseError, NodeCountError,
                     NormalizationError, NumericalError)
from .params import Channel, ModelParams

POTENTIALS = ("mod", "tilde")
MAX_ORACLE_N = 25


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid in ln r with ``n_points`` nodes on [r_min, r_max]."""

    r_min: float
    r_max: float
    n_points: int

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise DomainError(f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        if self.n_points < 100:
            raise DomainError("grid needs at least 100 points")

    @property
    def step(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.n_points - 1)

    def radii(self) -> np.ndarray:
        return self.r_min * np.exp(self.step * np.arange(self.n_points))

    def refined(self) -> "RadialGrid":
        return RadialGrid(self.r_min, self.r_max, 2 * self.n_points - 1)


def default_grid(n: int, r_min: float = 1e-4, step: float = 1e-3) -> RadialGrid:
    """Grid reaching well past the hydrogenic outer turning point 2n^2."""
    r_turn = 2.0 * n * n
    r_max = 2.0 * r_turn + 40.0 * n
    count = max(int(math.log(r_max / r_min) / step) + 1, 10_000)
    return RadialGrid(r_min, r_max, count)


@dataclass(frozen=True)
class OracleEigenvalue:
    E: float
    node_count: int
    matching_defect: float
    E_coarse: float | None = None

    @property
    def effective_n(self) -> float:
        return 1.0 / math.sqrt(-self.E)


def _potential(r, channel, params, kind):
    if kind == "mod":
        return pot.v_mod(r, channel, params)
    if kind == "tilde":
        return pot.v_tilde(r, channel, params)
    raise ConfigurationError(f"unknown oracle potential {kind!r}; choose from {POTENTIALS}")


class _Shooter:
    """Precomputed r^2 V on one grid; individual shots only vary E."""

    def __init__(self, channel, params, grid, kind):
        self.channel = channel
        self.grid = grid
        self.h = grid.step
        r = grid.radii()
        v = np.asarray(_potential(r, channel, params, kind), dtype=float)
        if channel.include_so and kind == "mod":
            # cell average of the step at r_so over the node whose cell contains it
            r_so = params.cutoff(channel.l)
            x_so = math.log(r_so / grid.r_min) / self.h
            k = int(round(x_so))
            if 0 < k < r.size - 1:
                beyond = min(max(k + 0.5 - x_so, 0.0), 1.0)
                v[k] = (pot.v_eff(r[k], channel.l, params)
                        + beyond * pot.v_so(r[k], channel, params))
        self.r = r
        self.r2v = r * r * v
        self.r2 = r * r
        self.lam2 = (channel.l + 0.5) ** 2
        # U ~ r^(l+1) (1 - Z r/(l+1)) near the origin
        lp1 = channel.l + 1
        u0 = r[:2] ** lp1 * (1.0 - params.Z * r[:2] / lp1)
        self.start = (u0 / np.sqrt(r[:2])).tolist()

    def g(self, E):
        return self.lam2 + self.r2v - E * self.r2

    def outward(self, gvals, stop):
        c = self.h * self.h / 12.0
        w = (1.0 - c * gvals[: stop + 1]).tolist()
        y = [0.0] * (stop + 1)
        y[0], y[1] = self.start
        nodes = 0
        for i in range(1, stop):
            yi = y[i]
            nxt = ((12.0 - 10.0 * w[i]) * yi - w[i - 1] * y[i - 1]) / w[i + 1]
            if nxt * yi < 0.0:
                nodes += 1
            y[i + 1] = nxt
            if abs(nxt) > 1e200:
                for k in range(i + 2):
                    y[k] *= 1e-200
        return y, nodes

    def inward(self, gvals, stop):
        c = self.h * self.h / 12.0
        n = gvals.size
        w = (1.0 - c * gvals[stop:]).tolist()
        m = len(w)
        y = [0.0] * m
        kappa = math.sqrt(max(gvals[-1], 1e-300))
        y[m - 1] = 1e-200
        y[m - 2] = 1e-200 * math.exp(kappa * self.h)
        nodes = 0
        for i in range(m - 2, 0, -1):
            yi = y[i]
            prv = ((12.0 - 10.0 * w[i]) * yi - w[i + 1] * y[i + 1]) / w[i - 1]
            if prv * yi < 0.0:
                nodes += 1
            y[i - 1] = prv
            if abs(prv) > 1e200:
                for k in range(i - 1, m):
                    y[k] *= 1e-200
        assert m == n - stop
        return y, nodes

    def match_index(self, gvals):
        allowed = np.nonzero(gvals < 0)[0]
        if allowed.size == 0:
            return None
        k = int(allowed[-1])
        return min(max(k, 2), gvals.size - 3)

    def shoot(self, E):
        """(log-derivative mismatch, node count, match index) at energy E."""
        gvals = self.g(E)
        m = self.match_index(gvals)
        if m is None:
            return None, 0, None
        y_out, n_out = self.outward(gvals, m + 1)
        y_in, n_in = self.inward(gvals, m - 1)
        # y_in[0] is grid index m-1
        d_out = (y_out[m + 1] - y_out[m - 1]) / (2 * self.h * y_out[m])
        d_in = (y_in[2] - y_in[0]) / (2 * self.h * y_in[1])
        nodes = (n_out - (1 if y_out[m] * y_out[m + 1] < 0 else 0)
                 + n_in - (1 if y_in[0] * y_in[1] < 0 else 0))
        return d_out - d_in, nodes, m

    def full_nodes(self, E):
        """Sturm node count on [r_min, r_cut], r_cut ~ 40 decay lengths past r+."""
        gvals = self.g(E)
        m = self.match_index(gvals)
        if m is None:
            return 0
        decay = np.cumsum(np.sqrt(np.maximum(gvals[m:], 0.0))) * self.h
        cut = m + int(np.searchsorted(decay, 40.0))
        _, nodes = self.outward(gvals, min(cut, gvals.size - 1))
        return nodes

    def energy_floor(self):
        """Minimum of V + l(l+1)/r^2 on the grid; no level lies below it."""
        return float(np.min((self.r2v + self.lam2 - 0.25) / self.r2))

    def profile(self, E):
        gvals = self.g(E)
        m = self.match_index(gvals)
        if m is None:
            raise NumericalError(f"no classically allowed region at E={E}")
        y_out, _ = self.outward(gvals, m)
        y_in, _ = self.inward(gvals, m)
        scale = y_out[m] / y_in[0]
        y = np.array(y_out[:m] + [v * scale for v in y_in])
        return self.r, np.sqrt(self.r) * y


def _solve_on_grid(n_r, channel, params, grid, kind):
    sh = _Shooter(channel, params, grid, kind)
    n = n_r + channel.l + 1

    # Sturm count on the full grid: the n_r-th level is where it steps n_r -> n_r + 1
    def count(x):
        return sh.full_nodes(-1.0 / x**2)

    x_lo, x_hi = 1.0 / math.sqrt(-min(sh.energy_floor(), -1e-300)), n + 1.0
    if count(x_hi) <= n_r:
        x_hi = n + 5.0
        if count(x_hi) <= n_r:
            raise NodeCountError(f"fewer than {n_r + 1} levels below x={x_hi} for {channel.label}")
    if count(x_lo) > n_r:
        raise NodeCountError(f"more than {n_r} nodes already at x={x_lo}")
    while x_hi - x_lo > 1e-6 * x_hi:
        mid = 0.5 * (x_lo + x_hi)
        if count(mid) > n_r:
            x_hi = mid
        else:
            x_lo = mid

    def mismatch(x):
        d, _, _ = sh.shoot(-1.0 / x**2)
        return d

    a, b = x_lo - 1e-6 * x_hi, x_hi + 1e-6 * x_hi
    fa, fb = mismatch(a), mismatch(b)
    if fa is None or fb is None or fa * fb > 0:
        # fall back to the Dirichlet condition at r_max
        def tail(x):
            gv = sh.g(-1.0 / x**2)
            y, _ = sh.outward(gv, gv.size - 1)
            return y[-1]
        x = brentq(tail, x_lo, x_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    else:
        x = brentq(mismatch, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    E = -1.0 / x**2
    defect, nodes, _ = sh.shoot(E)
    if nodes != n_r:
        raise NodeCountError(f"solution at E={E} has {nodes} nodes, expected {n_r}")
    return E, nodes, abs(defect) if defect is not None else float("nan")


def oracle_eigenvalue(n_r: int, channel: Channel, params: ModelParams,
                      grid: RadialGrid | None = None, potential: str = "mod",
                      rtol: float = 1e-9, check: bool = True) -> OracleEigenvalue:
    """Shooting eigenvalue with ``n_r`` radial nodes.

    With ``check`` the grid is refined once; the refined value is returned and
    GridTooCoarseError is raised when the two differ by more than ``rtol``.
    """
    if n_r < 0:
        raise DomainError(f"n_r must be >= 0, got {n_r}")
    n = n_r + channel.l + 1
    if grid is None:
        grid = default_grid(n)
    if grid.r_max < 4.0 * n * n:
        raise DomainError(f"r_max={grid.r_max} below twice the outer turning point for n={n}")
    E1, nodes, defect = _solve_on_grid(n_r, channel, params, grid, potential)
    if not check:
        return OracleEigenvalue(E1, nodes, defect)
    E2, nodes, defect = _solve_on_grid(n_r, channel, params, grid.refined(), potential)
    if abs(E2 - E1) > rtol * abs(E2):
        raise GridTooCoarseError(
            f"halving the step moved E from {E1!r} to {E2!r} (rel {abs(E2 - E1) / abs(E2):.2g})"
        )
    return OracleEigenvalue(E2, nodes, defect, E_coarse=E1)


def oracle_level(n: int, channel: Channel, params: ModelParams, **kwargs) -> OracleEigenvalue:
    return oracle_eigenvalue(n - channel.l - 1, channel, params, **kwargs)


def count_nodes(u: np.ndarray, rel_floor: float = 1e-8) -> int:
    """Sign changes of ``u`` ignoring samples below rel_floor * max|u|."""
    big = u[np.abs(u) > rel_floor * np.max(np.abs(u))]
    return int(np.count_nonzero(np.signbit(big[1:]) != np.signbit(big[:-1])))


def wavefunction_profile(E: float, channel: Channel, params: ModelParams,
                         grid: RadialGrid | None = None, potential: str = "mod",
                         tail_tol: float = 1e-4, match_tol: float = 1e-5):
    """Normalized U(r) on the grid (trapezoid norm in r).

    The outward solution is spliced to the decaying inward one at the last
    classically allowed node. Away from an eigenvalue the two log-derivatives
    disagree there, which means the outward solution would blow up at r_max;
    that raises NormalizationError.
    """
    if grid is None:
        grid = default_grid(max(int(round(1.0 / math.sqrt(-E))) + 1, 2))
    sh = _Shooter(channel, params, grid, potential)
    mismatch, _, m = sh.shoot(E)
    if mismatch is None:
        raise NormalizationError(f"no classically allowed region at E={E}")
    scale = 1.0 + abs(sh.g(E)[m]) ** 0.5
    if abs(mismatch) > match_tol * scale:
        raise NormalizationError(
            f"log-derivative mismatch {mismatch:.3g} at r={sh.r[m]:.6g}: "
            f"E={E!r} is not an eigenvalue, the outward solution grows at r_max"
        )
    r, u = sh.profile(E)
    peak = np.max(np.abs(u))
    if np.abs(u[-1]) > tail_tol * peak or not np.all(np.isfinite(u)):
        raise NormalizationError(f"U(r_max)/max|U| = {abs(u[-1]) / peak:.3g}; not a bound state")
    u = u / math.sqrt(trapezoid(u * u, r))
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    return r, u

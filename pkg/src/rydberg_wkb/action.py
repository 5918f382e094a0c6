"""Classical turning points and the WKB action integral nu(j, l, E)."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import potential as pot
from .errors import DomainError, NoBoundRegionError, NumericalError, ToleranceNotMetError
from .params import Channel, ModelParams
from .quadrature import integrate

DEFAULT_TOL = 1e-9
_QUAD_EPSABS = 1e-12
_R_FLOOR = 1e-7
_SCAN_POINTS = 2000


@dataclass(frozen=True)
class TurningPoints:
    r_minus: float | None
    r_plus: float
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class ActionEvaluation:
    nu: float
    E: float
    channel: Channel
    turning_points: TurningPoints
    abs_err_estimate: float

    @property
    def inv_sqrt_neg_E(self) -> float:
        return 1.0 / math.sqrt(-self.E)


def _root(f, a, b):
    return brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def turning_points(channel: Channel, E: float, params: ModelParams) -> TurningPoints:
    """Boundaries of the classically allowed region that reaches out to r+.

    For l = 0 there is no inner root (r_minus is None; integrate from 0).
    """
    if not E < 0:
        raise NoBoundRegionError(f"bound states need E < 0, got E={E}")

    def q(r):
        return pot.q_function(r, channel, E, params)

    c = pot.centrifugal_coefficient(channel)
    disc = 1.0 + c * E
    seed = (1.0 + math.sqrt(disc)) / -E if disc > 0 else 1.0 / -E

    hi = seed
    while q(hi) <= 0:
        hi *= 2.0
    lo = 0.5 * seed
    while q(lo) >= 0:
        lo *= 0.5
        if lo < _R_FLOOR:
            raise NoBoundRegionError(
                f"Q >= 0 everywhere for {channel.label} at E={E}: no classically allowed region"
            )
    r_plus = _root(q, lo, hi)

    if channel.l == 0:
        return TurningPoints(None, r_plus, (abs(q(r_plus)),))

    grid = np.geomspace(_R_FLOOR, r_plus, _SCAN_POINTS)[:-1]
    forbidden = np.nonzero(q(grid) >= 0)[0]
    if forbidden.size == 0:
        raise NumericalError(f"no inner turning point above r={_R_FLOOR} for {channel.label}")
    k = forbidden[-1]
    if k == grid.size - 1:
        raise NoBoundRegionError(f"allowed region below r+ too thin for {channel.label} at E={E}")
    r_minus = _root(q, grid[k], grid[k + 1])
    return TurningPoints(r_minus, r_plus, (abs(q(r_minus)), abs(q(r_plus))))


def _edges(channel: Channel, params: ModelParams, tp: TurningPoints) -> list[float]:
    """Panel edges: turning points, r_so and r_c when inside, then factors of 4."""
    lo = tp.r_minus if tp.r_minus is not None else 0.0
    hi = tp.r_plus
    marks = [params.r_c(channel.l)]
    if channel.include_so:
        marks.append(params.cutoff(channel.l))
    edges = [lo] + sorted(x for x in marks if lo < x < hi)
    x = 4.0 * edges[-1] if edges[-1] > 0 else hi / 64
    while x < 0.5 * hi:
        edges.append(x)
        x *= 4.0
    edges.append(0.5 * hi if 0.5 * hi > edges[-1] else 0.5 * (edges[-1] + hi))
    edges.append(hi)
    return edges


def action_integral(channel: Channel, E: float, params: ModelParams,
                    tol: float = DEFAULT_TOL) -> ActionEvaluation:
    """nu = (1/pi) * integral of sqrt(-Q) between the turning points.

    The end panels use r = r_minus + u^2 and r = r_plus - u^2 (r = u^2 for
    l = 0), which turn the square-root endpoints into smooth integrands.
    """
    tp = turning_points(channel, E, params)
    edges = _edges(channel, params, tp)
    lo, hi = edges[0], edges[-1]

    def momentum(r):
        return np.sqrt(np.maximum(-pot.q_function(r, channel, E, params), 0.0))

    def inner(u):
        return 2.0 * u * momentum(lo + u * u)

    def outer(u):
        return 2.0 * u * momentum(hi - u * u)

    first = integrate(inner, [0.0, math.sqrt(edges[1] - lo)], epsabs=_QUAD_EPSABS / 4)
    last = integrate(outer, [0.0, math.sqrt(hi - edges[-2])], epsabs=_QUAD_EPSABS / 4)
    parts = [first, last]
    if len(edges) > 3:
        parts.append(integrate(momentum, edges[1:-1], epsabs=_QUAD_EPSABS / 2))
    value = sum(p.value for p in parts) / math.pi
    err = sum(p.abs_err for p in parts) / math.pi
    if err > tol or not all(p.converged for p in parts):
        raise ToleranceNotMetError(
            f"action quadrature for {channel.label} at E={E} reached error {err:.3g} > {tol:.3g}",
            achieved=err,
        )
    return ActionEvaluation(value, E, channel, tp, err)


def born_contour_integral(A: float, B: float, C: float, D: float) -> float:
    """(1/2pi) loop integral of sqrt(-A + 2B/r - C/r^2 + D/r^3), first order in D."""
    if not (A > 0 and B > 0 and C > 0):
        raise DomainError(f"need A, B, C > 0, got A={A}, B={B}, C={C}")
    if abs(D) >= C / 10:
        warnings.warn(f"|D|={abs(D)} not small against C={C}; first-order result", stacklevel=2)
    return B / math.sqrt(A) - math.sqrt(C) + B * D / (2 * C * math.sqrt(C))


def coulomb_so_coefficient(channel: Channel, params: ModelParams) -> float:
    """Coefficient D of 1/r^3 in -Q for a pure Coulomb tail with spin-orbit on."""
    if not channel.include_so:
        return 0.0
    return -2.0 * params.alpha_fs**2 * float(pot.g_so(channel.j, channel.l))


def coulomb_action(channel: Channel, E: float, params: ModelParams,
                   include_so: bool | None = None) -> float:
    """Closed-form action of the hydrogenic problem with the channel's toggles.

    ``include_so=False`` drops the spin-orbit 1/r^3 term even when the channel
    has it enabled.
    """
    if not E < 0:
        raise DomainError(f"E must be negative, got {E}")
    if channel.l == 0:
        return 1.0 / math.sqrt(-E)
    use_so = channel.include_so if include_so is None else include_so and channel.include_so
    d = coulomb_so_coefficient(channel, params) if use_so else 0.0
    return born_contour_integral(-E, 1.0, pot.centrifugal_coefficient(channel), d)


@dataclass(frozen=True)
class ActionScan:
    evaluations: list[ActionEvaluation]
    slope: float
    intercept: float
    max_residual: float


def _evaluate(args):
    channel, E, params, tol = args
    try:
        return action_integral(channel, E, params, tol)
    except NumericalError as exc:
        raise type(exc)(f"E={E!r}: {exc}") from exc


def action_scan(channel: Channel, energies: Sequence[float], params: ModelParams,
                tol: float = DEFAULT_TOL, workers: int | None = None) -> ActionScan:
    """Evaluate nu over ``energies`` and fit nu = slope / sqrt(-E) + intercept.

    Output order follows the input order; ``workers > 1`` evaluates points in
    separate processes.
    """
    jobs = [(channel, float(E), params, tol) for E in energies]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            evals = list(pool.map(_evaluate, jobs))
    else:
        evals = [_evaluate(job) for job in jobs]
    x = np.array([e.inv_sqrt_neg_E for e in evals])
    y = np.array([e.nu for e in evals])
    if len(evals) >= 2:
        slope, intercept = np.polyfit(x, y, 1)
        resid = float(np.max(np.abs(y - (slope * x + intercept))))
    else:
        slope, intercept, resid = float("nan"), float("nan"), float("nan")
    return ActionScan(evals, float(slope), float(intercept), resid)


SCAN_COLUMNS = ("inv_sqrt_neg_E", "nu", "abs_err", "r_minus", "r_plus")


def write_scan_csv(scan: ActionScan, stream, header: bool = True) -> None:
    if header:
        stream.write(f"# slope={scan.slope!r} intercept={scan.intercept!r} "
                     f"max_residual={scan.max_residual!r}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for ev in scan.evaluations:
        tp = ev.turning_points
        writer.writerow([repr(ev.inv_sqrt_neg_E), repr(ev.nu), repr(ev.abs_err_estimate),
                         "" if tp.r_minus is None else repr(tp.r_minus), repr(tp.r_plus)])

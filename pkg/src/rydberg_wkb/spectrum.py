"""WKB eigenvalues, quantum defects, fine splittings and unit conversion."""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import constants
from scipy.optimize import brentq

from .action import DEFAULT_TOL, action_integral, coulomb_action
from .errors import DomainError, NoBoundRegionError, NoRootError, NumericalError
from .params import Channel, ModelParams, channels_for

RYDBERG_MHZ = constants.value("Rydberg constant times c in Hz") / 1e6
RB87_MASS_U = 86.909180531
ELECTRON_MASS_U = constants.value("electron mass in u")

DEFECT_SAMPLES = (40.0, 60.0, 80.0, 100.0)
RESIDUAL_TOL = 1e-10
SPREAD_WARN = 1e-5


def to_mhz(energy, reduced_mass: bool = False):
    """Rydberg-unit energy to MHz, optionally with the 87Rb reduced-mass factor."""
    factor = RYDBERG_MHZ
    if reduced_mass:
        factor /= 1.0 + ELECTRON_MASS_U / RB87_MASS_U
    return energy * factor


def energy_from_defect(n: float, delta: float) -> float:
    """E = -1/(n - delta)^2."""
    if n <= delta:
        raise DomainError(f"n={n} must exceed the defect {delta}")
    return -1.0 / (n - delta) ** 2


def quantization_target(n_r: int, l: int) -> float:
    return n_r + 1.0 if l == 0 else n_r + 0.5


@dataclass(frozen=True)
class SpectralResult:
    n: int
    n_r: int
    channel: Channel
    E: float
    defect_effective: float
    quantization_residual: float


@dataclass(frozen=True)
class DefectResult:
    channel: Channel
    Delta: float
    delta_l: float
    eta: float
    extrapolation_spread: float


def solve_eigenvalue(n_r: int, channel: Channel, params: ModelParams,
                     tol: float = DEFAULT_TOL) -> SpectralResult:
    """Energy where nu(j, l, E) meets the patching target for ``n_r`` nodes.

    The root is sought in x = 1/sqrt(-E), where nu is close to x + const.
    """
    if n_r < 0:
        raise DomainError(f"n_r must be >= 0, got {n_r}")
    l = channel.l
    n = n_r + l + 1
    target = quantization_target(n_r, l)

    def mismatch(x):
        try:
            return action_integral(channel, -1.0 / x**2, params, tol).nu - target
        except NoBoundRegionError:
            # below the potential floor nu is effectively zero
            return -target

    x0 = float(n)
    guess = x0 - mismatch(x0)
    if not guess > 0:
        guess = 0.5 * x0
    width = 0.02
    lo, hi = max(guess - width, 1e-3), guess + width
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    for _ in range(60):
        if f_lo < 0 < f_hi:
            break
        width *= 2.0
        if f_lo >= 0:
            lo = max(lo - width, 0.5 * lo)
            f_lo = mismatch(lo)
        if f_hi <= 0:
            hi += width
            f_hi = mismatch(hi)
    else:
        raise NoRootError(
            f"cannot bracket nu = {target} for {channel.label}: "
            f"nu - target ranges over [{f_lo:.6g}, {f_hi:.6g}] on x in [{lo:.6g}, {hi:.6g}]"
        )
    x = brentq(mismatch, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    E = -1.0 / x**2
    residual = abs(mismatch(x))
    if residual > RESIDUAL_TOL:
        raise NumericalError(f"quantization residual {residual:.3g} for {channel.label}, n={n}")
    return SpectralResult(n, n_r, channel, E, n - x, residual)


def solve_level(n: int, channel: Channel, params: ModelParams,
                tol: float = DEFAULT_TOL) -> SpectralResult:
    """:func:`solve_eigenvalue` addressed by principal quantum number."""
    n_r = n - channel.l - 1
    if n_r < 0:
        raise DomainError(f"n={n} too small for l={channel.l}")
    return solve_eigenvalue(n_r, channel, params, tol)


def _defect_limit(channel, params, samples, subtract_coulomb_so, tol):
    x = np.asarray(samples, dtype=float)
    E = -1.0 / x**2
    d = np.array([
        action_integral(channel, e, params, tol).nu
        - coulomb_action(channel, e, params, include_so=subtract_coulomb_so)
        for e in E
    ])
    slope, intercept = np.polyfit(E, d, 1)
    spread = float(np.max(np.abs(d - (slope * E + intercept))))
    return float(intercept), spread


@lru_cache(maxsize=256)
def _quantum_defect(channel, params, samples, subtract_coulomb_so, tol):
    delta, spread = _defect_limit(channel, params, samples, subtract_coulomb_so, tol)
    if channel.include_so and params.alpha_fs != 0:
        delta_l, _ = _defect_limit(channel, params.with_(alpha_fs=0.0), samples,
                                   subtract_coulomb_so, tol)
    else:
        delta_l = delta
    return DefectResult(channel, delta, delta_l, delta - delta_l, spread)


def quantum_defect(channel: Channel, params: ModelParams,
                   samples: Sequence[float] = DEFECT_SAMPLES,
                   subtract_coulomb_so: bool = False,
                   tol: float = DEFAULT_TOL) -> DefectResult:
    """Limit of nu - nu_Coulomb as E -> 0-, by a linear fit in E.

    ``samples`` are the values of 1/sqrt(-E) used for the fit. By default the
    subtracted Coulomb action carries no spin-orbit term, so that
    E = -1/(n - Delta)^2 holds for the solved levels; ``subtract_coulomb_so``
    also removes the hydrogenic 1/r^3 contribution.
    """
    result = _quantum_defect(channel, params, tuple(float(s) for s in samples),
                             bool(subtract_coulomb_so), tol)
    if result.extrapolation_spread >= SPREAD_WARN:
        warnings.warn(
            f"defect extrapolation spread {result.extrapolation_spread:.3g} for {channel.label}",
            stacklevel=2,
        )
    return result


def _fine_channels(l: int, langer: bool, include_so: bool = True) -> list[Channel]:
    if l < 1:
        raise DomainError(f"fine splitting needs l >= 1, got l={l}")
    return channels_for(l, include_so=include_so, langer=langer)


def fine_splitting_direct(n: int, l: int, params: ModelParams, langer: bool = True,
                          reduced_mass: bool = False, tol: float = DEFAULT_TOL,
                          include_so: bool = True) -> float:
    """E(j=l+1/2) - E(j=l-1/2) in MHz from two solved WKB levels."""
    lower, upper = _fine_channels(l, langer, include_so)
    e_lo = solve_level(n, lower, params, tol).E
    e_hi = solve_level(n, upper, params, tol).E
    return to_mhz(e_hi - e_lo, reduced_mass)


def fine_splitting_leading(n: int, l: int, params: ModelParams, langer: bool = True,
                           reduced_mass: bool = False, tol: float = DEFAULT_TOL,
                           include_so: bool = True) -> float:
    """Leading order in alpha^2: 2(eta_lower - eta_upper)/(n - delta_l)^3, in MHz."""
    lower, upper = _fine_channels(l, langer, include_so)
    d_lo = quantum_defect(lower, params, tol=tol)
    d_hi = quantum_defect(upper, params, tol=tol)
    delta_l = d_lo.delta_l
    return to_mhz(2.0 * (d_lo.eta - d_hi.eta) / (n - delta_l) ** 3, reduced_mass)


def _solve_job(args):
    n, channel, params, tol = args
    return solve_level(n, channel, params, tol)


def spectrum_batch(requests: Iterable[tuple[int, Channel]], params: ModelParams,
                   tol: float = DEFAULT_TOL, workers: int | None = None) -> list[SpectralResult]:
    """Solve many (n, channel) levels; results keep the request order."""
    jobs = [(n, ch, params, tol) for n, ch in requests]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_job, jobs))
    return [_solve_job(job) for job in jobs]


SPECTRUM_COLUMNS = ("n", "l", "j", "E_ry", "E_mhz", "defect", "residual")


def spectrum_rows(results: Iterable[SpectralResult], reduced_mass: bool = False) -> list[dict]:
    return [
        {"n": r.n, "l": r.channel.l, "j": r.channel.j, "E_ry": r.E,
         "E_mhz": to_mhz(r.E, reduced_mass), "defect": r.defect_effective,
         "residual": r.quantization_residual}
        for r in results
    ]


def write_rows(rows: list[dict], columns: Sequence[str], stream, fmt: str = "csv") -> None:
    """Deterministic CSV (repr floats) or JSON output of report rows."""
    if fmt == "json":
        json.dump([{c: row.get(c) for c in columns} for row in rows], stream, indent=2)
        stream.write("\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row.get(c) is None else
                         repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in columns])


def scaled_splitting(n: int, l: int, splitting_mhz: float, delta_l: float) -> float:
    """Splitting times (n - delta_l)^3, constant at leading order."""
    return splitting_mhz * (n - delta_l) ** 3


def effective_n(E: float) -> float:
    return 1.0 / math.sqrt(-E)

"""Self-consistency checks bundled into the table-reproduction report.

Each check returns a :class:`CheckResult` holding the worst observed
deviation and the bound it is held to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import action_integral, action_scan, born_contour_integral, coulomb_action
from .params import Channel, ModelParams, channels_for
from . import potential as pot
from .spectrum import fine_splitting_direct, fine_splitting_leading, quantum_defect


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    bound: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.worst < self.bound)


def coulomb_closure(alpha_fs: float = 1 / 137.036, ns=range(5, 81), ls=range(4),
                    tol: float = 1e-9) -> CheckResult:
    """Quadrature action against the closed forms for the hydrogen override."""
    params = ModelParams.pure_coulomb(alpha_fs=alpha_fs)
    worst, where = 0.0, ""
    for l in ls:
        for so in ((False,) if l == 0 else (False, True)):
            for ch in channels_for(l, include_so=so):
                d = -2.0 * alpha_fs**2 * float(pot.g_so(ch.j, l)) if ch.include_so else 0.0
                for n in ns:
                    E = -1.0 / n**2
                    nu = action_integral(ch, E, params, tol).nu
                    refs = [coulomb_action(ch, E, params)]
                    if l > 0:
                        refs.append(born_contour_integral(-E, 1.0, (l + 0.5) ** 2, d))
                    dev = max(abs(nu - r) for r in refs)
                    if dev > worst:
                        worst, where = dev, f"{ch.label} so={so} n={n}"
    return CheckResult("coulomb closure", worst, 1e-9, where)


def linearity(params: ModelParams, channels=None, x_range=(20.0, 80.0), points: int = 31,
              tol: float = 1e-9) -> list[CheckResult]:
    """Slope of nu against 1/sqrt(-E) and the residual of the straight-line fit."""
    if channels is None:
        channels = [ch for l in (0, 1, 2) for ch in channels_for(l)]
    x = np.linspace(*x_range, points)
    out = []
    for ch in channels:
        scan = action_scan(ch, -1.0 / x**2, params, tol)
        out.append(CheckResult(f"slope {ch.label}", abs(scan.slope - 1.0), 1e-4,
                               f"slope={scan.slope:.8f}"))
        out.append(CheckResult(f"fit residual {ch.label}", scan.max_residual, 1e-4))
    return out


def leading_vs_direct(params: ModelParams, ns=(20, 30, 40, 50, 60), ls=(1, 2),
                      tol: float = 1e-9) -> CheckResult:
    worst, where = 0.0, ""
    for l in ls:
        for n in ns:
            direct = fine_splitting_direct(n, l, params, tol=tol)
            lead = fine_splitting_leading(n, l, params, tol=tol)
            dev = abs(lead - direct) / abs(direct)
            if dev > worst:
                worst, where = dev, f"n={n} l={l}"
    return CheckResult("leading vs direct splitting", worst, 1e-3, where)


def scaling_constancy(params: ModelParams, ns=(30, 35, 40, 45, 50, 55, 60), ls=(1, 2),
                      tol: float = 1e-9) -> list[CheckResult]:
    """Spread of splitting * (n - delta_l)^3 relative to its mean."""
    out = []
    for l in ls:
        delta_l = quantum_defect(Channel(l, l - 0.5), params, tol=tol).delta_l
        vals = np.array([fine_splitting_direct(n, l, params, tol=tol) * (n - delta_l) ** 3
                         for n in ns])
        spread = float((vals.max() - vals.min()) / abs(vals.mean()))
        out.append(CheckResult(f"(n-delta)^3 scaling l={l}", spread, 5e-3))
    return out

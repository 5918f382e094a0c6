"""Command-line entry point ``rydberg-wkb``.

Exit codes:

    0  success
    1  at least one compared value is outside its tolerance
    2  invalid command-line usage
    3  configuration, parameter-file or I/O error
    4  numerical failure (no root, tolerance not reached, ...)
    5  problem size or runtime budget exceeded (partial report written)
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import checks
from .action import SCAN_COLUMNS, action_scan, turning_points, write_scan_csv
from .errors import BudgetExceededError, ConfigurationError, NumericalError, ParameterError
from .oracle import MAX_ORACLE_N, POTENTIALS, oracle_level
from .params import Channel, ModelParams, channels_for, load_params
from .references import (REPORT_COLUMNS, TARGET_SOURCE, ComparisonReport, compare,
                         load_references, select)
from .spectrum import (SPECTRUM_COLUMNS, energy_from_defect, fine_splitting_direct,
                       fine_splitting_leading, quantum_defect, solve_level, spectrum_batch,
                       spectrum_rows, write_rows)
from . import potential as pot

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BUDGET = 0, 1, 2, 3, 4, 5

ORACLE_TOLERANCE = 2e-3


class _Partial(Exception):
    """Raised after a partial report has already been written."""


# ---------------------------------------------------------------- arguments

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _scale(text: str) -> tuple[int, float]:
    key, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return int(key), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected l=<value>, got {text!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model options")
    g.add_argument("--params", help="parameter file (default: shipped 87Rb set)")
    g.add_argument("--refs", help="reference-value file (default: shipped table)")
    g.add_argument("--alpha-fs", type=float, help="fine-structure constant (0 disables fine structure)")
    g.add_argument("--no-langer", action="store_true", help="use l(l+1) instead of (l+1/2)^2")
    g.add_argument("--no-so", action="store_true", help="drop the spin-orbit term")
    g.add_argument("--a3-scale", type=_scale, action="append", default=[], metavar="L=V",
                   help="override the a3 multiplier for one l (repeatable)")
    g.add_argument("--reduced-mass", action="store_true", help="apply the 87Rb reduced-mass factor")
    g.add_argument("--tol", type=float, default=1e-9, help="action quadrature tolerance")
    g = p.add_argument_group("output")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--format", choices=("csv", "json", "text"), help="output format")
    g.add_argument("--all-sources", action="store_true",
                   help="list every reference source, not just the one that is checked")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="rydberg-wkb",
        description="WKB quantum defects and fine structure of Rb Rydberg states.",
        epilog="exit codes: 0 ok, 1 tolerance failure, 3 config/IO, 4 numeric, 5 budget",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("defects", parents=[common], help="quantum defects against the defect table")
    p.add_argument("--l", type=_int_list, default=[0, 1, 2], help="orbital momenta (default 0,1,2)")
    p.set_defaults(func=cmd_defects)

    p = sub.add_parser("fine-splitting", parents=[common], help="fine splittings in MHz")
    p.add_argument("--l", type=int, default=1, choices=(1, 2))
    p.add_argument("--n", type=_int_list, help="principal quantum numbers (default: tabulated)")
    p.set_defaults(func=cmd_fine_splitting)

    p = sub.add_parser("action-scan", parents=[common], help="nu against 1/sqrt(-E)")
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--j", type=float, help="total angular momentum (default l+1/2)")
    p.add_argument("--x-min", type=float, default=20.0)
    p.add_argument("--x-max", type=float, default=80.0)
    p.add_argument("--points", type=int, default=61)
    p.set_defaults(func=cmd_action_scan)

    p = sub.add_parser("momentum-profile", parents=[common], help="sqrt(-Q) at an eigenvalue")
    p.add_argument("--l", type=_int_list, default=[0, 1, 2])
    p.add_argument("--n", type=int, default=57)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--r-max-over-rc", type=float,
                   help="stop the profile at this multiple of r_c (default: outer turning point)")
    p.set_defaults(func=cmd_momentum_profile)

    p = sub.add_parser("oracle-check", parents=[common], help="WKB against Numerov shooting")
    p.add_argument("--n", type=_int_list, default=[15])
    p.add_argument("--l", type=_int_list, default=[0, 1, 2])
    p.add_argument("--pure-coulomb", action="store_true", help="use the hydrogen override")
    p.add_argument("--potential", choices=POTENTIALS, default="mod")
    p.add_argument("--budget", type=float, default=600.0, help="wall-clock budget in seconds")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("reproduce-tables", parents=[common],
                       help="recompute every tabulated value and bundled check")
    p.add_argument("--with-oracle", action="store_true", help="include the Numerov cross-check")
    p.add_argument("--skip-checks", action="store_true", help="table rows only")
    p.set_defaults(func=cmd_reproduce_tables)

    p = sub.add_parser("spectrum", parents=[common], help="WKB levels for a range of n")
    p.add_argument("--l", type=_int_list, default=[0, 1, 2])
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_spectrum)
    return parser


# ---------------------------------------------------------------- helpers

def model_params(args) -> ModelParams:
    params = load_params(args.params)
    changes = {}
    if args.alpha_fs is not None:
        changes["alpha_fs"] = args.alpha_fs
    if args.a3_scale:
        changes["a3_scale"] = dict(args.a3_scale)
    return params.with_(**changes) if changes else params


def model_channels(l: int, args) -> list[Channel]:
    # every l >= 1 gets spin-orbit unless disabled, so a missing cutoff is reported
    return channels_for(l, include_so=l > 0 and not args.no_so, langer=not args.no_langer)


@contextmanager
def _output(args):
    if args.out is None:
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
        return
    buf = io.StringIO()
    yield buf
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise ParameterError(f"cannot write {args.out}: {exc}") from exc


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_text(rows: list[dict], columns, stream) -> None:
    """Aligned plain-text table."""
    cells = [[str(c) for c in columns]] + [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    for row in cells:
        stream.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def emit(rows: list[dict], columns, stream, fmt: str) -> None:
    if fmt == "text":
        write_text(rows, columns, stream)
    else:
        write_rows(rows, columns, stream, fmt)


def _sources(args):
    return None if args.all_sources else {TARGET_SOURCE}


def _report_status(report: ComparisonReport) -> int:
    return EXIT_OK if report.ok else EXIT_TOLERANCE


# ---------------------------------------------------------------- commands

def defect_values(ls, args, params) -> tuple[dict, list[dict]]:
    """Computed defects keyed by (observable, l, j) plus plain result rows."""
    values, rows = {}, []
    for l in ls:
        results = [quantum_defect(ch, params, tol=args.tol) for ch in model_channels(l, args)]
        for res in results:
            values[("defect", l, res.channel.j)] = res.Delta
            rows.append({"l": l, "j": res.channel.j, "Delta": res.Delta, "delta_l": res.delta_l,
                         "eta": res.eta, "spread": res.extrapolation_spread})
        if len(results) == 2:
            values[("defect-difference", l, None)] = results[0].Delta - results[1].Delta
    return values, rows


def _rekey(records, values):
    """Defects do not depend on n: attach each record's n to the computed value."""
    return {rec.key: values[(rec.observable, rec.l, rec.j)]
            for rec in records if (rec.observable, rec.l, rec.j) in values}


def cmd_defects(args) -> int:
    params = model_params(args)
    values, plain = defect_values(args.l, args, params)
    refs = select(load_references(args.refs), observables={"defect", "defect-difference"},
                  ls=set(args.l), sources=_sources(args))
    report = compare(_rekey(refs, values), refs)
    referenced = {(r.observable, r.l, r.j) for r in refs}
    rows = report.as_dicts()
    for key, value in values.items():
        if key not in referenced:
            obs, l, j = key
            rows.append({"observable": obs, "l": l, "j": j, "computed": value,
                         "status": "no-reference"})
    with _output(args) as out:
        emit(rows, REPORT_COLUMNS, out, args.format or "csv")
    return _report_status(report)


FINE_COLUMNS = ("n", "l", "direct_mhz", "leading_mhz", "reference_mhz", "source",
                "rel_dev", "tolerance", "status")


def fine_splitting_values(l, ns, args, params) -> dict[int, tuple[float, float]]:
    kw = dict(langer=not args.no_langer, reduced_mass=args.reduced_mass, tol=args.tol,
              include_so=not args.no_so)
    return {n: (fine_splitting_direct(n, l, params, **kw), fine_splitting_leading(n, l, params, **kw))
            for n in ns}


def cmd_fine_splitting(args) -> int:
    params = model_params(args)
    refs_all = select(load_references(args.refs), observables={"fine-splitting"}, ls={args.l},
                      sources=_sources(args))
    ns = args.n if args.n else sorted({r.n for r in refs_all})
    refs = [r for r in refs_all if r.n in ns]
    values = fine_splitting_values(args.l, ns, args, params)
    report = compare({r.key: values[r.n][0] for r in refs}, refs)
    rows = []
    for n in ns:
        direct, lead = values[n]
        matched = [row for row in report.rows if row.record.n == n]
        if not matched:
            rows.append({"n": n, "l": args.l, "direct_mhz": direct, "leading_mhz": lead,
                         "status": "no-reference"})
        for row in matched:
            rows.append({"n": n, "l": args.l, "direct_mhz": direct, "leading_mhz": lead,
                         "reference_mhz": row.record.value, "source": row.record.source,
                         "rel_dev": row.rel_dev,
                         "tolerance": row.tolerance.describe() if row.tolerance else None,
                         "status": row.status})
    with _output(args) as out:
        emit(rows, FINE_COLUMNS, out, args.format or "csv")
    return _report_status(report)


def _channel(l, j, args) -> Channel:
    if j is None:
        j = l + 0.5
    return Channel(l, j, include_so=l > 0 and not args.no_so, langer=not args.no_langer)


def cmd_action_scan(args) -> int:
    params = model_params(args)
    ch = _channel(args.l, args.j, args)
    if not 0 < args.x_min < args.x_max or args.points < 2:
        raise ConfigurationError("need 0 < --x-min < --x-max and --points >= 2")
    x = np.linspace(args.x_min, args.x_max, args.points)
    scan = action_scan(ch, -1.0 / x**2, params, args.tol)
    with _output(args) as out:
        fmt = args.format or "csv"
        if fmt == "csv":
            write_scan_csv(scan, out)
        else:
            rows = [{"inv_sqrt_neg_E": e.inv_sqrt_neg_E, "nu": e.nu, "abs_err": e.abs_err_estimate,
                     "r_minus": e.turning_points.r_minus, "r_plus": e.turning_points.r_plus}
                    for e in scan.evaluations]
            if fmt == "json":
                json.dump({"channel": ch.label, "slope": scan.slope, "intercept": scan.intercept,
                           "max_residual": scan.max_residual, "rows": rows}, out, indent=2)
                out.write("\n")
            else:
                out.write(f"# slope={scan.slope!r} intercept={scan.intercept!r}\n")
                write_text(rows, SCAN_COLUMNS, out)
    return EXIT_OK


PROFILE_COLUMNS = ("l", "j", "n", "E_ry", "r", "r_over_rc", "momentum")


def momentum_profile(channel: Channel, n: int, params: ModelParams, points: int = 400,
                     r_max_over_rc: float | None = None, tol: float = 1e-9) -> list[dict]:
    """sqrt(-Q) sampled between the turning points of the level n.

    Sampling is geometric; for l = 0 it starts at 1e-6 r_c since there is no
    inner turning point.
    """
    level = solve_level(n, channel, params, tol)
    tp = turning_points(channel, level.E, params)
    r_c = params.r_c(channel.l)
    lo = tp.r_minus if tp.r_minus is not None else 1e-6 * r_c
    hi = tp.r_plus if r_max_over_rc is None else min(tp.r_plus, r_max_over_rc * r_c)
    r = np.geomspace(lo, hi, points)
    r[0], r[-1] = lo, hi
    q = pot.q_function(r, channel, level.E, params)
    p = np.sqrt(np.maximum(-np.asarray(q), 0.0))
    return [{"l": channel.l, "j": channel.j, "n": n, "E_ry": level.E, "r": float(ri),
             "r_over_rc": float(ri / r_c), "momentum": float(pi)} for ri, pi in zip(r, p)]


def cmd_momentum_profile(args) -> int:
    params = model_params(args)
    rows = []
    for l in args.l:
        rows += momentum_profile(_channel(l, None, args), args.n, params, args.points,
                                 args.r_max_over_rc, args.tol)
    with _output(args) as out:
        emit(rows, PROFILE_COLUMNS, out, args.format or "csv")
    return EXIT_OK


ORACLE_COLUMNS = ("n", "l", "j", "wkb_defect", "wkb_level_defect", "oracle_defect",
                  "deviation", "rel_E_dev", "tolerance", "status")


def oracle_rows(ns, ls, args, params, budget=math.inf, clock=time.monotonic):
    """Side-by-side WKB and Numerov defects; rows past the budget are 'omitted'."""
    too_big = [n for n in ns if n > MAX_ORACLE_N]
    if too_big:
        raise BudgetExceededError(
            f"oracle-check is limited to n <= {MAX_ORACLE_N}; requested {too_big}"
        )
    start = clock()
    rows, exceeded = [], False
    for n in ns:
        for l in ls:
            if l >= n:
                continue
            for ch in model_channels(l, args):
                row = {"n": n, "l": l, "j": ch.j, "tolerance": f"abs {ORACLE_TOLERANCE:g}"}
                if exceeded or clock() - start > budget:
                    exceeded = True
                    rows.append({**row, "status": "omitted"})
                    continue
                wkb = quantum_defect(ch, params, tol=args.tol).Delta
                level = solve_level(n, ch, params, args.tol)
                orc = oracle_level(n, ch, params, potential=args.potential)
                dev = (n - orc.effective_n) - wkb
                e_wkb = energy_from_defect(n, wkb)
                rows.append({**row, "wkb_defect": wkb, "wkb_level_defect": level.defect_effective,
                             "oracle_defect": n - orc.effective_n, "deviation": dev,
                             "rel_E_dev": (orc.E - e_wkb) / abs(e_wkb),
                             "status": "pass" if abs(dev) < ORACLE_TOLERANCE else "fail"})
    return rows, exceeded


def cmd_oracle_check(args) -> int:
    params = ModelParams.pure_coulomb(
        alpha_fs=args.alpha_fs if args.alpha_fs is not None else 1 / 137.036
    ) if args.pure_coulomb else model_params(args)
    rows, exceeded = oracle_rows(args.n, args.l, args, params, budget=args.budget)
    with _output(args) as out:
        emit(rows, ORACLE_COLUMNS, out, args.format or "csv")
    if exceeded:
        omitted = sum(r["status"] == "omitted" for r in rows)
        raise _Partial(f"runtime budget of {args.budget:g} s exceeded; {omitted} rows omitted")
    return EXIT_TOLERANCE if any(r["status"] == "fail" for r in rows) else EXIT_OK


def table_report(args, params) -> ComparisonReport:
    refs = select(load_references(args.refs), sources=_sources(args))
    defects, _ = defect_values(sorted({r.l for r in refs if r.observable != "fine-splitting"}),
                               args, params)
    computed = _rekey([r for r in refs if r.observable != "fine-splitting"], defects)
    for l in sorted({r.l for r in refs if r.observable == "fine-splitting"}):
        ns = sorted({r.n for r in refs if r.observable == "fine-splitting" and r.l == l})
        for n, (direct, _) in fine_splitting_values(l, ns, args, params).items():
            computed[("fine-splitting", n, l, None)] = direct
    return compare(computed, refs)


def _summary(report: ComparisonReport, results: list, oracle: list | None, out) -> None:
    out.write("Table reproduction summary\n==========================\n\n")
    groups = (("Fine splittings, l=1 (MHz)", "fine-splitting", 1),
              ("Fine splittings, l=2 (MHz)", "fine-splitting", 2),
              ("Quantum defects", None, None))
    dicts = report.as_dicts()
    for title, obs, l in groups:
        if obs is None:
            sel = [d for d in dicts if d["observable"] != "fine-splitting"]
        else:
            sel = [d for d in dicts if d["observable"] == obs and d["l"] == l]
        out.write(f"{title}\n\n")
        write_text(sel, ("observable", "n", "l", "j", "computed", "reference", "source",
                         "abs_dev", "rel_dev", "tolerance", "status"), out)
        out.write("\n")
    if results:
        out.write("Consistency checks\n\n")
        write_text([{"check": c.name, "worst": c.worst, "bound": c.bound, "detail": c.detail,
                     "status": "pass" if c.passed else "fail"} for c in results],
                   ("check", "worst", "bound", "status", "detail"), out)
        out.write("\n")
    if oracle is not None:
        out.write("Numerov cross-check\n\n")
        write_text(oracle, ORACLE_COLUMNS, out)
        out.write("\n")
    fails = len(report.failures) + sum(not c.passed for c in results)
    if oracle:
        fails += sum(r["status"] == "fail" for r in oracle)
    out.write(f"failures: {fails}; unmatched reference rows: {len(report.unmatched)}\n")


def cmd_reproduce_tables(args) -> int:
    params = model_params(args)
    report = table_report(args, params)
    results = []
    if not args.skip_checks:
        results.append(checks.coulomb_closure(ns=range(5, 81, 5)))
        results += checks.linearity(params)
        results.append(checks.leading_vs_direct(params))
        results += checks.scaling_constancy(params)
    oracle = None
    if args.with_oracle:
        oracle, _ = oracle_rows([10, 15, 20], [0, 1, 2], args, params)
    with _output(args) as out:
        fmt = args.format or "text"
        if fmt == "text":
            _summary(report, results, oracle, out)
        else:
            emit(report.as_dicts(), REPORT_COLUMNS, out, fmt)
    failed = (not report.ok or any(not c.passed for c in results)
              or (oracle is not None and any(r["status"] == "fail" for r in oracle)))
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_spectrum(args) -> int:
    params = model_params(args)
    requests = [(n, ch) for l in args.l for ch in model_channels(l, args)
                for n in range(max(args.n_min, l + 1), args.n_max + 1)]
    results = spectrum_batch(requests, params, args.tol, workers=args.workers)
    with _output(args) as out:
        emit(spectrum_rows(results, args.reduced_mass), SPECTRUM_COLUMNS, out, args.format or "csv")
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ConfigurationError, OSError) as exc:
        print(f"rydberg-wkb: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"rydberg-wkb: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except _Partial as exc:
        print(f"rydberg-wkb: partial report: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NumericalError, ArithmeticError) as exc:
        print(f"rydberg-wkb: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # DomainError and friends: bad arguments that passed argparse
        print(f"rydberg-wkb: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

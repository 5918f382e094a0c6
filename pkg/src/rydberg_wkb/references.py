"""Published reference values and comparison reports against computed numbers.

The bundled table is CSV with a commented header. One header line declares
the closed set of source labels (``# sources: a, b, ...``); every row must
use one of them.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigurationError, ParameterError
from .params import default_data_dir

OBSERVABLES = ("fine-splitting", "defect", "defect-difference")
TARGET_SOURCE = "theory_modified_potential"
DEFAULT_REFS_NAME = "references.csv"

_COLUMNS = ("observable", "n", "l", "j", "value", "uncertainty", "source")


@dataclass(frozen=True)
class ReferenceRecord:
    observable: str
    n: int
    l: int
    j: float | None
    value: float
    uncertainty: float | None
    source: str

    @property
    def key(self) -> tuple:
        return (self.observable, self.n, self.l, self.j)


@dataclass(frozen=True)
class Tolerance:
    """Acceptance band; ``relative`` selects |dev|/|ref| instead of |dev|."""

    bound: float
    relative: bool

    def describe(self) -> str:
        return f"{'rel' if self.relative else 'abs'} {self.bound:g}"

    def accepts(self, computed: float, reference: float) -> bool:
        dev = abs(computed - reference)
        if self.relative:
            dev /= abs(reference)
        return dev <= self.bound


def default_tolerance(record: ReferenceRecord) -> Tolerance:
    """Per-observable acceptance band used when checking the target source."""
    if record.observable == "defect":
        return Tolerance(1e-3, relative=False)
    if record.observable == "defect-difference":
        return Tolerance(5e-5 if record.l == 1 else 2e-5, relative=False)
    # low-n splittings are harder to pin down; they get a wider band
    return Tolerance(5e-3 if record.n < 20 else 2e-3, relative=True)


def default_refs_path() -> Path:
    return default_data_dir() / DEFAULT_REFS_NAME


def _optional_float(raw: str, what: str, line: int) -> float | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ParameterError(f"line {line}: column '{what}' is not a number: {raw!r}") from None


def parse_references(text: str, source: str = "<string>") -> list[ReferenceRecord]:
    sources = None
    body = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            head, _, rest = stripped.lstrip("#").partition(":")
            if head.strip() == "sources":
                sources = {s.strip() for s in rest.split(",") if s.strip()}
            continue
        if stripped:
            body.append((number, line))
    if sources is None:
        raise ParameterError(f"{source}: header lacks a '# sources:' declaration")
    if not body:
        raise ParameterError(f"{source}: no column header")
    reader = csv.reader(io.StringIO("\n".join(line for _, line in body)))
    header = [c.strip() for c in next(reader)]
    if tuple(header) != _COLUMNS:
        raise ParameterError(f"{source}: expected columns {','.join(_COLUMNS)}, got {','.join(header)}")
    records = []
    for (number, _), row in zip(body[1:], reader):
        if len(row) != len(_COLUMNS):
            raise ParameterError(f"{source}:{number}: expected {len(_COLUMNS)} fields, got {len(row)}")
        obs, n, l, j, value, unc, label = (c.strip() for c in row)
        if obs not in OBSERVABLES:
            raise ParameterError(f"{source}:{number}: unknown observable {obs!r}")
        if label not in sources:
            raise ParameterError(f"{source}:{number}: source {label!r} not declared in header")
        val = _optional_float(value, "value", number)
        if val is None:
            raise ParameterError(f"{source}:{number}: value missing")
        try:
            n_i, l_i = int(n), int(l)
        except ValueError:
            raise ParameterError(f"{source}:{number}: n and l must be integers") from None
        records.append(ReferenceRecord(obs, n_i, l_i, _optional_float(j, "j", number),
                                       val, _optional_float(unc, "uncertainty", number), label))
    return records


def load_references(path: str | os.PathLike | None = None) -> list[ReferenceRecord]:
    path = Path(path) if path is not None else default_refs_path()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read reference file {path}: {exc}") from exc
    return parse_references(text, source=str(path))


def select(records: Iterable[ReferenceRecord], observables=None, ls=None,
           ns=None, sources=None) -> list[ReferenceRecord]:
    """Filter records; ``None`` for a criterion keeps everything."""
    out = []
    for rec in records:
        if observables is not None and rec.observable not in observables:
            continue
        if ls is not None and rec.l not in ls:
            continue
        if ns is not None and rec.n not in ns:
            continue
        if sources is not None and rec.source not in sources:
            continue
        out.append(rec)
    return out


@dataclass(frozen=True)
class ComparisonRow:
    record: ReferenceRecord
    computed: float | None
    tolerance: Tolerance | None
    status: str  # pass, fail, info (not checked) or unmatched

    @property
    def abs_dev(self) -> float | None:
        return None if self.computed is None else self.computed - self.record.value

    @property
    def rel_dev(self) -> float | None:
        if self.computed is None or self.record.value == 0:
            return None
        return (self.computed - self.record.value) / abs(self.record.value)


REPORT_COLUMNS = ("observable", "n", "l", "j", "computed", "reference", "uncertainty",
                  "source", "abs_dev", "rel_dev", "tolerance", "status")


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow] = field(default_factory=list)

    @property
    def failures(self) -> list[ComparisonRow]:
        return [r for r in self.rows if r.status == "fail"]

    @property
    def unmatched(self) -> list[ComparisonRow]:
        return [r for r in self.rows if r.status == "unmatched"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dicts(self) -> list[dict]:
        out = []
        for row in self.rows:
            rec = row.record
            out.append({
                "observable": rec.observable, "n": rec.n, "l": rec.l, "j": rec.j,
                "computed": row.computed, "reference": rec.value,
                "uncertainty": rec.uncertainty, "source": rec.source,
                "abs_dev": row.abs_dev, "rel_dev": row.rel_dev,
                "tolerance": row.tolerance.describe() if row.tolerance else None,
                "status": row.status,
            })
        return out


def compare(computed: Mapping[tuple, float], records: Iterable[ReferenceRecord],
            check_sources: Iterable[str] = (TARGET_SOURCE,), tolerance=default_tolerance
            ) -> ComparisonReport:
    """Match ``computed`` (keyed like :attr:`ReferenceRecord.key`) to records.

    Only rows whose source is in ``check_sources`` are judged pass/fail; the
    rest are listed as ``info`` so experiment and theory never get mixed up.
    """
    checked = set(check_sources)
    report = ComparisonReport()
    for rec in records:
        value = computed.get(rec.key)
        if value is None or (isinstance(value, float) and math.isnan(value)):
            report.rows.append(ComparisonRow(rec, None, None, "unmatched"))
            continue
        if rec.source in checked:
            tol = tolerance(rec)
            status = "pass" if tol.accepts(value, rec.value) else "fail"
        else:
            tol, status = None, "info"
        report.rows.append(ComparisonRow(rec, float(value), tol, status))
    return report


def sources_declared(records: Iterable[ReferenceRecord]) -> list[str]:
    seen = []
    for rec in records:
        if rec.source not in seen:
            seen.append(rec.source)
    return seen


def require_source(records: Iterable[ReferenceRecord], name: str) -> None:
    if name not in sources_declared(records):
        raise ConfigurationError(f"reference source {name!r} not present in the reference file")

"""Room-temperature probe screening: classification, offset correction, statistics, design curve.

Short/open classification is applied to the *raw* two-terminal resistance.
The corrected values (raw minus a constant lead offset) can fall below the
short threshold for wide lines, so thresholds on corrected values would not
be self-consistent.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import statistics
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from shadowfab.errors import DomainError, InputError
from shadowfab.numfit import INVERSE_SQUARE_OFFSET, FitResult, solve_least_squares

INPUT_COLUMNS = ("device_id", "design_width_um", "raw_resistance_ohm")
STATS_COLUMNS = ("design_width_um", "n_total", "n_short", "n_open", "n_pass",
                 "mean_corrected_ohm", "stddev_corrected_ohm")


class Classification(enum.Enum):
    SHORT = "short"
    OPEN = "open"
    PASS = "pass"


@dataclass(frozen=True)
class Thresholds:
    short_max: float = 300.0
    open_min: float = 50_000.0

    def __post_init__(self):
        if not self.short_max < self.open_min:
            raise DomainError("short_max must be below open_min")


@dataclass(frozen=True)
class ScreeningRecord:
    device_id: str
    design_width: float
    raw_resistance: float

    def __post_init__(self):
        if not (self.design_width > 0 and math.isfinite(self.design_width)):
            raise InputError(f"{self.device_id}: design width must be positive")
        if not (self.raw_resistance > 0 and math.isfinite(self.raw_resistance)):
            raise InputError(f"{self.device_id}: raw resistance must be positive and finite")


@dataclass
class DesignStats:
    design_width: float
    n_total: int
    n_short: int
    n_open: int
    n_pass: int
    mean_corrected: float | None
    stddev_corrected: float | None
    mean_raw: float | None = None
    stddev_raw: float | None = None
    negative_ids: list[str] = field(default_factory=list)

    @property
    def yield_fraction(self) -> float:
        return self.n_pass / self.n_total

    @property
    def yield_label(self) -> str:
        return f"{self.n_pass}/{self.n_total}"


@dataclass
class DesignCurveFit:
    a: float  # ohm um^2
    b: float  # um
    fit: FitResult
    widths: np.ndarray = field(repr=False, default=None)
    means: np.ndarray = field(repr=False, default=None)

    @property
    def a_stderr(self) -> float | None:
        return None if self.fit.stderr is None else float(self.fit.stderr[0])

    @property
    def b_stderr(self) -> float | None:
        return None if self.fit.stderr is None else float(self.fit.stderr[1])


def classify(record: ScreeningRecord, thresholds: Thresholds = Thresholds()) -> Classification:
    raw = record.raw_resistance
    if raw <= thresholds.short_max:
        return Classification.SHORT
    if raw >= thresholds.open_min:
        return Classification.OPEN
    return Classification.PASS


def correct_offset(raw: float, offset: float) -> float | None:
    """Subtract the lead offset; ``None`` flags a non-positive corrected value."""
    if offset < 0:
        raise DomainError("offset must be >= 0")
    corrected = raw - offset
    return corrected if corrected > 0 else None


def _mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else None
    return mean, std


def aggregate(records: Iterable[ScreeningRecord], thresholds: Thresholds, offset: float) -> list[DesignStats]:
    """Per-design counts and corrected statistics, ordered by design width."""
    records = list(records)
    if not records:
        raise InputError("no screening records")
    if offset < 0:
        raise DomainError("offset must be >= 0")
    groups: dict[float, list[ScreeningRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.design_width].append(rec)

    out = []
    for width in sorted(groups):
        group = groups[width]
        counts = {c: 0 for c in Classification}
        corrected, raw, negative = [], [], []
        for rec in sorted(group, key=lambda r: r.device_id):
            cls = classify(rec, thresholds)
            counts[cls] += 1
            if cls is not Classification.PASS:
                continue
            value = correct_offset(rec.raw_resistance, offset)
            if value is None:
                negative.append(rec.device_id)
                continue
            corrected.append(value)
            raw.append(rec.raw_resistance)
        if negative:
            warnings.warn(f"width {width:g} um: {len(negative)} device(s) with non-positive corrected "
                          f"resistance excluded ({', '.join(negative)}); check offset_ohm", stacklevel=2)
        mean, std = _mean_std(corrected)
        mean_raw, std_raw = _mean_std(raw)
        out.append(DesignStats(width, len(group), counts[Classification.SHORT], counts[Classification.OPEN],
                               counts[Classification.PASS], mean, std, mean_raw, std_raw, negative))
    return out


def fit_design_curve(stats: Sequence[DesignStats], weighting: str = "uniform") -> DesignCurveFit:
    """Fit ``R(w) = a / (w - b)**2`` to the corrected group means."""
    usable = [s for s in stats if s.mean_corrected is not None]
    if len(usable) < 3:
        raise InputError(f"design-curve fit needs at least 3 groups with a mean, got {len(usable)}")
    usable.sort(key=lambda s: s.design_width)
    w = np.array([s.design_width for s in usable])
    r = np.array([s.mean_corrected for s in usable])

    if weighting == "uniform":
        weights = None
    elif weighting == "inverse_variance":
        sem = []
        for s in usable:
            if s.stddev_corrected is None or s.stddev_corrected <= 0:
                raise InputError(f"width {s.design_width:g} um has no spread; inverse-variance weighting impossible")
            sem.append(s.stddev_corrected / math.sqrt(s.n_pass - len(s.negative_ids)))
        weights = 1.0 / np.array(sem)
    else:
        raise DomainError(f"unknown weighting {weighting!r}")

    b_max = w.min() - 0.01
    b0 = min(0.7 * w.min(), b_max)
    a0 = r[0] * (w[0] - b0) ** 2
    problem = INVERSE_SQUARE_OFFSET.problem(w, r, [a0, b0], weights,
                                            lower=[0.0, -np.inf], upper=[np.inf, b_max])
    fit = solve_least_squares(problem, max_iter=500)
    a, b = (float(v) for v in fit.params)
    return DesignCurveFit(a, b, fit, w, r)


def predict_resistance(fit: DesignCurveFit | tuple[float, float], w: float) -> float:
    a, b = (fit.a, fit.b) if isinstance(fit, DesignCurveFit) else fit
    if not w > b:
        raise DomainError(f"w = {w:g} um is inside fully-narrowed regime (b = {b:g} um)")
    if math.isinf(w):
        return 0.0
    return a / (w - b) ** 2


def read_records(stream: TextIO, lax: bool = False) -> list[ScreeningRecord]:
    """Parse the screening CSV (``device_id,design_width_um,raw_resistance_ohm``).

    Strict mode raises :class:`InputError` with the offending line number;
    ``lax`` tolerates extra columns and skips bad rows with a warning.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty CSV, header row required", line=1) from None
    header = [h.strip() for h in header]
    missing = [c for c in INPUT_COLUMNS if c not in header]
    if missing:
        raise InputError(f"missing column(s): {', '.join(missing)}", line=1)
    unknown = [c for c in header if c not in INPUT_COLUMNS]
    if unknown and not lax:
        raise InputError(f"unknown column(s): {', '.join(unknown)} (use --lax to ignore)", line=1)
    idx = {c: header.index(c) for c in INPUT_COLUMNS}

    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(header):
                raise InputError(f"expected {len(header)} fields, got {len(row)}", line=line)
            try:
                width = float(row[idx["design_width_um"]])
                raw = float(row[idx["raw_resistance_ohm"]])
            except ValueError as exc:
                raise InputError(f"bad number ({exc})", line=line) from None
            try:
                records.append(ScreeningRecord(row[idx["device_id"]].strip(), width, raw))
            except InputError as exc:
                raise InputError(str(exc), line=line) from None
        except InputError as exc:
            if not lax:
                raise
            warnings.warn(f"skipping row: {exc}", stacklevel=2)
    if not records:
        raise InputError("no valid data rows")
    return records


def format_float(x: float | None) -> str:
    """Shortest round-trip decimal; empty for absent values."""
    return "" if x is None else repr(float(x))


def write_stats_csv(stats: Sequence[DesignStats], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    for s in stats:
        writer.writerow([format_float(s.design_width), s.n_total, s.n_short, s.n_open, s.n_pass,
                         format_float(s.mean_corrected), format_float(s.stddev_corrected)])


def stats_csv(stats: Sequence[DesignStats]) -> str:
    buf = io.StringIO()
    write_stats_csv(stats, buf)
    return buf.getvalue()

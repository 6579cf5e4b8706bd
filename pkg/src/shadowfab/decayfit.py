"""Energy-relaxation and Ramsey fits of qubit time traces (times in us, detuning in MHz)."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from shadowfab.errors import InputError
from shadowfab.numfit import DAMPED_COSINE, EXPONENTIAL_DECAY, FitResult, solve_least_squares

MIN_POINTS = 8
PEAK_TO_FLOOR = 5.0  # spectral peak must exceed this multiple of the median magnitude


class CoherenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TimeTrace:
    times: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.signal, dtype=float)
        if t.ndim != 1 or t.shape != y.shape:
            raise InputError("times and signal must be 1-D arrays of equal length")
        if t.size < MIN_POINTS:
            raise InputError(f"trace needs at least {MIN_POINTS} points, got {t.size}")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(y)):
            raise InputError("trace contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise InputError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "signal", y)

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass
class T1Fit:
    amplitude: float
    t1: float
    baseline: float
    fit: FitResult

    @property
    def t1_stderr(self) -> float | None:
        return None if self.fit.stderr is None else float(self.fit.stderr[1])


@dataclass
class RamseyFit:
    amplitude: float
    t2_star: float
    detuning: float
    phase: float
    baseline: float
    fit: FitResult

    @property
    def t2_star_stderr(self) -> float | None:
        return None if self.fit.stderr is None else float(self.fit.stderr[1])


def _fit_exponential(trace: TimeTrace, tau0: float) -> FitResult:
    y = trace.signal
    p0 = [y[0] - y[-1], tau0, y[-1]]
    problem = EXPONENTIAL_DECAY.problem(trace.times, y, p0, lower=[-np.inf, 1e-9 * trace.span, -np.inf])
    return solve_least_squares(problem)


def _one_over_e_time(trace: TimeTrace) -> float:
    t, y = trace.times, trace.signal
    excess = np.abs(y - y[-1])
    below = np.nonzero(excess <= excess[0] / math.e)[0]
    if below.size == 0 or below[0] == 0:
        return trace.span / 3.0
    return float(t[below[0]] - t[0])


def fit_t1(trace: TimeTrace) -> T1Fit:
    """Fit ``A exp(-t / T1) + C`` seeded at ``T1 = span / 3``."""
    t, y = trace.times, trace.signal
    fit = _fit_exponential(trace, trace.span / 3.0)
    if fit.params[1] < np.min(np.diff(t)):
        # a decay faster than the sampling is the spike-at-t0 local minimum;
        # retry once from the 1/e crossing and keep the lower cost
        retry = _fit_exponential(trace, _one_over_e_time(trace))
        if retry.residual_norm < fit.residual_norm:
            fit = retry
    amp, tau, base = (float(v) for v in fit.params)
    if fit.ill_conditioned:
        warnings.warn("T1 fit is ill-conditioned; decay time is not identifiable from this trace",
                      stacklevel=2)
    return T1Fit(amp, tau, base, fit)


def dominant_frequency(trace: TimeTrace, oversample: int = 8) -> float:
    """Strongest non-zero frequency of the mean-subtracted trace (1 / time unit).

    The trace is linearly resampled onto a uniform grid, zero padded by
    ``oversample`` and transformed with an FFT.
    """
    n = trace.times.size
    grid = np.linspace(trace.times[0], trace.times[-1], n)
    y = np.interp(grid, trace.times, trace.signal)
    y = y - y.mean()
    if not np.any(np.abs(y) > 1e-12 * max(1.0, float(np.abs(trace.signal).max()))):
        raise InputError("detuning unidentifiable: signal is constant")
    dt = grid[1] - grid[0]
    spec = np.abs(np.fft.rfft(y, n * oversample))
    freqs = np.fft.rfftfreq(n * oversample, dt)
    spec, freqs = spec[1:], freqs[1:]
    k = int(np.argmax(spec))
    if spec[k] < PEAK_TO_FLOOR * np.median(spec):
        raise InputError("detuning unidentifiable: no spectral peak above the noise floor")
    return float(freqs[k])


def _canonical(amp: float, freq: float, phase: float) -> tuple[float, float, float]:
    if freq < 0:
        freq, phase = -freq, -phase
    if amp < 0:
        amp, phase = -amp, phase + math.pi
    phase = math.remainder(phase, 2 * math.pi)
    return amp, freq, phase


def fit_ramsey(trace: TimeTrace) -> RamseyFit:
    """Fit ``A exp(-t / T2*) cos(2 pi df t + phi0) + C``.

    The detuning is seeded from :func:`dominant_frequency` and the phase from 0.
    A purely exponential trace is seeded at zero detuning so the fit collapses
    onto the T1 model.
    """
    t, y = trace.times, trace.signal
    f0 = dominant_frequency(trace)
    if f0 <= 1.0 / trace.span:
        # peak in the lowest bins: no resolvable oscillation within the window
        f0 = 0.0
    tail = max(1, t.size // 4)
    c0 = float(np.mean(y[-tail:]))
    p0 = [y[0] - c0, trace.span / 3.0, f0, 0.0, c0]
    tau_floor = 1e-9 * trace.span
    problem = DAMPED_COSINE.problem(t, y, p0, lower=[-np.inf, tau_floor, -np.inf, -np.inf, -np.inf])
    fit = solve_least_squares(problem, max_iter=500)
    amp, tau, freq, phase, base = (float(v) for v in fit.params)
    amp, freq, phase = _canonical(amp, freq, phase)
    return RamseyFit(amp, tau, freq, phase, base, fit)


def check_coherence(t1: float, t2_star: float) -> bool:
    """Warn (never raise) when ``T2* > 2 T1``; returns whether the pair is consistent."""
    ok = t2_star <= 2.0 * t1
    if not ok:
        warnings.warn(f"T2* = {t2_star:.4g} us exceeds 2*T1 = {2 * t1:.4g} us", CoherenceWarning, stacklevel=2)
    return ok


def read_trace(stream: TextIO) -> TimeTrace:
    """Parse a ``time_us,signal`` CSV."""
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty CSV, header row required", line=1) from None
    if header != ["time_us", "signal"]:
        raise InputError(f"expected header time_us,signal, got {','.join(header)}", line=1)
    times, signal = [], []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"expected 2 fields, got {len(row)}", line=reader.line_num)
        try:
            times.append(float(row[0]))
            signal.append(float(row[1]))
        except ValueError as exc:
            raise InputError(f"bad number ({exc})", line=reader.line_num) from None
    return TimeTrace(np.array(times), np.array(signal))


def write_trace(times: Sequence[float], signal: Sequence[float], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["time_us", "signal"])
    for t, s in zip(times, signal):
        writer.writerow([repr(float(t)), repr(float(s))])

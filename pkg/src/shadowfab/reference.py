"""Published process and measurement anchors, plus synthetic data built from them.

These numbers are reference values for regression checks and demos; none of
the library code depends on them.
"""

from __future__ import annotations

import numpy as np

from shadowfab.screening import ScreeningRecord

THETA_DEG = 60.0
PHI_SCREENING_DEG = 15.0
PHI_QUBIT_DEG = 25.0
TOP_RESIST_UM = 1.8
FILM_THICKNESS_NM = (40.0, 100.0)
SEM_LINEWIDTHS_UM = (0.150, 0.070)

SHORT_MAX_OHM = 300.0
OPEN_MIN_OHM = 50_000.0
DEVICES_PER_DESIGN = 27

# design width um -> (pass count, corrected mean ohm, corrected std ohm)
SCREENING_TABLE = {
    0.5: (12, 4066.0, 1790.0),
    0.6: (23, 1285.0, 188.0),
    0.7: (26, 764.0, 112.0),
    0.8: (27, 395.0, 46.0),
    0.9: (25, 314.0, 64.0),
    1.0: (24, 197.0, 22.0),
}
DESIGN_CURVE = (84.0, 0.35)  # a [ohm um^2], b [um]
DESIGN_CURVE_BANDS = ((55.0, 150.0), (0.30, 0.43))

QUBIT_F01_GHZ = 4.865
QUBIT_RN_OHM = 10_000.0
CAVITY_GHZ = 7.17
T1_US = 9.2
T1_ERR_US = 0.4
T2_STAR_US = 0.4


def _standardized(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(n)
    z = z - z.mean()
    return z / z.std(ddof=1)


def synthetic_screening_cohort(offset: float, seed: int = 0) -> list[ScreeningRecord]:
    """27 devices per design width reproducing the tabulated counts, means and spreads.

    Pass devices get corrected values with exactly the tabulated sample mean
    and standard deviation (redrawn until every value stays inside the pass
    window after adding ``offset``).  Excluded devices alternate between
    shorts and opens, opens first.
    """
    rng = np.random.default_rng(seed)
    records = []
    for width, (n_pass, mean, std) in SCREENING_TABLE.items():
        for _ in range(1000):
            values = mean + std * _standardized(n_pass, rng)
            raw = values + offset
            if np.all(values > 0) and np.all(raw > SHORT_MAX_OHM) and np.all(raw < OPEN_MIN_OHM):
                break
        else:
            raise ValueError(f"cannot place width {width} inside the pass window with offset {offset}")
        tag = f"w{int(round(width * 1000)):04d}"
        for i, r in enumerate(raw):
            records.append(ScreeningRecord(f"{tag}-{i:02d}", width, float(r)))
        for k in range(DEVICES_PER_DESIGN - n_pass):
            r = 1.0e6 if k % 2 == 0 else 50.0
            records.append(ScreeningRecord(f"{tag}-{n_pass + k:02d}", width, r))
    return records


def synthetic_t1_trace(t1: float = T1_US, amplitude: float = 1.0, baseline: float = 0.0,
                       n: int = 51, span: float = 50.0, noise: float = 0.0, rng=None):
    t = np.linspace(0.0, span, n)
    y = amplitude * np.exp(-t / t1) + baseline
    if noise:
        y = y + (rng or np.random.default_rng()).normal(0.0, noise, n)
    return t, y


def synthetic_ramsey_trace(t2_star: float = T2_STAR_US, detuning_mhz: float = 2.0, amplitude: float = 1.0,
                           phase: float = 0.0, baseline: float = 0.0, n: int = 201, span: float = 2.0,
                           noise: float = 0.0, rng=None):
    t = np.linspace(0.0, span, n)
    y = amplitude * np.exp(-t / t2_star) * np.cos(2 * np.pi * detuning_mhz * t + phase) + baseline
    if noise:
        y = y + (rng or np.random.default_rng()).normal(0.0, noise, n)
    return t, y

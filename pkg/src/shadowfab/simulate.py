"""End-to-end junction simulation and design-space sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from shadowfab import geomcore as gc
from shadowfab import junctionphys as jp

SWEEP_COLUMNS = ("phi_deg", "theta_deg", "h_um", "w_open_um", "w_narrow_um",
                 "overlap_area_um2", "rn_ohm", "f01_ghz")


@dataclass(frozen=True)
class JunctionResult:
    lines: tuple[gc.LinePattern, gc.LinePattern]
    steps: tuple[gc.EvapStep, gc.EvapStep]
    phis: tuple[float, float]
    closed_form: tuple[float | object, float | object]
    footprints: tuple[gc.Footprint, gc.Footprint]
    geometry: gc.JunctionGeometry
    shadow_offsets: tuple[float, float]


def symmetric_crossing(w_open: float, theta: float, phi: float, length: float = 20.0,
                       film_thickness: Sequence[float] = (40.0, 100.0),
                       effective_top: Sequence[float | None] = (None, None)):
    """Two perpendicular lines, each evaporated at in-plane offset ``phi`` from its own axis."""
    lines = (gc.LinePattern(w_open, 0.0, length), gc.LinePattern(w_open, 90.0, length))
    steps = (gc.EvapStep(theta, 0.0 + phi, film_thickness[0], effective_top[0]),
             gc.EvapStep(theta, 90.0 + phi, film_thickness[1], effective_top[1]))
    return lines, steps


def simulate_junction(lines, steps, resist: gc.BilayerResist, convention: str = "paper") -> JunctionResult:
    feet, phis, closed, offsets = [], [], [], []
    for line, step in zip(lines, steps):
        phi = gc.in_plane_offset(line, step)
        h = step.top_thickness(resist)
        phis.append(phi)
        offsets.append(gc.shadow_offset(h, step.theta, convention))
        closed.append(gc.narrowed_linewidth(line.w_open, h, step.theta, phi, convention))
        feet.append(gc.project_footprint(line.polygon(), resist, step, convention))
    geom = gc.junction_overlap(feet[0], feet[1])
    return JunctionResult(tuple(lines), tuple(steps), tuple(phis), tuple(closed), tuple(feet), geom,
                          tuple(offsets))


def _grid_values(values: Sequence[float]) -> list[float]:
    out = sorted({float(v) for v in values})
    if not out:
        raise ValueError("sweep ranges must be nonempty")
    return out


def sweep(w_open: Sequence[float], theta: Sequence[float], phi: Sequence[float], h: Sequence[float],
          convention: str = "paper", length: float = 20.0, material: jp.MaterialParams | None = None,
          ec_over_h: float | None = None) -> list[dict]:
    """One row per grid point, lexicographic over (phi, theta, h, w_open)."""
    rows = []
    grid = itertools.product(_grid_values(phi), _grid_values(theta), _grid_values(h), _grid_values(w_open))
    for p, t, hh, w in grid:
        lines, steps = symmetric_crossing(w, t, p, length)
        res = simulate_junction(lines, steps, gc.BilayerResist(hh), convention)
        narrow = res.closed_form[0]
        area = res.geometry.area
        rn = f01 = None
        if material is not None and material.resistance_area_product is not None and area > 0:
            rn = jp.resistance_from_area(area, material)
            if ec_over_h is not None:
                ej = jp.ej_from_ic(jp.ic_from_resistance(rn, material))
                f01 = jp.f01_from_energies(ej, ec_over_h)[0]
        rows.append({
            "phi_deg": p, "theta_deg": t, "h_um": hh, "w_open_um": w,
            "w_narrow_um": narrow, "overlap_area_um2": area, "rn_ohm": rn, "f01_ghz": f01,
        })
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if v is gc.FULLY_SHADOWED:
        return "FULLY_SHADOWED"
    x = float(v)
    return repr(x) if math.isfinite(x) else str(x)


def sweep_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()

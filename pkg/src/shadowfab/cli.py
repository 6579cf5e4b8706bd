"""Command-line entry point: ``shadowfab simulate | sweep | screen | qubit | fit-decay``.

Exit codes: 0 success, 2 configuration/validation error, 3 input parse error,
4 fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Optional

from pydantic import Field, ValidationError

from shadowfab import __version__
from shadowfab import geomcore as gc
from shadowfab import junctionphys as jp
from shadowfab.config import ToolConfig, _describe, _Strict, load_config
from shadowfab.decayfit import check_coherence, fit_ramsey, fit_t1, read_trace
from shadowfab.errors import ConfigurationError, DomainError, InputError
from shadowfab.report import Report
from shadowfab.screening import aggregate, fit_design_curve, read_records, stats_csv
from shadowfab.simulate import simulate_junction, sweep, sweep_csv, symmetric_crossing

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NOCONVERGE = 4


class LineSpec(_Strict):
    w_open_um: float = Field(gt=0)
    orientation_deg: float = 0.0
    length_um: float = Field(20.0, gt=0)
    center_um: tuple[float, float] = (0.0, 0.0)


class StepSpec(_Strict):
    theta_deg: float = Field(gt=0, lt=90)
    azimuth_deg: float
    film_thickness_nm: float = Field(40.0, gt=0)
    effective_top_thickness_um: Optional[float] = Field(None, gt=0)


class JunctionSpec(_Strict):
    lines: tuple[LineSpec, LineSpec]
    steps: tuple[StepSpec, StepSpec]


def _emit(text: str, out: Optional[str], payload: Optional[str] = None) -> None:
    sys.stdout.write(text)
    if out is not None:
        Path(out).write_text(payload if payload is not None else text, encoding="utf-8")


def _parse_list(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive, evenly spaced)."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            if n == 1:
                return [float(start)]
            a, b = float(start), float(stop)
            return [a + (b - a) * i / (n - 1) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b,c or start:stop:count, got {text!r}") from None


def _width_value(v) -> object:
    return "FULLY_SHADOWED" if v is gc.FULLY_SHADOWED else v


def cmd_simulate(args, cfg: ToolConfig) -> int:
    ev = cfg.evaporation
    resist = cfg.resist.resist()
    conv = cfg.shadow_convention
    if args.spec:
        try:
            spec = JunctionSpec.model_validate(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except OSError as exc:
            raise InputError(f"cannot read spec {args.spec}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"spec is not valid JSON: {exc}") from None
        except ValidationError as exc:
            raise ConfigurationError(f"invalid junction spec: {_describe(exc)}") from None
        lines = tuple(gc.LinePattern(s.w_open_um, s.orientation_deg, s.length_um, s.center_um) for s in spec.lines)
        steps = tuple(gc.EvapStep(s.theta_deg, s.azimuth_deg, s.film_thickness_nm, s.effective_top_thickness_um)
                      for s in spec.steps)
    else:
        w = args.w_open if args.w_open is not None else ev.w_open_um
        theta = args.theta if args.theta is not None else ev.theta_deg
        phi = args.phi if args.phi is not None else ev.phi_deg
        if args.h is not None:
            resist = gc.BilayerResist(args.h, resist.undercut)
        lines, steps = symmetric_crossing(w, theta, phi, ev.line_length_um, ev.film_thickness_nm,
                                          ev.effective_top_thickness_um)

    res = simulate_junction(lines, steps, resist, conv)
    rep = Report("junction simulation")
    rep.add("shadow_convention", conv)
    for i in range(2):
        k = i + 1
        rep.add(f"w_open_{k}_um", lines[i].w_open)
        rep.add(f"theta_{k}_deg", steps[i].theta)
        rep.add(f"phi_{k}_deg", res.phis[i])
        rep.add(f"shadow_offset_{k}_um", res.shadow_offsets[i])
        rep.add(f"w_narrow_{k}_um", _width_value(res.closed_form[i]))
        rep.add(f"footprint_width_{k}_um", getattr(res.geometry, f"linewidth_{k}"))
        rep.add(f"fully_shadowed_{k}", res.footprints[i].is_empty)
    rep.add("overlap_area_um2", res.geometry.area)
    rep.add("overlap_area_nm2", res.geometry.area_nm2)
    mat = cfg.material.params()
    if mat.resistance_area_product is not None and res.geometry.area > 0:
        rn = jp.resistance_from_area(res.geometry.area, mat)
        rep.add("rn_ohm", rn)
        if cfg.qubit.ec_ghz is not None:
            rep.add("f01_ghz", jp.transmon_from_resistance(rn, cfg.qubit.ec_ghz, mat).f01)
    if conv == "paper" and max(s.theta for s in steps) >= 80.0:
        rep.note("paper convention: shadow offset h/tan(theta) vanishes as theta -> 90 deg, "
                 "so near-grazing tilt gives near-nominal widths")
    _emit(rep.text(), args.out, rep.json())
    return EXIT_OK


def cmd_sweep(args, cfg: ToolConfig) -> int:
    ev = cfg.evaporation
    rows = sweep(
        args.w_open or [ev.w_open_um],
        args.theta or [ev.theta_deg],
        args.phi or [ev.phi_deg],
        args.h or [cfg.resist.top_thickness_um],
        cfg.shadow_convention,
        ev.line_length_um,
        cfg.material.params(),
        cfg.qubit.ec_ghz,
    )
    _emit(sweep_csv(rows), args.out)
    return EXIT_OK


def cmd_screen(args, cfg: ToolConfig) -> int:
    if cfg.offset_ohm is None:
        raise ConfigurationError("offset_ohm is required for screening (two-terminal lead offset, ohm)")
    try:
        with open(args.input, encoding="utf-8-sig", newline="") as fh:
            records = read_records(fh, lax=args.lax)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    stats = aggregate(records, cfg.thresholds.thresholds(), cfg.offset_ohm)
    table = stats_csv(stats)

    rep = Report("design-curve fit R(w) = a / (w - b)^2")
    rep.add("offset_ohm", cfg.offset_ohm)
    rep.add("weighting", args.weighting)
    for s in stats:
        tag = f"w{s.design_width:g}"
        rep.add(f"{tag}_yield", s.yield_label)
        rep.add(f"{tag}_mean_raw_ohm", s.mean_raw)
        rep.add(f"{tag}_stddev_raw_ohm", s.stddev_raw)
        rep.add(f"{tag}_mean_corrected_ohm", s.mean_corrected)
        rep.add(f"{tag}_stddev_corrected_ohm", s.stddev_corrected)
        if s.negative_ids:
            rep.add(f"{tag}_excluded_nonpositive", ",".join(s.negative_ids))
    curve = fit_design_curve(stats, args.weighting)
    rep.add("a_ohm_um2", curve.a)
    rep.add("a_stderr_ohm_um2", curve.a_stderr)
    rep.add("b_um", curve.b)
    rep.add("b_stderr_um", curve.b_stderr)
    rep.add("residual_norm_ohm", curve.fit.residual_norm)
    rep.add("iterations", curve.fit.iterations)
    rep.add("converged", curve.fit.converged)

    if args.out:
        out = Path(args.out)
        out.write_text(table, encoding="utf-8")
        rep.write(out.with_suffix(".fit.json"))
    sys.stdout.write(table + "\n" + rep.text())
    return EXIT_OK if curve.fit.converged else EXIT_NOCONVERGE


def cmd_qubit(args, cfg: ToolConfig) -> int:
    mat = cfg.material.params()
    ec = args.ec if args.ec is not None else cfg.qubit.ec_ghz
    rep = Report("transmon parameter chain")
    rep.add("gap_delta_uev", mat.gap_delta)
    rep.add("temperature_k", mat.temperature)

    if args.f01 is not None:
        if ec is None:
            raise ConfigurationError("f01 mode needs the charging energy: pass --ec or set qubit.ec_ghz")
        rep.add("direction", "inverse: f01 -> E_J -> I_c -> R_n")
        params = jp.transmon_from_f01(args.f01, ec, mat)
    else:
        if args.area is not None:
            rn = jp.resistance_from_area(args.area, mat)
            rep.add("direction", "forward: area -> R_n -> I_c -> E_J -> f01")
            rep.add("area_um2", args.area)
        else:
            rn = args.rn
            rep.add("direction", "forward: R_n -> I_c -> E_J -> f01")
        ic = jp.ic_from_resistance(rn, mat)
        ej = jp.ej_from_ic(ic)
        if ec is None:
            rep.add("rn_ohm", rn).add("ic_na", ic).add("ej_ghz", ej)
            rep.note("E_C not configured: chain stops at E_J")
            _emit(rep.text(), args.out, rep.json())
            return EXIT_OK
        params = jp.transmon_from_resistance(rn, ec, mat)

    rep.add("rn_ohm", params.rn)
    rep.add("ic_na", params.ic)
    rep.add("ej_ghz", params.ej_over_h)
    rep.add("ec_ghz", params.ec_over_h)
    rep.add("ej_over_ec", params.ej_ec_ratio)
    rep.add("transmon_regime", params.transmon_regime)
    rep.add("f01_ghz", params.f01)
    rep.add("anharmonicity_ghz", params.anharmonicity)
    _emit(rep.text(), args.out, rep.json())
    return EXIT_OK


def cmd_fit_decay(args, cfg: ToolConfig) -> int:
    try:
        with open(args.input, encoding="utf-8-sig", newline="") as fh:
            trace = read_trace(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None

    if args.kind == "t1":
        res = fit_t1(trace)
        rep = Report("energy relaxation fit A exp(-t/T1) + C")
        rep.add("amplitude", res.amplitude)
        rep.add("t1_us", res.t1)
        rep.add("t1_stderr_us", res.t1_stderr)
        rep.add("baseline", res.baseline)
    else:
        try:
            res = fit_ramsey(trace)
        except InputError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_NOCONVERGE
        rep = Report("Ramsey fit A exp(-t/T2*) cos(2 pi df t + phi0) + C")
        rep.add("amplitude", res.amplitude)
        rep.add("t2_star_us", res.t2_star)
        rep.add("t2_star_stderr_us", res.t2_star_stderr)
        rep.add("detuning_mhz", res.detuning)
        rep.add("phase_rad", res.phase)
        rep.add("baseline", res.baseline)
        if args.t1 is not None:
            check_coherence(args.t1, res.t2_star)
    fit = res.fit
    rep.add("residual_norm", fit.residual_norm)
    rep.add("iterations", fit.iterations)
    rep.add("converged", fit.converged)
    rep.add("ill_conditioned", fit.ill_conditioned)
    if not fit.converged:
        rep.note(f"solver: {fit.message}")
    _emit(rep.text(), args.out, rep.json())
    return EXIT_OK if fit.converged else EXIT_NOCONVERGE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (falls back to $SHADOWFAB_CONFIG, then defaults)")
    common.add_argument("--out", help="write the result to this path")

    p = argparse.ArgumentParser(prog="shadowfab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="footprints and overlap of a two-line crossing")
    s.add_argument("--spec", help="JSON junction spec with two lines and two evaporation steps")
    s.add_argument("--w-open", type=float, help="opening width, um")
    s.add_argument("--theta", type=float, help="tilt from substrate normal, deg")
    s.add_argument("--phi", type=float, help="in-plane offset from line axis, deg")
    s.add_argument("--h", type=float, help="top resist thickness, um")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", parents=[common], help="grid sweep to CSV")
    for flag, unit in (("--w-open", "um"), ("--theta", "deg"), ("--phi", "deg"), ("--h", "um")):
        s.add_argument(flag, type=_parse_list, help=f"values in {unit}: a,b,c or start:stop:count")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("screen", parents=[common], help="screening statistics and design-curve fit")
    s.add_argument("input", help="CSV with device_id,design_width_um,raw_resistance_ohm")
    s.add_argument("--lax", action="store_true", help="skip bad rows and ignore unknown columns")
    s.add_argument("--weighting", choices=("uniform", "inverse_variance"), default="uniform")
    s.set_defaults(func=cmd_screen)

    s = sub.add_parser("qubit", parents=[common], help="R_n / I_c / E_J / E_C / f01 chain")
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--rn", type=float, help="normal-state resistance, ohm")
    mode.add_argument("--area", type=float, help="junction area, um^2 (needs resistance_area_product)")
    mode.add_argument("--f01", type=float, help="target qubit frequency, GHz")
    s.add_argument("--ec", type=float, help="charging energy E_C/h, GHz")
    s.set_defaults(func=cmd_qubit)

    s = sub.add_parser("fit-decay", parents=[common], help="T1 or Ramsey fit of a time_us,signal CSV")
    s.add_argument("kind", choices=("t1", "ramsey"))
    s.add_argument("input")
    s.add_argument("--t1", type=float, help="known T1 in us, enables the T2* <= 2 T1 check")
    s.set_defaults(func=cmd_fit_decay)
    return p


def _show_warning(message, category, filename, lineno, file=None, line=None):
    sys.stderr.write(f"warning: {message}\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.showwarning = _show_warning
            cfg = load_config(args.config)
            return args.func(args, cfg)
    except (ConfigurationError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

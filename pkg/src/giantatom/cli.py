"""Command-line entry point.

    giantatom simulate --gamma-tau 0.2 --phi0 pi --scheme cosine:chi=1,omega=5pi --out run.csv
    giantatom sweep --scheme cosine:chi=1,omega=5pi --param chi --values 0:6:0.05 \
        --observable pe --probe-time 2 --t-max 2 --out fig2c.csv
    giantatom output-fields --phi0 pi --phi0-prime pi/2 --varphi pi/2 --out fields.csv
    giantatom oracle-check --phi0 pi --t-max 10 --out check.csv
    giantatom preset fig3a --out figs/

Exit codes: 0 success, 1 validation, 2 numerical failure, 3 oracle threshold.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dde_core import NumericalError
from .modulation import SchemeParseError, parse_angle, parse_scheme
from .presets import PRESETS, preset_jobs
from .runner import (ConfigError, OracleThresholdError, Outputs, RunConfig, SweepConfig, oracle_check, run,
                     sweep)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_ORACLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _run_options(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON run config (or a sidecar written by a previous run)")
    p.add_argument("--gamma-tau", help="delay in units of 1/Gamma")
    p.add_argument("--phi0", help="static feedback phase (accepts a pi suffix)")
    p.add_argument("--phi0-prime", help="static output phase")
    p.add_argument("--varphi", help="coupling-path phase difference")
    p.add_argument("--scheme", help="constant | cosine:alpha=..,omega=..,theta=.. | linear:beta=..")
    p.add_argument("--t-max", help="horizon in units of 1/Gamma")
    p.add_argument("--steps-per-delay", type=int, help="grid points per delay (default: resolution rule)")
    p.add_argument("--fallback-dt", help="step for tau = 0")
    p.add_argument("--phase-trace", action="store_true", help="add the delta_phase column")
    p.add_argument("--out", help="output file")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="giantatom", description="Giant-atom spontaneous emission with frequency modulation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="integrate one configuration")
    _run_options(s)
    s.add_argument("--output-fields", action="store_true", help="add cl2/cr2 columns")

    f = sub.add_parser("output-fields", help="integrate and write left/right output intensities")
    _run_options(f)

    w = sub.add_parser("sweep", help="sweep one parameter")
    _run_options(w)
    w.add_argument("--output-fields", action="store_true")
    w.add_argument("--param", required=True, help="one of gamma_tau, chi, omega_tau, theta, phi0, "
                                                  "phi0_prime, varphi, beta")
    w.add_argument("--values", required=True, help="comma list or start:stop:step (inclusive)")
    w.add_argument("--observable", help="scalar probe: pe, re_ce, im_ce, cl2, cr2")
    w.add_argument("--probe-time", help="probe time in units of 1/Gamma")
    w.add_argument("--jobs", type=int, default=1)

    o = sub.add_parser("oracle-check", help="compare the DDE against the discretised-mode oracle")
    _run_options(o)
    o.add_argument("--bandwidth", type=float, default=40.0, help="half bandwidth W in units of Gamma")
    o.add_argument("--n-modes", type=int, default=2001, help="modes per branch (odd)")
    o.add_argument("--dt", type=float, help="oracle step (default 0.1 min(1/W, 2pi/Omega))")

    r = sub.add_parser("preset", help="run a named figure recipe")
    r.add_argument("name", choices=sorted(PRESETS))
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--jobs", type=int, default=1)
    return parser


def parse_values(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("range must be start:stop:step", "values")
        start, stop, step = (parse_angle(x, key="values") for x in parts)
        if step <= 0 or stop < start:
            raise ConfigError("range needs step > 0 and stop >= start", "values")
        count = int(round((stop - start) / step)) + 1
        return tuple(float(f"{v:.12g}") for v in start + step * np.arange(count))
    return tuple(parse_angle(x, key="values") for x in text.split(",") if x.strip())


def config_from_args(args, force_fields: bool = False) -> RunConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}", "config") from None
        cfg = RunConfig.from_dict(raw)
    else:
        cfg = RunConfig.from_dict({})
    p = cfg.params
    pvals = {}
    for key, attr in (("gamma_tau", "tau"), ("phi0", "phi0"), ("phi0_prime", "phi0_prime"), ("varphi", "varphi")):
        v = getattr(args, key)
        if v is not None:
            pvals[attr] = parse_angle(v, key=key)
    try:
        params = replace(p, **pvals) if pvals else p
    except ValueError as exc:
        raise ConfigError(str(exc), "gamma_tau") from None
    scheme = parse_scheme(args.scheme) if args.scheme is not None else cfg.scheme
    updates = {"params": params, "scheme": scheme}
    if args.t_max is not None:
        updates["t_max"] = parse_angle(args.t_max, key="t_max")
    if args.steps_per_delay is not None:
        updates["steps_per_delay"] = args.steps_per_delay
    if args.fallback_dt is not None:
        updates["fallback_dt"] = parse_angle(args.fallback_dt, key="fallback_dt")
    if args.out is not None:
        updates["out"] = args.out
    if args.format is not None:
        updates["format"] = args.format
    fields = force_fields or getattr(args, "output_fields", False) or cfg.outputs.output_fields
    updates["outputs"] = Outputs(population=cfg.outputs.population, output_fields=bool(fields),
                                 phase_trace=args.phase_trace or cfg.outputs.phase_trace)
    return replace(cfg, **updates)


def _cmd_simulate(args, force_fields=False):
    cfg = config_from_args(args, force_fields=force_fields)
    info = run(cfg)
    print(f"wrote {info['out']} ({info['steps'] + 1} rows)")
    if "chirality" in info:
        flag = " (truncated)" if info["truncated"] else ""
        print(f"chirality {info['chirality']:.6f}{flag}")
    return EXIT_OK


def _cmd_sweep(args):
    base = config_from_args(args)
    probe_t = parse_angle(args.probe_time, key="probe_time") if args.probe_time is not None else None
    scfg = SweepConfig(base, args.param, parse_values(args.values), args.observable, probe_t)
    info = sweep(scfg, jobs=max(1, args.jobs))
    if args.observable is not None:
        print(f"wrote {info['out']} ({len(info['values'])} points)")
    else:
        print(f"wrote {len(info['out'])} trajectories")
    return EXIT_OK


def _cmd_oracle(args):
    cfg = config_from_args(args)
    if args.t_max is None and not args.config:
        cfg = replace(cfg, t_max=10.0)
    try:
        info = oracle_check(cfg, w_over_gamma=args.bandwidth, n_modes=args.n_modes, dt=args.dt)
    except OracleThresholdError as exc:
        print("max_abs_pe_diff,norm_drift")
        print(exc.result["line"])
        raise
    print("max_abs_pe_diff,norm_drift")
    print(info["line"])
    return EXIT_OK


def _cmd_preset(args):
    outdir = Path(args.out)
    for kind, label, cfg in preset_jobs(args.name):
        target = outdir / f"{args.name}_{label}.csv"
        if kind == "run":
            run(cfg, target)
        else:
            sweep(cfg, target, jobs=max(1, args.jobs))
        print(f"wrote {target}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "output-fields":
            return _cmd_simulate(args, force_fields=True)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "oracle-check":
            return _cmd_oracle(args)
        if args.command == "preset":
            return _cmd_preset(args)
    except (ConfigError, SchemeParseError) as exc:
        key = getattr(exc, "key", None)
        print(f"error: {exc}" + (f" [key: {key}]" if key else ""), file=sys.stderr)
        return EXIT_VALIDATION
    except OracleThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    parser.error(f"unknown command {args.command}")
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

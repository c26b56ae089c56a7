"""Run configuration, artifact writing, sweeps and oracle checks.

All times written out are Gamma-scaled; the CLI fixes ``Gamma = 1`` so
``gamma_tau`` is the delay itself.  Files are written through a temporary
sibling and renamed into place, and nothing is written if the numerics
fail.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dde_core import NumericalError, SolverConfig, SystemParams, default_steps_per_delay, integrate_dde
from .mode_oracle import ModeGrid, integrate_modes, norm_drift
from .modulation import (Cosine, Linear, ModulationScheme, SchemeParseError, format_scheme, parse_angle,
                         parse_scheme)
from .observables import output_fields

__all__ = [
    "ConfigError",
    "OracleThresholdError",
    "Outputs",
    "RunConfig",
    "SweepConfig",
    "SWEEPABLE",
    "PE_DIFF_THRESHOLD",
    "NORM_DRIFT_THRESHOLD",
    "simulate",
    "run",
    "sweep",
    "oracle_check",
    "trajectory_columns",
    "sidecar_path",
]

PE_DIFF_THRESHOLD = 0.01
NORM_DRIFT_THRESHOLD = 1e-5

SWEEPABLE = ("gamma_tau", "chi", "omega_tau", "theta", "phi0", "phi0_prime", "varphi", "beta")
PROBE_OBSERVABLES = ("pe", "re_ce", "im_ce", "cl2", "cr2")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class OracleThresholdError(RuntimeError):
    pass


@dataclass(frozen=True)
class Outputs:
    population: bool = True
    output_fields: bool = False
    phase_trace: bool = False


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    scheme: ModulationScheme
    t_max: float = 20.0
    steps_per_delay: int | None = None
    fallback_dt: float = 1e-3
    outputs: Outputs = field(default_factory=Outputs)
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}", "format")
        # resolve once so validation errors surface at parse time
        self.solver()

    def solver(self) -> SolverConfig:
        n = self.steps_per_delay
        if n is None:
            n = default_steps_per_delay(self.params, self.scheme)
        try:
            return SolverConfig(steps_per_delay=n, t_max=self.t_max, fallback_dt=self.fallback_dt)
        except ValueError as exc:
            key = "steps_per_delay" if "steps_per_delay" in str(exc) else (
                "t_max" if "t_max" in str(exc) else "fallback_dt")
            raise ConfigError(str(exc), key) from None

    # -- (de)serialisation ----------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "config" in d and isinstance(d["config"], dict):
            d = d["config"]  # a sidecar
        known = {"params", "scheme", "solver", "outputs", "out", "format"}
        for k in d:
            if k not in known:
                raise ConfigError(f"unknown config key {k!r}", k)
        p = dict(d.get("params", {}))
        pkeys = {"gamma_tau", "phi0", "phi0_prime", "varphi"}
        for k in p:
            if k not in pkeys:
                raise ConfigError(f"unknown params key {k!r}", k)
        vals = {k: _number(p.get(k, 0.0 if k != "gamma_tau" else 0.2), k) for k in pkeys}
        try:
            params = SystemParams(Gamma=1.0, tau=vals["gamma_tau"], phi0=vals["phi0"],
                                  phi0_prime=vals["phi0_prime"], varphi=vals["varphi"])
        except ValueError as exc:
            raise ConfigError(str(exc), "gamma_tau") from None
        scheme_text = d.get("scheme", "constant")
        scheme = parse_scheme(scheme_text) if isinstance(scheme_text, str) else _bad("scheme")
        s = dict(d.get("solver", {}))
        for k in s:
            if k not in ("steps_per_delay", "t_max", "fallback_dt"):
                raise ConfigError(f"unknown solver key {k!r}", k)
        n = s.get("steps_per_delay")
        if n is not None:
            if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n:
                raise ConfigError(f"steps_per_delay must be an integer, got {n!r}", "steps_per_delay")
            n = int(n)
        o = dict(d.get("outputs", {}))
        for k in o:
            if k not in ("population", "output_fields", "phase_trace"):
                raise ConfigError(f"unknown outputs key {k!r}", k)
            if not isinstance(o[k], bool):
                raise ConfigError(f"outputs.{k} must be true or false", k)
        return cls(
            params=params, scheme=scheme,
            t_max=_number(s.get("t_max", 20.0), "t_max"),
            steps_per_delay=n,
            fallback_dt=_number(s.get("fallback_dt", 1e-3), "fallback_dt"),
            outputs=Outputs(**o), out=d.get("out"), format=d.get("format", "csv"),
        )

    def to_dict(self) -> dict:
        """Resolved form: angles expanded, default resolution filled in."""
        p = self.params
        return {
            "params": {"gamma_tau": p.tau * p.Gamma, "phi0": p.phi0, "phi0_prime": p.phi0_prime,
                       "varphi": p.varphi},
            "scheme": format_scheme(self.scheme),
            "solver": {"steps_per_delay": self.solver().steps_per_delay, "t_max": self.t_max,
                       "fallback_dt": self.fallback_dt},
            "outputs": {"population": self.outputs.population,
                        "output_fields": self.outputs.output_fields,
                        "phase_trace": self.outputs.phase_trace},
            "out": self.out,
            "format": self.format,
        }


def _bad(key):
    raise ConfigError(f"invalid value for {key}", key)


def _number(v, key) -> float:
    if isinstance(v, bool):
        raise ConfigError(f"{key} must be a number", key)
    try:
        x = parse_angle(v, key=key)
    except SchemeParseError as exc:
        raise ConfigError(str(exc), key) from None
    if not math.isfinite(x):
        raise ConfigError(f"{key} must be finite", key)
    return x


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    name: str
    values: tuple
    observable: str | None = None
    probe_time: float | None = None

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.name!r}; choose from {', '.join(SWEEPABLE)}", "param")
        if len(self.values) == 0:
            raise ConfigError("sweep needs at least one value", "values")
        sch = self.base.scheme
        if self.name in ("chi", "omega_tau", "theta") and not isinstance(sch, Cosine):
            raise ConfigError(f"{self.name} sweeps need a cosine scheme", "param")
        if self.name == "beta" and not isinstance(sch, Linear):
            raise ConfigError("beta sweeps need a linear scheme", "param")
        if (self.observable is None) != (self.probe_time is None):
            raise ConfigError("scalar probes need both observable and probe_time", "probe_time")
        if self.observable is not None:
            if self.observable not in PROBE_OBSERVABLES:
                raise ConfigError(f"unknown observable {self.observable!r}", "observable")
            if not 0 <= self.probe_time <= self.base.t_max:
                raise ConfigError("probe_time must lie in [0, t_max]", "probe_time")
        for v in self.values:
            self.point(v)

    def point(self, value: float) -> RunConfig:
        b = self.base
        p, s = b.params, b.scheme
        try:
            if self.name == "gamma_tau":
                p = replace(p, tau=value / p.Gamma)
            elif self.name in ("phi0", "phi0_prime", "varphi"):
                p = replace(p, **{self.name: value})
            elif self.name == "chi":
                s = Cosine.from_depth(value, s.omega, s.theta)
            elif self.name == "omega_tau":
                if p.tau == 0:
                    raise ConfigError("omega_tau sweeps need tau > 0", "param")
                s = Cosine.from_depth(s.chi, value / p.tau, s.theta)
            elif self.name == "theta":
                s = Cosine(s.alpha, s.omega, value)
            elif self.name == "beta":
                s = Linear(value)
            return replace(b, params=p, scheme=s)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"sweep value {value!r}: {exc}", self.name) from None


# -- numerics ----------------------------------------------------------------

def simulate(cfg: RunConfig):
    """Integrate one configuration; returns ``(trajectory, trace or None)``."""
    traj = integrate_dde(cfg.params, cfg.scheme, cfg.solver())
    trace = output_fields(traj) if cfg.outputs.output_fields else None
    return traj, trace


def _delta_column(traj) -> np.ndarray:
    # zero before the feedback switches on, where no delay window exists yet
    out = np.zeros(len(traj.times))
    n = traj.steps_per_delay
    if n is not None and n < len(out):
        out[n:] = traj.scheme.excess_phase(traj.times[n:], traj.params.tau)
    return out


def trajectory_columns(cfg: RunConfig, traj, trace=None) -> dict[str, np.ndarray]:
    G = cfg.params.Gamma
    cols = {
        "t_gamma": traj.times * G,
        "re_ce": traj.c_e.real,
        "im_ce": traj.c_e.imag,
        "pe": np.abs(traj.c_e) ** 2,
    }
    if cfg.outputs.phase_trace:
        cols["delta_phase"] = _delta_column(traj)
    if trace is not None:
        cols["cl2"] = trace.left_intensity
        cols["cr2"] = trace.right_intensity
    return cols


# -- files -------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(cols: dict[str, np.ndarray], fmt: str) -> str:
    if fmt == "json":
        data = {k: [float(v) for v in arr] for k, arr in cols.items()}
        return json.dumps({"columns": list(cols), "data": data}, indent=None) + "\n"
    names = list(cols)
    arrs = [cols[k] for k in names]
    lines = [",".join(names)]
    for row in zip(*arrs):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.stem + ".config.json")


def _check_finite(cols):
    for k, v in cols.items():
        if not np.all(np.isfinite(v)):
            raise NumericalError(f"non-finite values in column {k}")


def run(cfg: RunConfig, out: str | os.PathLike | None = None) -> dict:
    """Simulate and write the trajectory file plus its JSON sidecar.

    Returns a summary dict (paths, chirality when output fields were requested).
    """
    target = out if out is not None else cfg.out
    if target is None:
        raise ConfigError("no output path given", "out")
    target = Path(target)
    traj, trace = simulate(cfg)
    cols = trajectory_columns(cfg, traj, trace)
    _check_finite(cols)
    meta = {
        "version": __version__,
        "method": traj.meta["method"],
        "step": traj.step,
        "steps": traj.meta["steps"],
        "t_end": float(traj.times[-1]),
    }
    if trace is not None:
        meta["chirality"] = trace.chirality
        meta["truncated"] = trace.truncated
    resolved = replace(cfg, out=str(target))
    _atomic_write(target, _render(cols, cfg.format))
    sidecar = sidecar_path(target)
    _atomic_write(sidecar, json.dumps({"config": resolved.to_dict(), "solver_meta": meta},
                                      indent=2, sort_keys=True) + "\n")
    return {"out": str(target), "sidecar": str(sidecar), **meta}


def _probe(cfg: RunConfig, observable: str, t: float) -> float:
    traj, trace = simulate(replace(cfg, outputs=Outputs(output_fields=observable in ("cl2", "cr2"))))
    if observable in ("cl2", "cr2"):
        series = trace.left_intensity if observable == "cl2" else trace.right_intensity
        return float(np.interp(t, trace.t_tilde, series))
    c = complex(traj.at(t))
    return {"pe": abs(c) ** 2, "re_ce": c.real, "im_ce": c.imag}[observable]


def _sweep_point(args):
    cfg, observable, t, path = args
    if observable is not None:
        return _probe(cfg, observable, t)
    return run(cfg, path)


def _stamp(value: float) -> str:
    return ("%.10g" % value).replace("+", "")


def sweep(cfg: SweepConfig, out: str | os.PathLike | None = None, jobs: int = 1):
    """Run every sweep point in the given order.

    Scalar-probe sweeps write one ``value,probe`` table; trajectory sweeps
    write one file per value, stamped with the value.  Any failing point
    aborts the sweep and names the value.
    """
    target = out if out is not None else cfg.base.out
    if target is None:
        raise ConfigError("no output path given", "out")
    target = Path(target)
    points = [cfg.point(v) for v in cfg.values]
    if cfg.observable is None:
        suffix = target.suffix or (".json" if cfg.base.format == "json" else ".csv")
        paths = [target.with_name(f"{target.stem}_{cfg.name}_{_stamp(v)}{suffix}") for v in cfg.values]
    else:
        paths = [None] * len(points)
    tasks = [(p, cfg.observable, cfg.probe_time, path) for p, path in zip(points, paths)]

    results = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_point, t) for t in tasks]
            for v, fut in zip(cfg.values, futures):
                results.append(_collect(v, fut.result))
    else:
        for v, t in zip(cfg.values, tasks):
            results.append(_collect(v, lambda t=t: _sweep_point(t)))

    if cfg.observable is not None:
        probes = np.array(results, dtype=float)
        if not np.all(np.isfinite(probes)):
            raise NumericalError("non-finite probe value")
        text = "value,probe\n" + "".join(f"{_fmt(v)},{_fmt(r)}\n" for v, r in zip(cfg.values, probes))
        _atomic_write(target, text)
        return {"out": str(target), "values": list(cfg.values), "probes": probes.tolist()}
    return {"out": [r["out"] for r in results]}


def _collect(value, call):
    try:
        return call()
    except (ConfigError, SchemeParseError):
        raise
    except NumericalError as exc:
        raise NumericalError(f"sweep point {value!r} failed: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"sweep point {value!r} failed: {exc}", "values") from exc


def oracle_check(cfg: RunConfig, out: str | os.PathLike | None = None, w_over_gamma: float = 40.0,
                 n_modes: int = 2001, dt: float | None = None, t_max: float | None = None) -> dict:
    """Run the DDE and the mode-comb oracle side by side.

    Writes ``<out>`` (DDE trajectory), ``<stem>_oracle.csv`` (with a norm
    column) and ``<stem>_report.csv``; raises :class:`OracleThresholdError`
    after writing when either tolerance is exceeded.
    """
    target = out if out is not None else cfg.out
    if target is None:
        raise ConfigError("no output path given", "out")
    target = Path(target)
    params = cfg.params
    try:
        grid = ModeGrid.for_params(params, w_over_gamma=w_over_gamma, n_modes=n_modes)
    except ValueError as exc:
        raise ConfigError(str(exc), "n_modes") from None
    horizon = min(cfg.t_max if t_max is None else t_max, 0.5 * grid.recurrence_time)
    dde_cfg = replace(cfg, t_max=horizon, out=str(target))
    traj, trace = simulate(dde_cfg)
    orc = integrate_modes(params, cfg.scheme, grid, dt=dt, t_max=horizon, keep_modes=False)
    pe_dde = np.abs(traj.at(np.minimum(orc.times, traj.times[-1]))) ** 2
    diff = float(np.max(np.abs(orc.population - pe_dde)))
    drift = norm_drift(orc)
    dde_cols = trajectory_columns(dde_cfg, traj, trace)
    orc_cols = {"t_gamma": orc.times * params.Gamma, "re_ce": orc.c_e.real, "im_ce": orc.c_e.imag,
                "pe": orc.population, "norm": orc.norm}
    _check_finite(dde_cols)
    _check_finite(orc_cols)
    _atomic_write(target, _render(dde_cols, "csv"))
    oracle_path = target.with_name(target.stem + "_oracle.csv")
    _atomic_write(oracle_path, _render(orc_cols, "csv"))
    report_path = target.with_name(target.stem + "_report.csv")
    line = f"{_fmt(diff)},{_fmt(drift)}"
    _atomic_write(report_path, "max_abs_pe_diff,norm_drift\n" + line + "\n")
    result = {"max_abs_pe_diff": diff, "norm_drift": drift, "report": str(report_path),
              "oracle": str(oracle_path), "out": str(target), "line": line,
              "dt": orc.dt, "half_bandwidth": grid.half_bandwidth, "n_modes": grid.n_modes,
              "horizon": horizon}
    if diff > PE_DIFF_THRESHOLD or drift > NORM_DRIFT_THRESHOLD:
        raise _threshold_error(result)
    return result


def _threshold_error(result):
    err = OracleThresholdError(
        f"oracle mismatch: max_abs_pe_diff={result['max_abs_pe_diff']:.3g} (limit {PE_DIFF_THRESHOLD}), "
        f"norm_drift={result['norm_drift']:.3g} (limit {NORM_DRIFT_THRESHOLD})"
    )
    err.result = result
    return err

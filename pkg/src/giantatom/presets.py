"""Named parameter sets (``fig1a`` .. ``fig5b``).

Each preset expands to a list of jobs: ``("run", label, RunConfig)`` for a
single curve or ``("sweep", label, SweepConfig)`` for a scalar sweep.
Curve families (the chi, Omega tau and beta lists) are representative
choices.
"""
from __future__ import annotations

import math

import numpy as np

from .dde_core import SystemParams
from .modulation import Constant, Cosine, Linear
from .runner import Outputs, RunConfig, SweepConfig

PI = math.pi

__all__ = ["PRESETS", "preset_jobs"]


def _cos_tau(chi, omega_tau, tau, theta=0.0):
    return Cosine.from_depth(chi, omega_tau / tau, theta)


def _fig1(phi0):
    tau = 0.2
    p = SystemParams(1.0, tau, phi0, 0.0, 0.0)
    jobs = [("run", "constant", RunConfig(p, Constant(), t_max=5.0))]
    for label, wt in (("omega_tau_2pi", 2 * PI), ("omega_tau_1.5pi", 1.5 * PI), ("omega_tau_pi", PI)):
        jobs.append(("run", label, RunConfig(p, _cos_tau(1.0, wt, tau), t_max=5.0)))
    if phi0 == 0.0:
        jobs.append(("run", "small_atom", RunConfig(SystemParams(1.0, 0.0, 0.0), Constant(), t_max=5.0)))
        # tau beyond the horizon: the feedback never arrives
        jobs.append(("run", "tau_inf", RunConfig(SystemParams(1.0, 1000.0, 0.0), Constant(),
                                                 t_max=5.0, steps_per_delay=200_000)))
    return jobs


def _fig2(phi0):
    tau, omega = 0.2, 5 * PI
    p = SystemParams(1.0, tau, phi0, 0.0, 0.0)
    return [("run", f"chi_{chi:g}", RunConfig(p, Cosine.from_depth(chi, omega), t_max=5.0))
            for chi in (0.0, 0.5, 1.0, 1.5, 2.0)]


def _fig2c():
    p = SystemParams(1.0, 0.2, 0.0, 0.0, 0.0)
    base = RunConfig(p, Cosine.from_depth(1.0, 5 * PI), t_max=2.0)
    chis = tuple(float(x) for x in np.round(np.arange(0, 121) * 0.05, 10))
    return [("sweep", "pe_at_2", SweepConfig(base, "chi", chis, "pe", 2.0))]


def _fig2d():
    p = SystemParams(1.0, 0.2, 0.0, 0.0, 0.0)
    return [("run", f"theta_{k}pi_2", RunConfig(p, Cosine.from_depth(1.0, 5 * PI, k * PI / 2), t_max=5.0))
            for k in range(4)]


def _fig3a():
    tau = 10.0
    p = SystemParams(1.0, tau, 0.0, 0.0, 0.0)
    return [("run", f"chi_{chi:g}", RunConfig(p, Cosine.from_depth(chi, 0.5 * PI), t_max=50.0))
            for chi in (0.0, 0.25, 0.5, 1.0)]


def _fig3c():
    tau = 10.0
    p = SystemParams(1.0, tau, 0.0, 0.0, 0.0)
    jobs = [("run", f"omega_{w:g}pi", RunConfig(p, Cosine.from_depth(0.5, w * PI), t_max=40.0))
            for w in (5.5, 80.3)]
    base = RunConfig(p, Cosine.from_depth(0.5, 5.5 * PI), t_max=11.0)
    # Omega / Gamma from 5 pi to 10 pi in steps of 0.1 pi, as Omega tau
    wt = tuple(float(tau * k * 0.1 * PI) for k in range(50, 101))
    jobs.append(("sweep", "inset_pe_at_11", SweepConfig(base, "omega_tau", wt, "pe", 11.0)))
    return jobs


def _fig4(varphi, chi):
    p = SystemParams(1.0, 0.2, PI, PI / 2, varphi)
    scheme = Cosine.from_depth(chi, 5 * PI) if chi else Constant()
    return [("run", "fields", RunConfig(p, scheme, t_max=8.0, outputs=Outputs(output_fields=True)))]


def _fig5():
    p = SystemParams(1.0, 1.0, PI, PI / 2, PI / 2)
    return [("run", f"beta_{b:g}", RunConfig(p, Linear(b), t_max=10.0, outputs=Outputs(output_fields=True)))
            for b in (0.0, 0.5, 1.0, 2.0)]


PRESETS = {
    "fig1a": lambda: _fig1(PI),
    "fig1b": lambda: _fig1(0.0),
    "fig2a": lambda: _fig2(PI),
    "fig2b": lambda: _fig2(0.0),
    "fig2c": _fig2c,
    "fig2d": _fig2d,
    "fig3a": _fig3a,
    "fig3c": _fig3c,
    "fig4a": lambda: _fig4(0.0, 1.0),
    "fig4b": lambda: _fig4(PI / 4, 1.0),
    "fig4c": lambda: _fig4(PI / 2, 1.0),
    "fig4d": lambda: _fig4(PI / 2, 0.0),
    "fig4e": lambda: _fig4(PI / 2, 0.5),
    "fig4f": lambda: _fig4(PI / 2, 2.0),
    "fig5a": _fig5,
    "fig5b": _fig5,
}


def preset_jobs(name: str):
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None

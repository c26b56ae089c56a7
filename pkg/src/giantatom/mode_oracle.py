"""Brute-force check: the atom coupled to a finite comb of waveguide modes.

Instead of eliminating the field, the single-excitation amplitudes of the
atom and of every discretised mode are stepped together.  Two branches are
kept explicitly, right movers ``k = k0 + nu / v_g`` and left movers
``k = -(k0 + nu / v_g)``, each on the detuning comb ``nu in [-W, W]``.
With ``k d = +-(phi0 + nu tau)`` the coupling of mode ``nu`` to the atom is

    right:  G (1 + e^{i varphi} e^{+i (phi0 + nu tau)})
    left:   G (1 + e^{i varphi} e^{-i (phi0 + nu tau)})

and ``G = sqrt(Gamma delta / 4 pi)`` for comb spacing ``delta``.  The free
mode rotation ``exp(-i nu t)`` and the atomic frame phase are applied
analytically (interaction picture), so the stepper only sees the coupling.

Nothing here shares code with :mod:`giantatom.dde_core`; agreement between the
two is the point.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dde_core import SystemParams
from .modulation import Constant, ModulationScheme, accumulated_phase

__all__ = [
    "ModeGrid",
    "OracleTrajectory",
    "integrate_modes",
    "norm_drift",
    "default_dt",
    "field_from_modes",
]


@dataclass(frozen=True)
class ModeGrid:
    """Uniform detuning comb ``nu_j = -W + j delta``, shared by both branches."""

    half_bandwidth: float = 40.0
    n_modes: int = 2001

    def __post_init__(self):
        if not (math.isfinite(self.half_bandwidth) and self.half_bandwidth > 0):
            raise ValueError("half_bandwidth must be > 0")
        if int(self.n_modes) != self.n_modes or self.n_modes < 3 or self.n_modes % 2 == 0:
            raise ValueError(f"n_modes must be an odd integer >= 3, got {self.n_modes!r}")

    @classmethod
    def for_params(cls, params: SystemParams, w_over_gamma: float = 40.0, n_modes: int = 2001):
        return cls(half_bandwidth=w_over_gamma * params.Gamma, n_modes=n_modes)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_bandwidth / (self.n_modes - 1)

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing

    @property
    def detunings(self) -> np.ndarray:
        return np.linspace(-self.half_bandwidth, self.half_bandwidth, self.n_modes)

    def coupling(self, Gamma: float) -> float:
        # each branch then decays at Gamma/2 by the golden rule
        return math.sqrt(Gamma * self.spacing / (4.0 * math.pi))


@dataclass(frozen=True, eq=False)
class OracleTrajectory:
    times: np.ndarray
    c_e: np.ndarray
    norm: np.ndarray
    params: SystemParams
    scheme: ModulationScheme
    grid: ModeGrid
    dt: float
    right_modes: np.ndarray | None = None
    left_modes: np.ndarray | None = None

    @property
    def population(self) -> np.ndarray:
        return np.abs(self.c_e) ** 2


def default_dt(grid: ModeGrid, scheme: ModulationScheme) -> float:
    """Largest step allowed: ``0.1 min(1/W, 2 pi / Omega)``."""
    bound = 1.0 / grid.half_bandwidth
    omega = scheme.modulation_frequency()
    if omega:
        bound = min(bound, 2.0 * math.pi / omega)
    return 0.1 * bound


def _frame_phase(scheme: ModulationScheme, t: float) -> float:
    if isinstance(scheme, Constant):
        return 0.0
    return float(accumulated_phase(scheme, t))


def integrate_modes(params: SystemParams, scheme: ModulationScheme | None = None,
                    grid: ModeGrid | None = None, dt: float | None = None,
                    t_max: float = 10.0, keep_modes: bool = True) -> OracleTrajectory:
    """Step atom + ``2 n_modes`` waveguide amplitudes with classic RK4.

    Raises ``ValueError`` when the comb recurs before ``t_max`` or ``dt`` is
    coarser than ``0.1 min(1/W, 2 pi/Omega)``.
    """
    scheme = Constant() if scheme is None else scheme
    grid = ModeGrid.for_params(params) if grid is None else grid
    bound = default_dt(grid, scheme)
    dt = bound if dt is None else dt
    if not (math.isfinite(t_max) and t_max > 0):
        raise ValueError("t_max must be > 0")
    if not (dt > 0 and dt <= bound * (1 + 1e-12)):
        raise ValueError(f"dt={dt!r} violates dt <= {bound!r}")
    T_rec = grid.recurrence_time
    if T_rec <= t_max:
        raise ValueError(f"comb recurrence time {T_rec:.4g} does not exceed t_max={t_max!r}")
    if t_max > 0.5 * T_rec:
        warnings.warn(f"t_max={t_max!r} exceeds half the comb recurrence time {T_rec:.4g}", RuntimeWarning)
    if scheme.max_excursion(t_max) > grid.half_bandwidth:
        warnings.warn("atomic frequency excursion leaves the mode comb", RuntimeWarning)

    nu = grid.detunings
    G = grid.coupling(params.Gamma)
    kd = params.phi0 + nu * params.tau
    e_var = np.exp(1j * params.varphi)
    uR = G * (1.0 + e_var * np.exp(1j * kd))
    uL = G * (1.0 + e_var * np.exp(-1j * kd))
    uRc, uLc = np.conj(uR), np.conj(uL)

    def rhs(t, ce, bR, bL):
        rot = np.exp(-1j * nu * t)
        fr = np.exp(1j * _frame_phase(scheme, t))
        dce = -1j * fr * (np.sum(uR * rot * bR) + np.sum(uL * rot * bL))
        back = -1j * ce * np.conj(rot) / fr
        return dce, uRc * back, uLc * back

    M = max(1, math.ceil(t_max / dt - 1e-9))
    times = np.arange(M + 1) * dt
    ce_hist = np.empty(M + 1, dtype=complex)
    norm = np.empty(M + 1)

    ce = 1.0 + 0.0j
    bR = np.zeros(grid.n_modes, dtype=complex)
    bL = np.zeros(grid.n_modes, dtype=complex)
    ce_hist[0] = ce
    norm[0] = 1.0
    for n in range(M):
        t = times[n]
        k1 = rhs(t, ce, bR, bL)
        k2 = rhs(t + 0.5 * dt, ce + 0.5 * dt * k1[0], bR + 0.5 * dt * k1[1], bL + 0.5 * dt * k1[2])
        k3 = rhs(t + 0.5 * dt, ce + 0.5 * dt * k2[0], bR + 0.5 * dt * k2[1], bL + 0.5 * dt * k2[2])
        k4 = rhs(t + dt, ce + dt * k3[0], bR + dt * k3[1], bL + dt * k3[2])
        ce = ce + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        bR = bR + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        bL = bL + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        ce_hist[n + 1] = ce
        norm[n + 1] = abs(ce) ** 2 + np.sum(np.abs(bR) ** 2) + np.sum(np.abs(bL) ** 2)

    return OracleTrajectory(
        times=times, c_e=ce_hist, norm=norm, params=params, scheme=scheme, grid=grid, dt=dt,
        right_modes=bR if keep_modes else None, left_modes=bL if keep_modes else None,
    )


def norm_drift(traj: OracleTrajectory) -> float:
    """``max_t |norm(t) - 1|``."""
    return float(np.max(np.abs(traj.norm - 1.0)))


def field_from_modes(traj: OracleTrajectory, x: float) -> complex:
    """Real-space field at the final time from the stored mode amplitudes.

    Positions are measured as travel times (``v_g = 1``), the static phase
    per unit length is ``phi0 / tau``, and the result is in the same frame as
    the stored amplitudes (carrier ``exp(-i omega_0 t)`` dropped).  The
    overall ``-i sqrt(Gamma / 2)`` prefactor of the continuum expression is
    included.
    """
    if traj.right_modes is None:
        raise ValueError("trajectory was computed without keep_modes=True")
    p = traj.params
    nu = traj.grid.detunings
    t = traj.times[-1]
    k0x = p.phi0 * x / p.tau if p.tau > 0 else 0.0
    rot = np.exp(-1j * nu * t)
    # b_j = c_k sqrt(dk) and c(x) = (2 pi)^{-1/2} sum c_k e^{ikx} dk
    w = math.sqrt(traj.grid.spacing / (2.0 * math.pi))
    right = np.sum(traj.right_modes * rot * np.exp(1j * (k0x + nu * x)))
    left = np.sum(traj.left_modes * rot * np.exp(-1j * (k0x + nu * x)))
    return complex(w * (right + left))

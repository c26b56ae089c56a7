"""Output fields at detectors left and right of the giant atom.

For a detector at ``x = d + l`` (right) or ``x = -l`` (left) and retarded
time ``t~ = t - l / v_g`` the field amplitudes, in units of
``sqrt(Gamma / 2 v_g)``, are

    A_R(t~) = c(t~) Theta(t~) + exp(i Xi_+(t~)) c(t~ - tau) Theta(t~ - tau)
    A_L(t~) = c(t~) Theta(t~) + exp(i Xi_-(t~)) c(t~ - tau) Theta(t~ - tau)

with ``Xi_+- = phi0_prime +- varphi + Delta(t~, tau)``.  ``c`` is the
rotating-frame amplitude; the excess phase ``Delta`` appears because the
two terms were emitted at times one delay apart and the atomic frame phase
advanced by ``Delta`` in between.  ``phi0_prime`` is an independent input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .dde_core import AmplitudeTrajectory, wrap_phase
from .modulation import ModulationScheme, accumulated_phase

__all__ = [
    "OutputFieldTrace",
    "TruncatedTraceError",
    "output_fields",
    "field_at",
    "chirality",
    "DECAY_THRESHOLD",
]

# Both intensities must have fallen below this at the end of the trace for
# the chirality metric to be unflagged.
DECAY_THRESHOLD = 1e-6


class TruncatedTraceError(ValueError):
    """The trace ends before the emission has died out."""


@dataclass(frozen=True, eq=False)
class OutputFieldTrace:
    t_tilde: np.ndarray
    left_intensity: np.ndarray
    right_intensity: np.ndarray
    tau: float
    chirality: float
    truncated: bool
    left_amplitude: np.ndarray | None = None
    right_amplitude: np.ndarray | None = None

    @property
    def shifted_time(self) -> np.ndarray:
        """``t~ - tau``, the abscissa used for plotting."""
        return self.t_tilde - self.tau


def _delayed_term_phase(traj: AmplitudeTrajectory, scheme: ModulationScheme, sign: int,
                        suppress_modulation: bool):
    p = traj.params
    base = wrap_phase(p.phi0_prime + sign * p.varphi)
    n_delay = traj.steps_per_delay or 0
    xi = np.full(len(traj.times), base)
    if not suppress_modulation and n_delay < len(traj.times):
        xi[n_delay:] += scheme.excess_phase(traj.times[n_delay:], p.tau)
    return xi


def output_fields(traj: AmplitudeTrajectory, scheme: ModulationScheme | None = None,
                  suppress_modulation: bool = False) -> OutputFieldTrace:
    """Left/right detector intensities on the trajectory grid (``t~ = t_n``).

    ``suppress_modulation`` drops ``Delta`` from the output phases while keeping
    the modulated amplitude; it exists to separate the two routes by which
    the modulation reaches the detectors.
    """
    scheme = traj.scheme if scheme is None else scheme
    if scheme != traj.scheme:
        raise ValueError("scheme does not match the one the trajectory was integrated with")
    p = traj.params
    c = traj.c_e
    delayed = traj.delayed(traj.steps_per_delay or 0)
    xi_r = _delayed_term_phase(traj, scheme, +1, suppress_modulation)
    xi_l = _delayed_term_phase(traj, scheme, -1, suppress_modulation)
    a_r = c + np.exp(1j * xi_r) * delayed
    a_l = c + np.exp(1j * xi_l) * delayed
    right = np.abs(a_r) ** 2
    left = np.abs(a_l) ** 2
    truncated = bool(right[-1] >= DECAY_THRESHOLD or left[-1] >= DECAY_THRESHOLD)
    trace = OutputFieldTrace(
        t_tilde=traj.times.copy(), left_intensity=left, right_intensity=right, tau=p.tau,
        chirality=math.nan, truncated=truncated, left_amplitude=a_l, right_amplitude=a_r,
    )
    object.__setattr__(trace, "chirality", chirality(trace, allow_truncated=True))
    return trace


def chirality(trace: OutputFieldTrace, allow_truncated: bool = False) -> float:
    """``(int R - int L) / (int R + int L)`` over ``t~ > tau`` (trapezoidal rule).

    Raises :class:`TruncatedTraceError` if the trace is flagged as truncated,
    unless ``allow_truncated`` is set.
    """
    if trace.truncated and not allow_truncated:
        raise TruncatedTraceError(
            "output intensities have not decayed below "
            f"{DECAY_THRESHOLD:g} by t~={trace.t_tilde[-1]:.6g}"
        )
    t = trace.t_tilde
    # first node at or after tau; the slack absorbs n * (tau / N) rounding
    mask = t >= trace.tau * (1 - 1e-12)
    if mask.sum() < 2:
        return 0.0
    r = trapezoid(trace.right_intensity[mask], t[mask])
    l = trapezoid(trace.left_intensity[mask], t[mask])
    tot = r + l
    if tot == 0.0:
        return 0.0
    return float(np.clip((r - l) / tot, -1.0, 1.0))


def field_at(traj: AmplitudeTrajectory, scheme: ModulationScheme | None, x: float, t: float) -> complex:
    """Real-space field at position ``x`` and time ``t``.

    ``x`` is measured as a travel time (``v_g = 1``), so the coupling points
    sit at ``x = 0`` and ``x = tau``.  The four retarded contributions are
    gated by their causality step functions; the static phase per unit
    length is ``phi0_prime / tau`` and the common prefactor
    ``-i sqrt(2 pi) g / v_g`` is dropped, matching :func:`output_fields`.
    Each term carries the frame phase ``exp(-i int_0^{t_e} [omega - omega_0])``
    of its emission time ``t_e`` (the carrier ``exp(-i omega_0 t)`` is dropped).
    """
    scheme = traj.scheme if scheme is None else scheme
    if scheme != traj.scheme:
        raise ValueError("scheme does not match the one the trajectory was integrated with")
    if t < 0:
        raise ValueError("t must be >= 0")
    p = traj.params
    d = p.tau
    k = p.phi0_prime / d if d > 0 else 0.0
    e_var = np.exp(-1j * p.varphi)

    def emitted(te):
        return complex(traj.at(te)) * np.exp(-1j * float(accumulated_phase(scheme, te)))

    total = 0j
    # Theta(0) counts as active, as for the feedback switch
    if x >= 0 and t - x >= 0:
        total += np.exp(1j * k * x) * emitted(t - x)
    if x <= 0 and t + x >= 0 and x != 0:
        total += np.exp(-1j * k * x) * emitted(t + x)
    if x >= d and t - x + d >= 0:
        total += e_var * np.exp(1j * k * (x - d)) * emitted(t - x + d)
    if x <= d and t + x - d >= 0 and x != d:
        total += e_var * np.exp(-1j * k * (x - d)) * emitted(t + x - d)
    return complex(total)

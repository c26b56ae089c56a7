"""Frequency-modulation schemes for the atomic transition.

Everything here lives in the frame rotating at the background frequency
omega_0, so a scheme only describes the excess ``omega(t) - omega_0``.
The background frequency never appears as a number; its effect on the
feedback and output phases is carried by the static phases ``phi0`` and
``phi0_prime`` of :class:`giantatom.dde_core.SystemParams`.

The excess phase accumulated over a delay window,

    Delta(t, tau) = integral_{t - tau}^{t} [omega(t') - omega_0] dt',

is the primitive quantity.  Closed forms are provided for the built-in
schemes; a subclass that only implements :meth:`ModulationScheme.shift`
falls back to adaptive quadrature.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "ModulationScheme",
    "Constant",
    "Cosine",
    "Linear",
    "SchemeParseError",
    "omega_shift",
    "delta_phase",
    "delta_phase_quad",
    "accumulated_phase",
    "dynamical_phase",
    "bessel_j_sequence",
    "jacobi_anger_factor",
    "parse_angle",
    "parse_scheme",
    "format_scheme",
]

# Slack allowed on ``t >= tau`` for grid times built as n * (tau / N).
_CAUSAL_SLACK = 1e-9


class SchemeParseError(ValueError):
    """Raised for malformed scheme strings; ``key`` names the offending field."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _check_window(t, tau):
    t = np.asarray(t, dtype=float)
    if tau < 0:
        raise ValueError(f"delay must be non-negative, got tau={tau!r}")
    if np.any(t < tau - _CAUSAL_SLACK * max(1.0, tau)):
        raise ValueError(f"excess phase needs t >= tau (tau={tau!r}, min t={t.min()!r})")
    return t


class ModulationScheme:
    """Base class: the excess frequency ``omega(t) - omega_0``.

    Subclasses must implement :meth:`shift`.  :meth:`excess_phase` defaults
    to numerical quadrature and should be overridden when a closed form
    exists.
    """

    kind = "custom"

    def shift(self, t):
        raise NotImplementedError

    def excess_phase(self, t, tau: float):
        return delta_phase_quad(self, t, tau)

    def max_excursion(self, t_max: float) -> float:
        """Upper bound of ``|omega(t) - omega_0|`` on ``[0, t_max]``."""
        ts = np.linspace(0.0, t_max, 2001)
        return float(np.max(np.abs(self.shift(ts))))

    def modulation_frequency(self) -> float | None:
        return None


@dataclass(frozen=True)
class Constant(ModulationScheme):
    kind = "constant"

    def shift(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    def excess_phase(self, t, tau: float):
        t = _check_window(t, tau)
        return np.zeros_like(t)[()]

    def max_excursion(self, t_max: float) -> float:
        return 0.0


@dataclass(frozen=True)
class Cosine(ModulationScheme):
    """``omega(t) - omega_0 = alpha * cos(Omega * t + theta)``.

    The modulation depth ``chi = alpha / Omega`` sets the amplitude of the
    phase excursion: ``|Delta| <= 2 chi``.
    """

    alpha: float
    omega: float
    theta: float = 0.0

    kind = "cosine"

    def __post_init__(self):
        for name in ("alpha", "omega", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"cosine scheme: {name} must be finite")
        if not self.omega > 0:
            raise ValueError(f"cosine scheme: omega must be > 0, got {self.omega!r}")

    @classmethod
    def from_depth(cls, chi: float, omega: float, theta: float = 0.0) -> "Cosine":
        return cls(alpha=chi * omega, omega=omega, theta=theta)

    @property
    def chi(self) -> float:
        return self.alpha / self.omega

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def shift(self, t):
        t = np.asarray(t, dtype=float)
        return (self.alpha * np.cos(self.omega * t + self.theta))[()]

    def excess_phase(self, t, tau: float):
        # chi [sin(Wt + th) - sin(W(t - tau) + th)] written as a product so
        # that W tau = 2 n pi gives zero to rounding.
        t = _check_window(t, tau)
        half = 0.5 * self.omega * tau
        out = 2.0 * self.chi * math.sin(half) * np.cos(self.omega * t - half + self.theta)
        return out[()]

    def max_excursion(self, t_max: float) -> float:
        return abs(self.alpha)

    def modulation_frequency(self) -> float | None:
        return self.omega


@dataclass(frozen=True)
class Linear(ModulationScheme):
    """``omega(t) - omega_0 = beta * t``.

    Only meaningful while ``beta * t`` stays small against omega_0, which
    cannot be checked here since omega_0 is not represented.
    """

    beta: float

    kind = "linear"

    def __post_init__(self):
        if not math.isfinite(self.beta):
            raise ValueError("linear scheme: beta must be finite")

    def shift(self, t):
        return (self.beta * np.asarray(t, dtype=float))[()]

    def excess_phase(self, t, tau: float):
        t = _check_window(t, tau)
        return (self.beta * tau * (t - 0.5 * tau))[()]

    def max_excursion(self, t_max: float) -> float:
        return abs(self.beta) * t_max


def omega_shift(scheme: ModulationScheme, t):
    """Excess transition frequency ``omega(t) - omega_0`` at time(s) ``t``."""
    return scheme.shift(t)


def delta_phase(scheme: ModulationScheme, t, tau: float):
    """Excess phase accumulated over ``[t - tau, t]``; requires ``t >= tau``."""
    return scheme.excess_phase(t, tau)


def delta_phase_quad(scheme: ModulationScheme, t, tau: float, tol: float = 1e-12):
    """Adaptive-quadrature evaluation of the excess phase.

    Used for schemes without a closed form and as an independent check of
    the closed forms.
    """
    t = _check_window(t, tau)

    def one(ti):
        if tau == 0.0:
            return 0.0
        a = max(ti - tau, 0.0)
        f = lambda s: float(scheme.shift(s))
        val, _ = integrate.quad(f, a, ti, epsabs=tol, epsrel=tol, limit=1000)
        return val

    if t.ndim == 0:
        return one(float(t))
    return np.array([one(float(ti)) for ti in t.ravel()]).reshape(t.shape)


def accumulated_phase(scheme: ModulationScheme, t):
    """``integral_0^t [omega - omega_0]``, the frame phase picked up since t=0."""
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        return scheme.excess_phase(t, float(t))
    return np.array([scheme.excess_phase(ti, ti) for ti in t.ravel()]).reshape(t.shape)


def dynamical_phase(scheme: ModulationScheme, t, tau: float, phi0: float):
    """Total feedback phase: the static ``phi0`` plus the excess phase."""
    return phi0 + scheme.excess_phase(t, tau)


def bessel_j_sequence(n_max: int, x: float) -> np.ndarray:
    """``J_0(x) ... J_{n_max}(x)`` by Miller's backward recurrence.

    The unnormalised sequence is started well above ``max(n_max, |x|)`` and
    normalised with ``J_0 + 2 sum_k J_{2k} = 1``.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = np.zeros(n_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    ax = abs(x)
    if ax < 1e-30:
        # leading series term; the recurrence would overflow here
        term = 1.0
        for n in range(n_max + 1):
            out[n] = term
            term *= 0.5 * ax / (n + 1)
        if x < 0:
            out[1::2] *= -1.0
        return out
    top = max(n_max, int(ax)) + 1
    start = 2 * ((top + 20 + int(math.sqrt(160.0 * top)) + int(ax)) // 2)

    big, small = 1e250, 1e-250
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = 2.0 * k / ax * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the order k-1 value
        if k - 1 <= n_max:
            out[k - 1] = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += j_cur
        if abs(j_cur) > big:
            j_cur *= small
            j_next *= small
            norm *= small
            out *= small
    norm = 2.0 * norm + j_cur
    out /= norm
    if x < 0:
        out[1::2] *= -1.0
    return out


def jacobi_anger_factor(chi: float, phi0: float, x, q_max: int):
    """Truncated expansion ``exp(i phi0) sum_{|q| <= q_max} J_q(2 chi) exp(i q x)``.

    For cosine modulation with ``Omega tau = (2n+1) pi`` and ``theta = 0``
    this reproduces the feedback phase factor with ``x = Omega t``; as
    ``q_max`` grows it converges to ``exp(i phi0 + 2 i chi sin x)``.
    """
    if q_max < 0:
        raise ValueError("q_max must be >= 0")
    if chi < 0:
        raise ValueError("chi must be >= 0")
    x = np.asarray(x, dtype=float)
    jq = bessel_j_sequence(q_max, 2.0 * chi)
    q = np.arange(1, q_max + 1)
    sign = (-1.0) ** q
    xe = x[..., None]
    # J_{-q} = (-1)^q J_q
    series = jq[0] + np.sum(jq[1:] * (np.exp(1j * q * xe) + sign * np.exp(-1j * q * xe)), axis=-1)
    return (np.exp(1j * phi0) * series)[()]


# ---------------------------------------------------------------------------
# text grammar: constant | cosine:alpha=..,omega=..,theta=.. | linear:beta=..

_PI_RE = re.compile(
    r"^\s*(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?)\s*\*?\s*pi"
    r"(?:\s*/\s*(?P<den>\d+\.?\d*|\.\d+))?\s*$"
)


def parse_angle(text, key: str | None = None) -> float:
    """Parse a float that may carry a ``pi`` suffix (``5pi``, ``-pi/2``, ``0.5pi``)."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    if not s:
        raise SchemeParseError(f"empty value for {key or 'number'}", key)
    m = _PI_RE.match(s)
    if m:
        coef = m.group("coef")
        c = -1.0 if coef == "-" else 1.0 if coef in ("", "+") else float(coef)
        val = c * math.pi
        if m.group("den"):
            den = float(m.group("den"))
            if den == 0:
                raise SchemeParseError(f"zero denominator in {key or 'value'}={s!r}", key)
            val /= den
        return val
    try:
        return float(s)
    except ValueError:
        raise SchemeParseError(f"cannot parse {key or 'value'}={s!r} as a number", key) from None


def _parse_fields(body: str, allowed) -> dict[str, float]:
    fields: dict[str, float] = {}
    if not body.strip():
        return fields
    for item in body.split(","):
        if "=" not in item:
            raise SchemeParseError(f"expected key=value, got {item.strip()!r}", item.strip() or None)
        k, v = item.split("=", 1)
        k = k.strip()
        if k not in allowed:
            raise SchemeParseError(f"unknown scheme key {k!r}", k)
        if k in fields:
            raise SchemeParseError(f"duplicate scheme key {k!r}", k)
        fields[k] = parse_angle(v, key=k)
    return fields


def parse_scheme(text: str) -> ModulationScheme:
    """Build a scheme from its text form.

    >>> parse_scheme("cosine:chi=1,omega=5pi,theta=0").chi
    1.0
    """
    s = text.strip()
    name, _, body = s.partition(":")
    name = name.strip().lower()
    if name == "constant":
        if body.strip():
            raise SchemeParseError("constant scheme takes no parameters", body.split("=")[0].strip())
        return Constant()
    if name == "cosine":
        f = _parse_fields(body, {"alpha", "chi", "omega", "theta"})
        if "omega" not in f:
            raise SchemeParseError("cosine scheme needs omega", "omega")
        if ("alpha" in f) == ("chi" in f):
            raise SchemeParseError("cosine scheme needs exactly one of alpha or chi", "alpha" if "alpha" in f else "chi")
        try:
            if "chi" in f:
                return Cosine.from_depth(f["chi"], f["omega"], f.get("theta", 0.0))
            return Cosine(f["alpha"], f["omega"], f.get("theta", 0.0))
        except ValueError as exc:
            raise SchemeParseError(str(exc), "omega") from None
    if name == "linear":
        f = _parse_fields(body, {"beta"})
        if "beta" not in f:
            raise SchemeParseError("linear scheme needs beta", "beta")
        return Linear(f["beta"])
    raise SchemeParseError(f"unknown scheme {name!r}", "scheme")


def format_scheme(scheme: ModulationScheme) -> str:
    """Canonical text form with all values expanded; round-trips through parse_scheme."""
    if isinstance(scheme, Constant):
        return "constant"
    if isinstance(scheme, Cosine):
        return f"cosine:alpha={scheme.alpha!r},omega={scheme.omega!r},theta={scheme.theta!r}"
    if isinstance(scheme, Linear):
        return f"linear:beta={scheme.beta!r}"
    raise TypeError(f"no text form for {type(scheme).__name__}")

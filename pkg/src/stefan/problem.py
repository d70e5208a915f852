"""Problem instances for the one-phase melting problem.

A StefanCase bundles the geometry (initial front b, horizon T), the
boundary influx h(t), the initial temperature u0(x) and, for benchmark
fixtures, the closed-form exact solution used to measure errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

from .errors import ConfigurationError, ValidationError

FIXTURE_NAMES = ("direct-exp", "example1", "example2", "example3")


@dataclass(frozen=True)
class TimeSignal:
    """A signal on [0, T]: closed form or linearly interpolated samples."""

    name: str = "signal"
    fn: Optional[Callable] = None
    t: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.fn is None:
            if self.t is None or self.v is None:
                raise ConfigurationError(
                    "signal.empty", "TimeSignal needs a closed form or samples"
                )
            t = np.asarray(self.t, dtype=float)
            v = np.asarray(self.v, dtype=float)
            if t.shape != v.shape or t.ndim != 1:
                raise ValidationError(
                    "signal.shape", "sample arrays must be 1-d and equal length"
                )
            if np.any(np.diff(t) <= 0):
                raise ValidationError(
                    "signal.grid.nonincreasing", "sample times must strictly increase"
                )
            object.__setattr__(self, "t", t)
            object.__setattr__(self, "v", v)

    @classmethod
    def from_function(cls, fn, name="signal"):
        return cls(name=name, fn=fn)

    @classmethod
    def from_samples(cls, t, v, name="signal"):
        return cls(name=name, t=t, v=v)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.fn is not None:
            out = self.fn(t)
            return np.asarray(out, dtype=float) + np.zeros_like(t)
        return np.interp(t, self.t, self.v)

    def derivative(self) -> "TimeSignal":
        """Centered-difference derivative on the sample grid (one-sided at ends)."""
        if self.fn is not None:
            raise ConfigurationError(
                "signal.closed_form", "derivative() requires a sampled signal"
            )
        return TimeSignal.from_samples(
            self.t, np.gradient(self.v, self.t), name=self.name + "_dot"
        )


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form front, front velocity, temperature and influx."""

    s: Callable
    sdot: Callable
    u: Callable
    h: Callable


@dataclass(frozen=True)
class StefanCase:
    """A complete problem instance.

    b: initial front position (>0); T: horizon (>0); influx: h(t) on [0,T];
    initial_state: u0(x) on [0,b]; H: slope bound with 0 <= u0 <= H*(b-x).
    """

    name: str
    b: float
    T: float
    influx: TimeSignal
    initial_state: Callable
    H: float
    exact: Optional[ExactSolution] = None

    def __post_init__(self):
        if not self.b > 0:
            raise ValidationError("case.b.nonpositive", f"b={self.b} must be > 0")
        if not self.T > 0:
            raise ValidationError("case.T.nonpositive", f"T={self.T} must be > 0")
        if self.H < 0:
            raise ValidationError("case.H.negative", f"H={self.H} must be >= 0")

    @property
    def data_bound(self) -> float:
        """max(sup|h|, H), scanned on 1001 points of [0, T]."""
        tt = np.linspace(0.0, self.T, 1001)
        return float(max(np.max(np.abs(self.influx(tt))), self.H))


@dataclass(frozen=True)
class FreeBoundaryPath:
    """Uniformly sampled front s(t_j) with velocities sdot(t_j)."""

    t: np.ndarray
    s: np.ndarray
    sdot: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.s, dtype=float)
        sd = np.asarray(self.sdot, dtype=float)
        if not (t.shape == s.shape == sd.shape) or t.ndim != 1 or t.size < 2:
            raise ValidationError(
                "path.shape", "t, s, sdot must be 1-d arrays of equal length >= 2"
            )
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "sdot", sd)

    @property
    def n_panels(self) -> int:
        return self.t.size - 1

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def is_uniform(self, rtol=1e-9) -> bool:
        steps = np.diff(self.t)
        return bool(np.all(np.abs(steps - steps[0]) <= rtol * abs(steps[0])))

    def check(self, b: Optional[float] = None, bound: Optional[float] = None):
        """Structural violations as a list of strings (empty = clean)."""
        out = []
        if not self.is_uniform():
            out.append("time grid is not uniform")
        if b is not None and abs(self.s[0] - b) > 1e-9 * max(1.0, abs(b)):
            out.append(f"s[0]={self.s[0]} does not match b={b}")
        if np.any(np.diff(self.s) < -1e-12):
            out.append("front positions are not nondecreasing")
        if bound is not None and np.any(self.sdot > bound + 1e-9):
            out.append(f"front velocity exceeds the data bound {bound}")
        if np.any(self.sdot < -1e-9):
            out.append("front velocity is negative")
        return out


def _slope_bound(u0, b: float) -> float:
    """Smallest H (up to scan resolution) with u0(x) <= H*(b-x) on [0,b)."""
    x = np.linspace(0.0, b, 2001)[:-1]
    ratios = u0(x) / (b - x)
    return float(np.max(ratios) * (1.0 + 1e-12))


def _exp_family(b: float, T: float, name: str) -> StefanCase:
    """Front s=t+b with u=exp(t+b-x)-1; used by direct-exp and example2."""

    def u(x, t):
        return np.exp(t + b - np.asarray(x, dtype=float)) - 1.0

    def u0(x):
        return np.exp(b - np.asarray(x, dtype=float)) - 1.0

    exact = ExactSolution(
        s=lambda t: np.asarray(t, dtype=float) + b,
        sdot=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        u=u,
        h=lambda t: np.exp(np.asarray(t, dtype=float) + b),
    )
    return StefanCase(
        name=name,
        b=b,
        T=T,
        influx=TimeSignal.from_function(exact.h, name="h"),
        initial_state=u0,
        H=_slope_bound(u0, b),
        exact=exact,
    )


def _example1(T: float = 1.0) -> StefanCase:
    b = np.sqrt(2.0) - 1.0
    c = 1.0 - 1.0 / np.sqrt(2.0)
    rt2 = np.sqrt(2.0)

    def u(x, t):
        return np.exp(c + np.asarray(t, dtype=float) / 2.0 - np.asarray(x) / rt2) - 1.0

    def u0(x):
        return np.exp(c - np.asarray(x, dtype=float) / rt2) - 1.0

    exact = ExactSolution(
        s=lambda t: b + np.asarray(t, dtype=float) / rt2,
        sdot=lambda t: np.full_like(np.asarray(t, dtype=float), 1.0 / rt2),
        u=u,
        h=lambda t: np.exp(c + np.asarray(t, dtype=float) / 2.0) / rt2,
    )
    return StefanCase(
        name="example1",
        b=b,
        T=T,
        influx=TimeSignal.from_function(exact.h, name="h"),
        initial_state=u0,
        H=_slope_bound(u0, b),
        exact=exact,
    )


def _example3(T: float = 1.0) -> StefanCase:
    b = 0.5
    amp = np.exp(0.25) * np.sqrt(np.pi) / 2.0

    def s(t):
        return np.sqrt(np.asarray(t, dtype=float) + 0.25)

    def u(x, t):
        return amp * (erf(0.5) - erf(np.asarray(x, dtype=float) / (2.0 * s(t))))

    def u0(x):
        return amp * (erf(0.5) - erf(np.asarray(x, dtype=float)))

    exact = ExactSolution(
        s=s,
        sdot=lambda t: 0.5 / s(t),
        u=u,
        h=lambda t: np.exp(0.25) / (2.0 * s(t)),
    )
    return StefanCase(
        name="example3",
        b=b,
        T=T,
        influx=TimeSignal.from_function(exact.h, name="h"),
        initial_state=u0,
        H=_slope_bound(u0, b),
        exact=exact,
    )


def make_fixture(name: str, b: Optional[float] = None) -> StefanCase:
    """Build a benchmark fixture by stable identifier.

    Only example2 leaves b free (default 0.1); the other fixtures reject
    an override.
    """
    if name not in FIXTURE_NAMES:
        raise ConfigurationError(
            "config.fixture.unknown",
            f"unknown fixture {name!r}; choose one of {', '.join(FIXTURE_NAMES)}",
        )
    if b is not None and name != "example2":
        raise ConfigurationError(
            "config.override.unsupported", f"fixture {name!r} does not accept a b override"
        )
    if name == "direct-exp":
        return _exp_family(0.1, 1.0, "direct-exp")
    if name == "example1":
        return _example1()
    if name == "example2":
        b = 0.1 if b is None else float(b)
        if not b > 0:
            raise ValidationError("config.b.nonpositive", f"b={b} must be > 0")
        return _exp_family(b, 1.0, "example2")
    return _example3()


def validate_case(case: StefanCase, n_scan: int = 1001):
    """Check the standing sign/slope assumptions on dense scans.

    Returns a list of violation strings; empty means the case is admissible.
    """
    out = []
    tt = np.linspace(0.0, case.T, n_scan)
    hh = case.influx(tt)
    bad = np.nonzero(~(hh > 0))[0]
    if bad.size:
        j = bad[0]
        out.append(f"influx not positive: h({tt[j]:.6g}) = {hh[j]:.6g}")
    xx = np.linspace(0.0, case.b, n_scan)
    uu = case.initial_state(xx)
    bad = np.nonzero(uu < -1e-14)[0]
    if bad.size:
        j = bad[0]
        out.append(f"initial state negative: u0({xx[j]:.6g}) = {uu[j]:.6g}")
    cap = case.H * (case.b - xx)
    bad = np.nonzero(uu > cap + 1e-12)[0]
    if bad.size:
        j = bad[0]
        out.append(
            f"slope bound violated: u0({xx[j]:.6g}) = {uu[j]:.6g} "
            f"> H*(b-x) = {cap[j]:.6g}"
        )
    return out


def sample_path(case: StefanCase, n: int) -> FreeBoundaryPath:
    """Sample the exact front on the uniform grid t_j = j*T/n, j=0..n."""
    if case.exact is None:
        raise ConfigurationError(
            "config.exact.missing", f"case {case.name!r} has no exact solution to sample"
        )
    if n < 2:
        raise ConfigurationError("config.n.toosmall", f"need n >= 2, got {n}")
    t = np.linspace(0.0, case.T, n + 1)
    return FreeBoundaryPath(t=t, s=case.exact.s(t), sdot=case.exact.sdot(t))

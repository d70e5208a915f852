"""Half-line heat kernels and the half-order fractional integral operator.

The image kernel N(x,xi) = K(x,xi) + K(-x,xi) has zero xi-derivative at
xi = 0, which is what makes it the right Green's function for a Neumann
condition on the fixed boundary.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DomainError
from .problem import TimeSignal
from .quadrature import PanelRule, panel_points, rule_nodes


def heat_kernel(x, xi, t, tau):
    """Gaussian kernel exp(-(x-xi)^2/(4(t-tau))) / (2 sqrt(pi (t-tau))).

    Broadcasts over array arguments; the exponent may underflow to 0.
    """
    dt = np.asarray(t, dtype=float) - np.asarray(tau, dtype=float)
    if np.any(dt <= 0):
        raise DomainError("kernel.time.nonpositive", "heat kernel requires t > tau")
    d = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
    with np.errstate(under="ignore"):
        return np.exp(-(d * d) / (4.0 * dt)) / (2.0 * np.sqrt(np.pi * dt))


def neumann_kernel(x, xi, t, tau):
    """Method-of-images kernel K(x,xi;t,tau) + K(-x,xi;t,tau)."""
    return heat_kernel(x, xi, t, tau) + heat_kernel(-np.asarray(x, dtype=float), xi, t, tau)


def abel_forward(h, t: float, panels: int = 64, rule: PanelRule | None = None) -> float:
    """Half-order integral (1/sqrt(pi)) int_0^t h(tau)/sqrt(t-tau) dtau.

    The substitution tau = t - sigma^2 removes the endpoint singularity:
    the integrand becomes 2 h(t - sigma^2)/sqrt(pi) on sigma in [0, sqrt(t)].
    """
    if t <= 0:
        raise DomainError("abel.time.nonpositive", f"need t > 0, got t={t}")
    rule = rule_nodes("gauss3") if rule is None else rule
    sig, w = panel_points(rule, 0.0, np.sqrt(t), panels)
    vals = np.asarray(h(t - sig * sig), dtype=float)
    return float(2.0 / np.sqrt(np.pi) * np.dot(w, vals))


def abel_inverse(F: TimeSignal, t: float, panels: int = 64, rule: PanelRule | None = None) -> float:
    """Invert the half-order integral at time t for a smooth right-hand side.

    Uses F(0)/(sqrt(pi) sqrt(t)) plus the forward operator applied to F',
    with F' taken by centered differences on the signal grid.
    """
    if t <= 0:
        raise DomainError("abel.time.nonpositive", f"need t > 0, got t={t}")
    if F.fn is not None:
        raise ConfigurationError(
            "abel.signal.closed_form", "abel_inverse needs a sampled signal (for F')"
        )
    f0 = float(F(0.0))
    fprime = F.derivative()
    return f0 / (np.sqrt(np.pi) * np.sqrt(t)) + abel_forward(fprime, t, panels, rule)

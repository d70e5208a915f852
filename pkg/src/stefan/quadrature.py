"""Composite panel quadrature: one-point midpoint and 3-point Gauss-Legendre.

Nodes are strictly interior to each panel, so integrands that blow up at
a panel endpoint (the weakly singular kernels of the inverse assembly)
are never sampled at the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

RULE_NAMES = ("midpoint", "gauss3")


@dataclass(frozen=True)
class PanelRule:
    """Reference nodes/weights on (0,1); weights sum to 1."""

    name: str
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))


def rule_nodes(name: str) -> PanelRule:
    if name == "midpoint":
        return PanelRule("midpoint", np.array([0.5]), np.array([1.0]))
    if name == "gauss3":
        c = 0.5 * np.sqrt(3.0 / 5.0)
        return PanelRule(
            "gauss3",
            np.array([0.5 - c, 0.5, 0.5 + c]),
            np.array([5.0, 8.0, 5.0]) / 18.0,
        )
    raise ConfigurationError(
        "config.rule.unknown", f"unknown rule {name!r}; choose one of {', '.join(RULE_NAMES)}"
    )


def panel_points(rule: PanelRule, a: float, b: float, panels: int):
    """All quadrature nodes and scaled weights for uniform panels on [a,b].

    Returns flat arrays (x, w) ordered panel-by-panel; sum(w) = b - a.
    """
    if panels < 1:
        raise ConfigurationError("config.panels.toosmall", f"need panels >= 1, got {panels}")
    width = (b - a) / panels
    left = a + width * np.arange(panels)
    x = (left[:, None] + width * rule.nodes[None, :]).ravel()
    w = np.tile(width * rule.weights, panels)
    return x, w


def integrate(rule: PanelRule, f, a: float, b: float, panels: int = 1) -> float:
    """Composite quadrature of f over [a,b]; f must accept numpy arrays."""
    if not a < b:
        raise ConfigurationError("config.interval.empty", f"need a < b, got [{a}, {b}]")
    x, w = panel_points(rule, a, b, panels)
    return float(np.dot(w, np.asarray(f(x), dtype=float)))

"""Influx recovery: collocation of the boundary integral equation.

Imposing u(s(t), t) = 0 in the heat-potential representation gives a
first-kind Volterra equation for the influx h. Collocating at the path
times and applying a panel quadrature yields a causal (block lower
triangular) dense system A h = g, solved with Tikhonov regularization.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Optional, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConfigurationError, NumericalFault, ValidationError
from .problem import FreeBoundaryPath, StefanCase, TimeSignal
from .quadrature import PanelRule, panel_points


@dataclass(frozen=True)
class LinearSystem:
    """Discretized integral equation A h = g.

    Rows are collocation times t_i (i = 1..N); columns are the panels,
    with one unknown per panel (the influx at the panel midpoint) and the
    panel kernel integral folded into the entry. h_exact holds the exact
    influx at the nodes when the originating case provides one.
    """

    A: np.ndarray
    g: np.ndarray
    node_times: np.ndarray
    collocation_times: np.ndarray
    h_exact: Optional[np.ndarray] = None


@dataclass(frozen=True)
class TikhonovConfig:
    lam: float
    prior: Union[str, np.ndarray, TimeSignal] = "zero"

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError(
                "config.lambda.nonpositive", f"lambda must be > 0, got {self.lam}"
            )
        if isinstance(self.prior, str) and self.prior not in ("zero", "exact"):
            raise ConfigurationError(
                "config.prior.unknown", f"prior must be zero, exact or a signal, got {self.prior!r}"
            )


@dataclass(frozen=True)
class TikhonovResult:
    h: np.ndarray
    node_times: np.ndarray
    lam: float
    prior_mode: str
    residual: float          # ||A h - g||_2
    prior_distance: float    # ||h - prior||_2


def default_mx(n_panels: int, case: StefanCase) -> int:
    return max(32, ceil(n_panels * case.b / case.T))


def _kernel_on_grid(x_row, xi, dt_matrix, mask):
    """N(x_row_i, xi_j; dt = t_i - tau_j) where mask selects dt > 0."""
    dt = np.where(mask, dt_matrix, 1.0)
    with np.errstate(under="ignore"):
        pref = 1.0 / (2.0 * np.sqrt(np.pi * dt))
        dm = x_row[:, None] - xi[None, :]
        dp = x_row[:, None] + xi[None, :]
        val = pref * (np.exp(-dm * dm / (4.0 * dt)) + np.exp(-dp * dp / (4.0 * dt)))
    return np.where(mask, val, 0.0)


def _kernel_on_grid_pairs(x, xi, dt):
    """Elementwise N(x, xi; dt) for broadcast-compatible arrays, dt > 0."""
    with np.errstate(under="ignore"):
        pref = 1.0 / (2.0 * np.sqrt(np.pi * dt))
        return pref * (
            np.exp(-((x - xi) ** 2) / (4.0 * dt)) + np.exp(-((x + xi) ** 2) / (4.0 * dt))
        )


def assemble_system(
    path: FreeBoundaryPath,
    case: StefanCase,
    rule: PanelRule,
    m_x: Optional[int] = None,
) -> LinearSystem:
    """Build the collocated system from a sampled front.

    One unknown per time panel: the influx at the panel midpoint. Entry
    A_ij is the rule's approximation of the kernel integral over panel j
    (zero for panels at or past t_i, giving causal triangularity). The
    right-hand side collects the front-motion integral minus the
    initial-state integral; s and sdot at quadrature nodes come from
    linear interpolation of the path.
    """
    if not path.is_uniform():
        raise ValidationError("input.grid.nonuniform", "path time grid must be uniform")
    n = path.n_panels
    if m_x is None:
        m_x = default_mx(n, case)
    t_col = path.t[1:]
    s_col = path.s[1:]
    node_times = 0.5 * (path.t[:-1] + path.t[1:])

    tau, w = panel_points(rule, 0.0, float(path.t[-1]), n)
    s_tau = np.interp(tau, path.t, path.s)
    sdot_tau = np.interp(tau, path.t, path.sdot)

    dt_mat = t_col[:, None] - tau[None, :]
    mask = dt_mat > 0.0

    K_flux = _kernel_on_grid(s_col, np.zeros_like(tau), dt_mat, mask) * w[None, :]
    A = K_flux.reshape(n, n, rule.nodes.size).sum(axis=2)

    # Front-motion integral. The integrand behaves like 1/sqrt(t_i - tau)
    # as tau -> t_i, so the diagonal panel [t_{i-1}, t_i] is integrated
    # with the substitution tau = t_i - sigma^2 instead of the raw rule.
    K_front = _kernel_on_grid(s_col, s_tau, dt_mat, mask)
    nq = rule.nodes.size
    panel_of_col = np.arange(n * nq) // nq
    diag = panel_of_col[None, :] == np.arange(n)[:, None]
    g = (np.where(diag, 0.0, K_front) * w[None, :]) @ sdot_tau

    dt_step = path.dt
    sig = np.sqrt(dt_step) * rule.nodes
    tau_d = t_col[:, None] - sig[None, :] ** 2
    s_d = np.interp(tau_d, path.t, path.s)
    sdot_d = np.interp(tau_d, path.t, path.sdot)
    dt_d = t_col[:, None] - tau_d
    K_d = _kernel_on_grid_pairs(s_col[:, None], s_d, dt_d)
    w_d = 2.0 * np.sqrt(dt_step) * rule.weights * sig
    g = g + (K_d * sdot_d) @ w_d

    x_sp, w_sp = panel_points(rule, 0.0, case.b, m_x)
    dt0 = np.broadcast_to(t_col[:, None], (n, x_sp.size))
    K0 = _kernel_on_grid(s_col, x_sp, dt0, np.ones_like(dt0, dtype=bool))
    g = g - (K0 * w_sp[None, :]) @ np.asarray(case.initial_state(x_sp), dtype=float)

    h_exact = None
    if case.exact is not None:
        h_exact = np.asarray(case.exact.h(node_times), dtype=float)
    return LinearSystem(A=A, g=g, node_times=node_times, collocation_times=t_col, h_exact=h_exact)


def _resolve_prior(sys: LinearSystem, config: TikhonovConfig):
    p = config.prior
    if isinstance(p, str):
        if p == "zero":
            return np.zeros_like(sys.node_times), "zero"
        if sys.h_exact is None:
            raise ConfigurationError(
                "config.prior.exact.unavailable",
                "prior=exact requires a system assembled from a fixture with exact influx",
            )
        return sys.h_exact, "exact"
    if isinstance(p, TimeSignal):
        return np.asarray(p(sys.node_times), dtype=float), "custom"
    return np.asarray(p, dtype=float), "custom"


def tikhonov_solve(sys: LinearSystem, config: TikhonovConfig) -> TikhonovResult:
    """Solve (A^T A + lam I) h = A^T g + lam * prior by dense Cholesky.

    When there are more unknowns than rows, the algebraically identical
    dual form h = p + A^T (A A^T + lam I)^{-1} (g - A p) is factorized
    instead; both normal matrices are symmetric positive definite.
    """
    A, g = sys.A, sys.g
    p, mode = _resolve_prior(sys, config)
    lam = config.lam
    n_rows, n_unk = A.shape
    try:
        if n_unk <= n_rows:
            nm = A.T @ A
            nm[np.diag_indices_from(nm)] += lam
            h = cho_solve(cho_factor(nm), A.T @ g + lam * p)
        else:
            nm = A @ A.T
            nm[np.diag_indices_from(nm)] += lam
            h = p + A.T @ cho_solve(cho_factor(nm), g - A @ p)
    except np.linalg.LinAlgError as e:  # pragma: no cover - SPD for lam > 0
        raise NumericalFault("tikhonov.factorization", str(e)) from e
    return TikhonovResult(
        h=h,
        node_times=sys.node_times,
        lam=lam,
        prior_mode=mode,
        residual=float(np.linalg.norm(A @ h - g)),
        prior_distance=float(np.linalg.norm(h - p)),
    )


def condition_estimate(sys: LinearSystem) -> float:
    """Ratio of extreme singular values of A (full SVD; desk-scale sizes)."""
    sv = np.linalg.svd(sys.A, compute_uv=False)
    smin = sv[sv > 0].min()
    return float(sv.max() / smin)


def reconstruct_u(
    h: Union[np.ndarray, TimeSignal],
    path: FreeBoundaryPath,
    case: StefanCase,
    x: float,
    t: float,
    rule: PanelRule,
    node_times: Optional[np.ndarray] = None,
    m_x: Optional[int] = None,
) -> float:
    """Evaluate the heat-potential representation of u at (x, t).

    u = int_0^t N(x,0)h - int_0^t N(x,s(tau)) sdot + int_0^b N(x,xi;t,0) u0.
    Time panels follow the path grid (final panel truncated at t); x may
    exceed s(t), where the representation extends smoothly past the front.
    """
    if t <= 0 or t > path.t[-1] + 1e-12:
        raise ConfigurationError("config.time.range", f"t={t} outside (0, {path.t[-1]}]")
    if isinstance(h, TimeSignal):
        h_eval = h
    else:
        if node_times is None:
            raise ConfigurationError(
                "config.nodes.missing", "sampled h needs node_times for interpolation"
            )
        h_arr = np.asarray(h, dtype=float)
        h_eval = lambda tau: np.interp(tau, node_times, h_arr)
    if m_x is None:
        m_x = default_mx(path.n_panels, case)

    # Both time integrands behave like 1/sqrt(t - tau) near tau = t when
    # x sits near the relevant boundary, so the whole time integral is
    # taken under the substitution tau = t - sigma^2, which removes the
    # endpoint singularity; the panel count matches the path resolution.
    n_panels = max(int(np.count_nonzero(path.t < t - 1e-15)), 1)
    sig, w_s = panel_points(rule, 0.0, float(np.sqrt(t)), n_panels)
    tau = t - sig * sig
    dt = t - tau
    w = 2.0 * w_s * sig
    with np.errstate(under="ignore"):
        s_tau = np.interp(tau, path.t, path.s)
        sdot_tau = np.interp(tau, path.t, path.sdot)
        n0 = _kernel_on_grid_pairs(x, np.zeros_like(tau), dt)
        nf = _kernel_on_grid_pairs(x, s_tau, dt)
        total = np.dot(w, n0 * np.asarray(h_eval(tau), dtype=float))
        total -= np.dot(w, nf * sdot_tau)

        x_sp, w_sp = panel_points(rule, 0.0, case.b, m_x)
        pref0 = 1.0 / (2.0 * np.sqrt(np.pi * t))
        n_init = pref0 * (
            np.exp(-((x - x_sp) ** 2) / (4.0 * t))
            + np.exp(-((x + x_sp) ** 2) / (4.0 * t))
        )
        total += np.dot(w_sp, n_init * np.asarray(case.initial_state(x_sp), dtype=float))
    return float(total)

"""Theorem-by-theorem numerical audits: norm monotonicity, the weighted energy
inequality, the smoothing-effect ratio, the sign-splitting comparison sandwich,
and power-law decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import exponents, solver
from .problem import Problem, State, figure1_flux_model, sample_initial
from .solver import RunResult, SchemeConfig

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""


class AuditError(RuntimeError):
    """An audit could not be evaluated on the given data."""


class FitError(RuntimeError):
    """A power-law fit is undefined for the given series."""


def lq_norm(state: State, q) -> float:
    """Discrete L^q norm (sum |u_i|^q dx^n)^(1/q); grid max for q = inf."""
    if q == math.inf:
        return float(np.max(np.abs(state.values))) if state.values.size else 0.0
    if q < 1:
        raise ParameterError(f"norm index must be >= 1 or inf, got {q}")
    total = float(np.sum(np.abs(state.values) ** q)) * state.grid.cell_volume
    return total ** (1.0 / q)


@dataclass(frozen=True)
class DecayRecord:
    q: float
    series: list[tuple[float, float]]
    fit_window: tuple[float, float]
    fitted_slope: float
    fitted_intercept: float
    r_squared: float


def fit_decay(series: Sequence[tuple[float, float]],
              window: tuple[float, float]) -> tuple[float, float, float]:
    """Least-squares line through (log t, log norm) inside the window;
    returns (slope, intercept, r^2)."""
    t_lo, t_hi = window
    pts = [(t, v) for t, v in series if t_lo <= t <= t_hi]
    if len(pts) < 5:
        raise FitError(f"need >= 5 points in window {window}, got {len(pts)}")
    ts = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(ts <= 0) or np.any(vs <= 0):
        raise FitError("log-log fit requires positive times and norms")
    lt, lv = np.log(ts), np.log(vs)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), r2


def decay_record(result_or_series, q, window: tuple[float, float]) -> DecayRecord:
    """DecayRecord from a RunResult's snapshots (or a ready (t, norm) series)."""
    if isinstance(result_or_series, RunResult):
        series = [(s.time, lq_norm(s, q)) for s in result_or_series.snapshots]
    else:
        series = [(float(t), float(v)) for t, v in result_or_series]
    slope, intercept, r2 = fit_decay(series, window)
    return DecayRecord(q=q, series=series, fit_window=window,
                       fitted_slope=slope, fitted_intercept=intercept, r_squared=r2)


# ---------------------------------------------------------------------------
# L^q monotonicity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityReport:
    q: float
    max_uptick: float
    passed: bool


def audit_lq_monotonicity(result: RunResult, q_list: Sequence,
                          tolerance: float = 1e-8) -> dict:
    """Max relative uptick of ||u(t)||_q along consecutive snapshots, per q."""
    if len(result.snapshots) < 2:
        raise AuditError("need at least two snapshots")
    reports = {}
    for q in q_list:
        norms = [lq_norm(s, q) for s in result.snapshots]
        scale = norms[0] if norms[0] > 0 else 1.0
        uptick = max((b - a) / scale for a, b in zip(norms, norms[1:]))
        reports[q] = MonotonicityReport(q=q, max_uptick=uptick,
                                        passed=uptick <= tolerance)
    return reports


# ---------------------------------------------------------------------------
# Weighted energy inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyAudit:
    gamma: float
    q: float
    t0: float
    t: float
    lhs_norm_term: float
    lhs_dissipation_term: float
    rhs_term: float
    margin: float
    passed: bool


def _grad_sq(state: State) -> np.ndarray:
    """Central-difference |grad u|^2 with edge-copied ghosts."""
    u = state.values
    dx = state.grid.dx
    g2 = np.zeros_like(u)
    for ax in range(state.grid.n):
        up = np.pad(u, [(1, 1) if a == ax else (0, 0) for a in range(u.ndim)],
                    mode="edge")
        lo = [slice(None)] * u.ndim
        hi = [slice(None)] * u.ndim
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        g2 += ((up[tuple(hi)] - up[tuple(lo)]) / (2.0 * dx)) ** 2
    return g2


def audit_energy_inequality(result: RunResult, q: float, gamma: float, t0: float,
                            alpha: float, slack: float = 0.05) -> EnergyAudit:
    """Discrete check of the weighted inequality
    (t-t0)^g ||u(t)||_q^q + q(q-1) int (tau-t0)^g int |u|^(q-2+a) |grad u|^2
    <= g int (tau-t0)^(g-1) ||u(tau)||_q^q,
    with trapezoidal time quadrature and a stated discretization slack."""
    if gamma <= 1:
        raise ParameterError(f"weight exponent must be > 1, got {gamma}")
    if q < 2:
        raise ParameterError(f"norm index must be >= 2, got {q}")
    snaps = [s for s in result.snapshots if s.time >= t0]
    if len(snaps) < 20:
        raise AuditError(f"need >= 20 snapshots in [{t0}, t], got {len(snaps)}")
    t = snaps[-1].time
    taus = np.array([s.time for s in snaps])
    norm_q = np.array([lq_norm(s, q) ** q for s in snaps])
    dissip = np.array([
        float(np.sum(np.abs(s.values) ** (q - 2.0 + alpha) * _grad_sq(s)))
        * s.grid.cell_volume
        for s in snaps])
    w = (taus - t0) ** gamma
    lhs_norm = (t - t0) ** gamma * norm_q[-1]
    lhs_diss = q * (q - 1.0) * float(_trapezoid(w * dissip, taus))
    rhs = gamma * float(_trapezoid((taus - t0) ** (gamma - 1.0) * norm_q, taus))
    margin = rhs - (lhs_norm + lhs_diss)
    return EnergyAudit(gamma=gamma, q=q, t0=t0, t=t,
                       lhs_norm_term=lhs_norm, lhs_dissipation_term=lhs_diss,
                       rhs_term=rhs, margin=margin,
                       passed=margin >= -slack * rhs)


# ---------------------------------------------------------------------------
# Smoothing-effect ratio
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingReport:
    p0: float
    delta0: float
    gamma0: float
    ratio_series: list[tuple[float, float]]
    sup_ratio: float
    last_decade_variation: float
    passed: bool


def audit_smoothing(result: RunResult, p0: float, alpha: float) -> SmoothingReport:
    """Constancy audit of ||u(t)||_inf t^gamma0 / ||u0||_p0^delta0 along snapshots."""
    if not result.snapshots:
        raise AuditError("empty run result")
    n = result.snapshots[0].grid.n
    delta0, gamma0 = exponents.smoothing_exponents(n, p0, alpha)
    norm0 = lq_norm(result.snapshots[0], p0)
    if norm0 <= 0:
        raise AuditError("initial datum has zero L^p0 norm")
    ratios = [(s.time, lq_norm(s, math.inf) * s.time ** gamma0 / norm0 ** delta0)
              for s in result.snapshots if s.time > 0]
    if not ratios:
        raise AuditError("no snapshots with t > 0")
    vals = np.array([r for _, r in ratios])
    t_max = ratios[-1][0]
    last = np.array([r for t, r in ratios if t >= t_max / 10.0])
    variation = float((last.max() - last.min()) / last.min()) if last.min() > 0 else math.inf
    return SmoothingReport(p0=p0, delta0=delta0, gamma0=gamma0,
                           ratio_series=ratios, sup_ratio=float(vals.max()),
                           last_decade_variation=variation,
                           passed=variation < 0.5)


# ---------------------------------------------------------------------------
# Sign-splitting comparison sandwich
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichReport:
    eps: float
    max_lower_violation: float
    max_upper_violation: float
    envelope: float
    step_count: int


def sandwich_envelope(problem: Problem, eps: float,
                      psi: Callable[[np.ndarray], np.ndarray]) -> float:
    """max{||u0^- + eps psi||_q^delta, ||u0^+ + eps psi||_q^delta} with q = p0."""
    grid = problem.grid
    base = sample_initial(problem).values
    psi_vals = np.broadcast_to(np.asarray(psi(grid.cell_centers()), float), grid.shape)
    delta0, _ = exponents.smoothing_exponents(grid.n, problem.p0, problem.alpha)

    def norm(v):
        return (float(np.sum(np.abs(v) ** problem.p0)) * grid.cell_volume) ** (1.0 / problem.p0)

    lower = norm(np.maximum(-base, 0.0) + eps * psi_vals)
    upper = norm(np.maximum(base, 0.0) + eps * psi_vals)
    return max(lower, upper) ** delta0


def run_sandwich(problem: Problem, eps: float,
                 psi: Callable[[np.ndarray], np.ndarray],
                 config: SchemeConfig) -> SandwichReport:
    """Three lockstep runs from -u0^- - eps psi <= u0 <= u0^+ + eps psi sharing
    one dt sequence (the minimum of the three stability bounds per step);
    reports the most negative pointwise ordering violation over all steps."""
    if eps <= 0:
        raise ParameterError(f"perturbation size must be > 0, got {eps}")
    grid = problem.grid
    psi_vals = np.broadcast_to(np.asarray(psi(grid.cell_centers()), float), grid.shape)
    if np.any(psi_vals <= 0):
        raise ParameterError("sandwich weight psi must be strictly positive on the grid")
    base = sample_initial(problem).values
    mid = State(values=base, time=0.0, grid=grid)
    low = State(values=-np.maximum(-base, 0.0) - eps * psi_vals, time=0.0, grid=grid)
    high = State(values=np.maximum(base, 0.0) + eps * psi_vals, time=0.0, grid=grid)

    worst_low = float(np.min(mid.values - low.values))
    worst_high = float(np.min(high.values - mid.values))
    t_tol = 1e-12 * max(1.0, config.t_end)
    steps = 0
    while mid.time < config.t_end - t_tol:
        if steps >= config.max_steps:
            raise solver.BudgetError(f"exceeded {config.max_steps} sandwich steps")
        dt = min(solver.stable_dt(s, problem, config) for s in (low, mid, high))
        dt = min(dt, config.t_end - mid.time)
        branches = []
        for name, s in (("lower", low), ("middle", mid), ("upper", high)):
            try:
                branches.append(solver.step(s, problem, dt))
            except solver.BlowUpError as exc:
                raise solver.BlowUpError(f"{name} branch: {exc}") from exc
        low, mid, high = branches
        steps += 1
        worst_low = min(worst_low, float(np.min(mid.values - low.values)))
        worst_high = min(worst_high, float(np.min(high.values - mid.values)))

    return SandwichReport(eps=eps,
                          max_lower_violation=worst_low,
                          max_upper_violation=worst_high,
                          envelope=sandwich_envelope(problem, eps, psi),
                          step_count=steps)


# ---------------------------------------------------------------------------
# Figure-1 experiment
# ---------------------------------------------------------------------------

def figure1_experiment(k: float = 1.5, alpha: float = 0.5, t_end: float = 5.0,
                       L: float = 10.0, N: int = 600, cfl_safety: float = 0.9,
                       u0: Callable[[np.ndarray], np.ndarray] | None = None,
                       ) -> tuple[Problem, RunResult, DecayRecord]:
    """Advection f(x,t,u) = -tanh(x)|u|^k u against degenerate diffusion from a
    unit Gaussian bump: growth where the flux divergence is negative, with the
    L^1 norm conserved up to boundary leakage."""
    from .problem import Grid

    if u0 is None:
        u0 = lambda x: np.exp(-np.sum(np.asarray(x) ** 2, axis=0))
    p = Problem(grid=Grid(n=1, L=L, N=N), alpha=alpha, p0=1.0,
                flux=figure1_flux_model(k), u0=u0)
    snap_times = tuple(float(j) * t_end / 5.0 for j in range(6))
    config = SchemeConfig(t_end=t_end, cfl_safety=cfl_safety,
                          snapshot_times=snap_times)
    result = solver.run(p, config)
    record = decay_record(result, q=1.0, window=(snap_times[1], t_end))
    return p, result, record

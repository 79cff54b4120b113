"""Conservative monotone explicit scheme for u_t + div f(x,t,u) = div(|u|^a grad u).

Advection uses a local Lax-Friedrichs interface flux; diffusion is the second
difference of the Kirchhoff function G(u) = |u|^a u/(a+1), which keeps the
update exactly conservative and smooth through the degeneracy at u = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Problem, State

_DEN_GUARD = 1e-300


class StepSizeError(RuntimeError):
    """The stable time step underflowed."""


class BlowUpError(RuntimeError):
    """The update produced non-finite values."""


class BudgetError(RuntimeError):
    """The step budget was exhausted before reaching the final time."""


@dataclass(frozen=True)
class SchemeConfig:
    t_end: float
    cfl_safety: float = 0.9
    max_steps: int = 2_000_000
    boundary_mass_threshold: float = 1e-8
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.t_end <= 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        times = tuple(sorted(float(t) for t in self.snapshot_times))
        if times and (times[0] < 0 or times[-1] > self.t_end):
            raise ValueError(f"snapshot times {times} outside [0, {self.t_end}]")
        object.__setattr__(self, "snapshot_times", times)


@dataclass(frozen=True)
class RunResult:
    snapshots: list[State]
    step_count: int
    min_dt: float
    max_dt: float
    boundary_mass_max: float
    mass_series: list[tuple[float, float]]
    boundary_flagged: bool


def kirchhoff(u, alpha: float):
    """G(u) = |u|^a u/(a+1); odd, strictly increasing, G'(u) = |u|^a."""
    if alpha <= 0:
        raise ValueError(f"diffusion exponent must be > 0, got {alpha}")
    u = np.asarray(u, dtype=float)
    out = np.abs(u) ** alpha * u / (alpha + 1.0)
    return float(out) if out.ndim == 0 else out


def stable_dt(state: State, problem: Problem, config: SchemeConfig) -> float:
    """CFL bound: advective dx/(2 max|df/du|) against diffusive dx^2/(2n max|u|^a)."""
    grid = state.grid
    dfu = np.asarray(problem.flux.df_du(grid.cell_centers(), state.time, state.values))
    lam_adv = float(np.max(np.abs(dfu))) if dfu.size else 0.0
    lam_diff = float(np.max(np.abs(state.values) ** problem.alpha))
    dx = grid.dx
    dt = config.cfl_safety * min(dx / (2.0 * lam_adv + _DEN_GUARD),
                                 dx * dx / (2.0 * grid.n * lam_diff + _DEN_GUARD))
    if not np.isfinite(dt) or dt <= 0.0:
        raise StepSizeError(f"stable dt underflowed at t={state.time} (dt={dt})")
    return dt


def _pad1(u: np.ndarray, policy: str, axis: int = 0) -> np.ndarray:
    mode = "edge" if policy == "zero_flux" else "constant"
    widths = [(0, 0)] * u.ndim
    widths[axis] = (1, 1)
    return np.pad(u, widths, mode=mode)


def _llf_flux_1d(flux, xi: np.ndarray, t: float, ul: np.ndarray, ur: np.ndarray,
                 component: int) -> np.ndarray:
    fl = np.asarray(flux.f(xi, t, ul))[component]
    fr = np.asarray(flux.f(xi, t, ur))[component]
    lam = np.maximum(np.abs(np.asarray(flux.df_du(xi, t, ul))[component]),
                     np.abs(np.asarray(flux.df_du(xi, t, ur))[component]))
    return 0.5 * (fl + fr) - 0.5 * lam * (ur - ul)


def step(state: State, problem: Problem, dt: float) -> State:
    """One conservative explicit update; dt must respect the stable_dt bound."""
    grid = state.grid
    u = state.values
    dx = grid.dx
    t = state.time
    a = problem.alpha
    flux = problem.flux
    policy = problem.boundary_policy

    if grid.n == 1:
        up = _pad1(u, policy)
        xi = grid.axis_interfaces()[None, :]
        fhat = _llf_flux_1d(flux, xi, t, up[:-1], up[1:], component=0)
        G = kirchhoff(up, a)
        new = (u - (dt / dx) * np.diff(fhat)
               + (dt / dx ** 2) * (G[2:] - 2.0 * G[1:-1] + G[:-2]))
    else:
        adv = np.zeros_like(u)
        centers = grid.axis_centers()
        interfaces = grid.axis_interfaces()
        for ax in (0, 1):
            up = _pad1(u, policy, axis=ax)
            if ax == 0:
                Xi, Yi = np.meshgrid(interfaces, centers, indexing="ij")
                ul, ur = up[:-1, :], up[1:, :]
            else:
                Xi, Yi = np.meshgrid(centers, interfaces, indexing="ij")
                ul, ur = up[:, :-1], up[:, 1:]
            fhat = _llf_flux_1d(flux, np.stack([Xi, Yi]), t, ul, ur, component=ax)
            adv += np.diff(fhat, axis=ax) / dx
        Gp = kirchhoff(_pad1(_pad1(u, policy, 0), policy, 1), a)
        lap = (Gp[2:, 1:-1] + Gp[:-2, 1:-1] + Gp[1:-1, 2:] + Gp[1:-1, :-2]
               - 4.0 * Gp[1:-1, 1:-1]) / dx ** 2
        new = u - dt * adv + dt * lap

    if not np.all(np.isfinite(new)):
        idx = tuple(int(k) for k in np.argwhere(~np.isfinite(new))[0])
        raise BlowUpError(f"non-finite value at cell {idx} after step to t={t + dt}")
    return State(values=new, time=t + dt, grid=grid)


def _l1(values: np.ndarray, grid) -> float:
    return float(np.sum(np.abs(values))) * grid.cell_volume


def _boundary_layer_mass(values: np.ndarray, grid) -> float:
    if grid.n == 1:
        layer = abs(values[0]) + abs(values[-1])
    else:
        layer = (np.sum(np.abs(values[0, :])) + np.sum(np.abs(values[-1, :]))
                 + np.sum(np.abs(values[1:-1, 0])) + np.sum(np.abs(values[1:-1, -1])))
    return float(layer) * grid.cell_volume


def run(problem: Problem, config: SchemeConfig) -> RunResult:
    """Integrate from t=0 to t_end with adaptive dt, landing exactly on
    requested snapshot times; audits mass and boundary-layer contamination."""
    from .problem import sample_initial

    state = sample_initial(problem)
    targets = sorted(set(config.snapshot_times) | {config.t_end})
    snapshots: list[State] = []
    if targets and targets[0] == 0.0:
        snapshots.append(state)
        targets = targets[1:]

    mass0 = _l1(state.values, state.grid)
    mass_series = [(0.0, mass0)]
    boundary_scale = mass0 if mass0 > 0 else 1.0
    boundary_max = _boundary_layer_mass(state.values, state.grid) / boundary_scale
    min_dt, max_dt = np.inf, 0.0
    steps = 0
    t_tol = 1e-12 * max(1.0, config.t_end)

    for target in targets:
        while state.time < target - t_tol:
            if steps >= config.max_steps:
                raise BudgetError(
                    f"exceeded {config.max_steps} steps at t={state.time} "
                    f"(target {target})")
            dt = min(stable_dt(state, problem, config), target - state.time)
            try:
                state = step(state, problem, dt)
            except BlowUpError as exc:
                raise BlowUpError(f"step {steps + 1}: {exc}") from exc
            steps += 1
            min_dt = min(min_dt, dt)
            max_dt = max(max_dt, dt)
            mass_series.append((state.time, _l1(state.values, state.grid)))
            boundary_max = max(
                boundary_max,
                _boundary_layer_mass(state.values, state.grid) / boundary_scale)
        # land exactly on the target for downstream time arithmetic
        state = State(values=state.values, time=target, grid=state.grid)
        snapshots.append(state)

    return RunResult(snapshots=snapshots, step_count=steps,
                     min_dt=float(min_dt) if steps else 0.0,
                     max_dt=float(max_dt),
                     boundary_mass_max=boundary_max,
                     mass_series=mass_series,
                     boundary_flagged=boundary_max > config.boundary_mass_threshold)

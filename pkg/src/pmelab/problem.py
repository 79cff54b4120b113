"""Continuous problem definitions: grids, advection flux models, initial data,
and sampled checks of the structural hypotheses on the flux.

Flux evaluators are opaque callables ``(x, t, u) -> (n,) + shape(u)`` arrays
that must broadcast; their stated derivatives are verified by finite
differences, never trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""


class EvaluationError(RuntimeError):
    """An evaluator returned a non-finite value."""


class ConfigError(ValueError):
    """A problem configuration could not be interpreted."""


BOUNDARY_POLICIES = ("zero_flux", "dirichlet_zero")


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on [-L, L]^n."""

    n: int
    L: float
    N: int

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise ParameterError(f"dimension must be 1 or 2, got {self.n}")
        if self.L <= 0:
            raise ParameterError(f"half-width must be > 0, got {self.L}")
        if self.N < 1 or int(self.N) != self.N:
            raise ParameterError(f"cell count must be a positive integer, got {self.N}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.n

    @property
    def total_measure(self) -> float:
        return self.cell_volume * self.N ** self.n

    def axis_centers(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.dx

    def axis_interfaces(self) -> np.ndarray:
        return -self.L + np.arange(self.N + 1) * self.dx

    def cell_centers(self) -> np.ndarray:
        """Coordinates of all cell centers, shape (n,) + shape."""
        c = self.axis_centers()
        if self.n == 1:
            return c[None, :]
        X, Y = np.meshgrid(c, c, indexing="ij")
        return np.stack([X, Y])


@dataclass(frozen=True)
class FluxModel:
    """Evaluator bundle for f, its u-derivative, and its x-divergence at frozen u."""

    name: str
    f: Callable[[np.ndarray, float, np.ndarray], np.ndarray]
    df_du: Callable[[np.ndarray, float, np.ndarray], np.ndarray]
    div_x_f: Callable[[np.ndarray, float, np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class State:
    """Discrete solution snapshot: cell averages on a grid at one time."""

    values: np.ndarray
    time: float
    grid: Grid

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ParameterError(
                f"state shape {vals.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            idx = tuple(int(k) for k in np.argwhere(~np.isfinite(vals))[0])
            raise EvaluationError(f"non-finite state value at cell {idx}, t={self.time}")
        if self.time < 0:
            raise ParameterError(f"time must be >= 0, got {self.time}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Problem:
    """One Cauchy problem: grid truncation, diffusion exponent, flux, initial datum."""

    grid: Grid
    alpha: float
    p0: float
    flux: FluxModel
    u0: Callable[[np.ndarray], np.ndarray]
    boundary_policy: str = "zero_flux"

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ParameterError(f"diffusion exponent must be > 0, got {self.alpha}")
        if self.p0 < 1:
            raise ParameterError(f"initial integrability must be >= 1, got {self.p0}")
        if self.boundary_policy not in BOUNDARY_POLICIES:
            raise ParameterError(
                f"boundary policy must be one of {BOUNDARY_POLICIES}, "
                f"got {self.boundary_policy!r}")


def sample_initial(problem: Problem) -> State:
    """Pointwise sample of the initial datum at cell centers, as a t=0 state."""
    centers = problem.grid.cell_centers()
    vals = np.asarray(problem.u0(centers), dtype=float)
    vals = np.broadcast_to(vals, problem.grid.shape).copy()
    if not np.all(np.isfinite(vals)):
        idx = tuple(int(k) for k in np.argwhere(~np.isfinite(vals))[0])
        x = tuple(float(centers[(a,) + idx]) for a in range(problem.grid.n))
        raise EvaluationError(f"initial datum is non-finite at cell {idx}, x={x}")
    return State(values=vals, time=0.0, grid=problem.grid)


# ---------------------------------------------------------------------------
# Built-in flux catalog
# ---------------------------------------------------------------------------

def zero_flux_model(n: int = 1) -> FluxModel:
    def f(x, t, u):
        return np.zeros((n,) + np.shape(u))

    return FluxModel(name="zero", f=f, df_du=f, div_x_f=lambda x, t, u: np.zeros(np.shape(u)))


def linear_flux_model(c: float = 1.0, n: int = 1) -> FluxModel:
    cvec = np.broadcast_to(np.asarray(c, dtype=float), (n,))

    def f(x, t, u):
        u = np.asarray(u, dtype=float)
        return np.stack([cj * u for cj in cvec])

    def df_du(x, t, u):
        u = np.asarray(u, dtype=float)
        return np.stack([np.full(u.shape, cj) for cj in cvec])

    return FluxModel(name="linear", f=f, df_du=df_du,
                     div_x_f=lambda x, t, u: np.zeros(np.shape(u)),
                     params={"c": float(cvec[0])})


def burgers_flux_model(n: int = 1) -> FluxModel:
    def f(x, t, u):
        u = np.asarray(u, dtype=float)
        return np.stack([0.5 * u * u] * n)

    def df_du(x, t, u):
        u = np.asarray(u, dtype=float)
        return np.stack([u] * n)

    return FluxModel(name="burgers", f=f, df_du=df_du,
                     div_x_f=lambda x, t, u: np.zeros(np.shape(u)))


def figure1_flux_model(k: float = 1.5) -> FluxModel:
    """One-dimensional flux f(x,t,u) = -tanh(x) |u|^k u, whose x-divergence at
    frozen u is negative where u != 0 (the growth-stimulating regime)."""
    if k <= 0:
        raise ParameterError(f"flux power must be > 0, got {k}")

    def f(x, t, u):
        u = np.asarray(u, dtype=float)
        return (-np.tanh(x[0]) * np.abs(u) ** k * u)[None]

    def df_du(x, t, u):
        u = np.asarray(u, dtype=float)
        return (-(k + 1.0) * np.tanh(x[0]) * np.abs(u) ** k)[None]

    def div_x_f(x, t, u):
        u = np.asarray(u, dtype=float)
        return -np.abs(u) ** k * u / np.cosh(x[0]) ** 2

    return FluxModel(name="figure1", f=f, df_du=df_du, div_x_f=div_x_f,
                     params={"k": float(k)})


FLUX_CATALOG = {
    "zero": zero_flux_model,
    "linear": linear_flux_model,
    "burgers": burgers_flux_model,
    "figure1": figure1_flux_model,
}


def flux_from_config(name: str, params: dict | None = None, n: int = 1) -> FluxModel:
    params = dict(params or {})
    if name == "zero":
        return zero_flux_model(n)
    if name == "linear":
        return linear_flux_model(params.pop("c", 1.0), n)
    if name == "burgers":
        return burgers_flux_model(n)
    if name == "figure1":
        if n != 1:
            raise ConfigError("figure1 flux is one-dimensional")
        return figure1_flux_model(params.pop("k", 1.5))
    raise ConfigError(f"unknown flux {name!r}; catalog: {sorted(FLUX_CATALOG)}")


# ---------------------------------------------------------------------------
# Initial-datum catalog
# ---------------------------------------------------------------------------

def u0_from_config(name: str, params: dict | None = None, n: int = 1):
    params = dict(params or {})
    if name == "zero":
        return lambda x: np.zeros(np.shape(x)[1:])
    if name == "gaussian":
        amp = params.pop("amp", 1.0)
        width = params.pop("width", 1.0)
        return lambda x: amp * np.exp(-np.sum(np.asarray(x) ** 2, axis=0) / width ** 2)
    if name == "signed_gaussian":
        # x exp(-x^2): sign-changing datum for the comparison sandwich
        return lambda x: x[0] * np.exp(-np.sum(np.asarray(x) ** 2, axis=0))
    if name == "barenblatt":
        from . import barenblatt

        C = params.pop("C", 1.0)
        t = params.pop("t", 1.0)
        alpha = params.pop("alpha", 1.0)
        prof = barenblatt.BarenblattProfile(n=n, alpha=alpha, C=C)
        return lambda x: barenblatt.evaluate(prof, x, t)
    raise ConfigError(f"unknown initial datum {name!r}")


# ---------------------------------------------------------------------------
# Hypothesis checks (sampled, with finite-difference cross-checks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    max_df_du_error: float
    max_div_error: float
    ok: bool


def check_flux_consistency(flux: FluxModel, grid: Grid,
                           u_range: tuple[float, float] = (-1.0, 1.0),
                           samples: int = 1000, rtol: float = 1e-5,
                           seed: int = 12345) -> ConsistencyReport:
    """Finite-difference verification that df_du and div_x_f match f."""
    rng = np.random.default_rng(seed)
    n = grid.n
    xs = rng.uniform(-grid.L, grid.L, size=(n, samples))
    ts = rng.uniform(0.0, 1.0, size=samples)
    us = rng.uniform(u_range[0], u_range[1], size=samples)
    worst_du = 0.0
    worst_div = 0.0
    for i in range(samples):
        x = xs[:, i:i + 1]
        t = float(ts[i])
        u = us[i:i + 1]
        h = 1e-6 * max(1.0, abs(float(u[0])))
        fd_du = (np.asarray(flux.f(x, t, u + h)) - np.asarray(flux.f(x, t, u - h))) / (2 * h)
        stated_du = np.asarray(flux.df_du(x, t, u))
        if not (np.all(np.isfinite(fd_du)) and np.all(np.isfinite(stated_du))):
            raise EvaluationError(f"non-finite flux derivative at x={x.ravel()}, t={t}, u={u[0]}")
        scale = max(1.0, float(np.max(np.abs(stated_du))))
        worst_du = max(worst_du, float(np.max(np.abs(fd_du - stated_du))) / scale)

        hx = 1e-6 * max(1.0, float(np.max(np.abs(x))))
        fd_div = 0.0
        for j in range(n):
            e = np.zeros_like(x)
            e[j, 0] = hx
            fd_div += (float(np.asarray(flux.f(x + e, t, u))[j, 0])
                       - float(np.asarray(flux.f(x - e, t, u))[j, 0])) / (2 * hx)
        stated_div = float(np.asarray(flux.div_x_f(x, t, u)).ravel()[0])
        if not (np.isfinite(fd_div) and np.isfinite(stated_div)):
            raise EvaluationError(f"non-finite flux divergence at x={x.ravel()}, t={t}, u={u[0]}")
        scale = max(1.0, abs(stated_div))
        worst_div = max(worst_div, abs(fd_div - stated_div) / scale)
    return ConsistencyReport(max_df_du_error=worst_du, max_div_error=worst_div,
                             ok=worst_du <= rtol and worst_div <= rtol)


def _x_lattice(grid: Grid, per_axis: int) -> np.ndarray:
    """Uniform subsample of cell centers, shape (n, P)."""
    c = grid.axis_centers()
    idx = np.unique(np.linspace(0, grid.N - 1, min(grid.N, per_axis)).round().astype(int))
    c = c[idx]
    if grid.n == 1:
        return c[None, :]
    X, Y = np.meshgrid(c, c, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()])


@dataclass(frozen=True)
class DivergenceReport:
    satisfied: bool
    worst_violation: float
    witness: tuple[tuple[float, ...], float, float]


def check_divergence_condition(flux: FluxModel, grid: Grid,
                               u_range: tuple[float, float],
                               samples: int = 64, T: float = 1.0) -> DivergenceReport:
    """Sampled check of the sign condition sum_j d f_j/d x_j (x,t,u) * u >= 0
    over a deterministic (x, t, u) lattice."""
    if samples < 1:
        raise ParameterError(f"need at least one u sample, got {samples}")
    lo, hi = float(u_range[0]), float(u_range[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
        raise ParameterError(f"u range must be a bounded interval, got {u_range}")
    X = _x_lattice(grid, per_axis=33)  # (n, P)
    us = np.linspace(lo, hi, max(samples, 64))
    worst = np.inf
    witness = None
    for t in (0.0, T / 2.0, T):
        vals = np.asarray(flux.div_x_f(X[:, :, None], t, us[None, :])) * us[None, :]
        if not np.all(np.isfinite(vals)):
            p, k = np.argwhere(~np.isfinite(vals))[0]
            raise EvaluationError(
                f"non-finite flux divergence at x={tuple(X[:, p])}, t={t}, u={us[k]}")
        p, k = np.unravel_index(int(np.argmin(vals)), vals.shape)
        if vals[p, k] < worst:
            worst = float(vals[p, k])
            witness = (tuple(float(v) for v in X[:, p]), float(t), float(us[k]))
    return DivergenceReport(satisfied=worst >= -1e-12, worst_violation=worst,
                            witness=witness)


@dataclass(frozen=True)
class LipschitzReport:
    C_f: float


def check_lipschitz_in_u(flux: FluxModel, grid: Grid, M: float, T: float,
                         samples: int = 10001) -> LipschitzReport:
    """Empirical Lipschitz constant of u -> f(x,t,u) on |u| <= M, 0 <= t <= T,
    from difference quotients over adjacent points of a dense u grid."""
    if M <= 0 or T <= 0:
        raise ParameterError(f"need M > 0 and T > 0, got M={M}, T={T}")
    if samples < 2:
        raise ParameterError(f"need at least two u samples, got {samples}")
    X = _x_lattice(grid, per_axis=9)
    us = np.linspace(-M, M, samples)
    du = us[1] - us[0]
    best = 0.0
    for t in (0.0, T / 2.0, T):
        for p in range(X.shape[1]):
            fv = np.asarray(flux.f(X[:, p:p + 1], t, us))
            if not np.all(np.isfinite(fv)):
                raise EvaluationError(
                    f"non-finite flux value at x={tuple(X[:, p])}, t={t}")
            quot = np.abs(np.diff(fv, axis=-1)) / du
            best = max(best, float(np.max(quot)))
    return LipschitzReport(C_f=best)


# ---------------------------------------------------------------------------
# Plain-text configuration (key = value lines)
# ---------------------------------------------------------------------------

_KNOWN_KEYS = ("n", "L", "N", "alpha", "p0", "flux", "u0", "boundary")


def _parse_catalog_value(value: str) -> tuple[str, dict]:
    parts = value.split()
    if not parts:
        raise ConfigError("empty catalog entry")
    name, params = parts[0], {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ConfigError(f"malformed parameter {tok!r} (expected key=value)")
        key, _, val = tok.partition("=")
        try:
            params[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"non-numeric parameter {tok!r}") from exc
    return name, params


def parse_problem_config(text: str) -> Problem:
    """Build a Problem from ``key = value`` lines ('#' starts a comment)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    return problem_from_mapping(raw)


def problem_from_mapping(raw: dict[str, str]) -> Problem:
    for key in raw:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
    try:
        n = int(raw.get("n", "1"))
        L = float(raw.get("L", "10"))
        N = int(raw.get("N", "400"))
        alpha = float(raw.get("alpha", "1"))
        p0 = float(raw.get("p0", "1"))
    except ValueError as exc:
        raise ConfigError(f"non-numeric scalar setting: {exc}") from exc
    grid = Grid(n=n, L=L, N=N)
    flux_name, flux_params = _parse_catalog_value(raw.get("flux", "zero"))
    u0_name, u0_params = _parse_catalog_value(raw.get("u0", "gaussian"))
    if u0_name == "barenblatt":
        u0_params.setdefault("alpha", alpha)
    boundary = raw.get("boundary", "zero_flux")
    if boundary not in BOUNDARY_POLICIES:
        raise ConfigError(f"unknown boundary policy {boundary!r}")
    return Problem(grid=grid, alpha=alpha, p0=p0,
                   flux=flux_from_config(flux_name, flux_params, n),
                   u0=u0_from_config(u0_name, u0_params, n),
                   boundary_policy=boundary)


def load_problem(path) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem_config(fh.read())

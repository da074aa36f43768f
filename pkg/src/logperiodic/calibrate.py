"""Window calibration: profiled least squares + CMA-ES over (tc, m, omega).

For fixed nonlinear parameters the four linear ones (A, B, C1, C2) have a
closed-form least-squares solution via a 4x4 normal system; the remaining
3-dimensional profiled cost is minimized with restarted CMA-ES inside the
admissible box. The hazard-non-negativity (damping) condition is applied
as a hard rejection during the search, not as a soft penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cmaes import minimize_box
from .errors import DegenerateBasisError, DomainError, FitFailedError, ValidationError
from .model import LpplsParams, damping
from .series import PriceSeries

__all__ = [
    "Window",
    "SearchConfig",
    "FitResult",
    "linear_solve",
    "cost",
    "fit",
    "grid_oracle",
]

# tc may approach the window end but never touch it, so ln(tc - t2) stays finite.
TC_GUARD = 0.01


@dataclass(frozen=True)
class Window:
    """Inclusive index range [t1, t2] of a fitting window; at least 8 points."""

    t1: int
    t2: int

    def __post_init__(self):
        if self.t1 < 0 or self.t2 <= self.t1:
            raise ValidationError(f"invalid window [{self.t1}, {self.t2}]")
        if self.length < 8:
            raise ValidationError(f"window [{self.t1}, {self.t2}] shorter than 8 points")

    @property
    def length(self) -> int:
        return self.t2 - self.t1 + 1

    def check_within(self, series: PriceSeries) -> None:
        if self.t2 >= len(series):
            raise ValidationError(
                f"window end {self.t2} outside series of length {len(series)}"
            )


@dataclass(frozen=True)
class SearchConfig:
    """Admissible box and CMA-ES budget for one window fit.

    Defaults reproduce the standard search space: m in [0,1], omega in
    [1,50], tc in [t2, t2 + (t2-t1)/3], damping >= 1. Population 7 is the
    4 + floor(3*ln(3)) default for a 3-dimensional search; each of the
    `restarts` runs gets `max_evaluations` cost evaluations.
    """

    m_min: float = 0.0
    m_max: float = 1.0
    omega_min: float = 1.0
    omega_max: float = 50.0
    tc_extension: float = 1.0 / 3.0
    damping_floor: float = 1.0
    population: int = 7
    max_evaluations: int = 2000
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise ValidationError(f"population must be >= 4, got {self.population}")
        if not (self.m_min < self.m_max and self.omega_min < self.omega_max):
            raise ValidationError("search bounds must be non-empty intervals")
        if self.tc_extension <= 0:
            raise ValidationError("tc_extension must be positive")
        if self.max_evaluations < self.population + 1 or self.restarts < 1:
            raise ValidationError("search budget too small")

    def tc_bounds(self, window: Window) -> tuple[float, float]:
        return float(window.t2), float(window.t2) + self.tc_extension * (window.t2 - window.t1)

    def with_seed(self, seed: int) -> "SearchConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class FitResult:
    """Best calibration found for one window."""

    params: LpplsParams
    cost: float
    n_points: int
    converged: bool
    evaluations: int


def _window_arrays(series: PriceSeries, window: Window) -> tuple[np.ndarray, np.ndarray]:
    window.check_within(series)
    t = np.arange(window.t1, window.t2 + 1, dtype=float)
    y = series.log_prices[window.t1 : window.t2 + 1]
    return t, y


def _basis(t: np.ndarray, tc: float, m: float, omega: float) -> np.ndarray:
    """Design matrix [1, f, g, h] with f=(tc-t)^m, g=f*cos(w ln(tc-t)), h=f*sin."""
    dt = tc - t
    if dt[-1] <= 0.0:
        raise DomainError(f"tc={tc} does not exceed window end {t[-1]}")
    ldt = np.log(dt)
    x = np.empty((t.size, 4))
    x[:, 0] = 1.0
    f = np.exp(m * ldt)
    angle = omega * ldt
    x[:, 1] = f
    x[:, 2] = f * np.cos(angle)
    x[:, 3] = f * np.sin(angle)
    return x


def _solve_linear(t, y, tc, m, omega, cond_cap=1e12):
    """Least-squares (A, B, C1, C2) for fixed (tc, m, omega), plus residual SSE."""
    x = _basis(t, tc, m, omega)
    gram = x.T @ x
    rhs = x.T @ y
    eig = np.linalg.eigvalsh(gram)
    if not np.all(np.isfinite(eig)) or eig[-1] <= 0.0 or eig[0] <= eig[-1] / cond_cap:
        raise DegenerateBasisError(
            f"normal matrix condition above {cond_cap:g} at tc={tc}, m={m}, omega={omega}"
        )
    beta = np.linalg.solve(gram, rhs)
    resid = y - x @ beta
    return beta, float(resid @ resid)


def linear_solve(series: PriceSeries, window: Window, tc: float, m: float, omega: float):
    """Analytic minimizer (A, B, C1, C2) of the squared log-price residuals.

    Raises DegenerateBasisError when the 4x4 normal system is numerically
    singular (condition estimate above 1e12); callers in the nonlinear
    search treat that as a rejected candidate.
    """
    t, y = _window_arrays(series, window)
    beta, _ = _solve_linear(t, y, tc, m, omega)
    return float(beta[0]), float(beta[1]), float(beta[2]), float(beta[3])


def cost(series: PriceSeries, window: Window, tc: float, m: float, omega: float) -> float:
    """Profiled cost: residual SSE at the linear_solve minimizer."""
    t, y = _window_arrays(series, window)
    _, sse = _solve_linear(t, y, tc, m, omega)
    return sse


def _objective(t, y, cfg: SearchConfig):
    """Profiled cost over (tc, m, omega) with hard admissibility rejections."""
    floor = cfg.damping_floor

    def func(point):
        tc, m, omega = point
        try:
            beta, sse = _solve_linear(t, y, tc, m, omega)
        except (DegenerateBasisError, DomainError):
            return math.inf
        if floor > 0.0:
            c = math.hypot(beta[2], beta[3])
            if c > 0.0 and m * abs(beta[1]) / (omega * c) < floor:
                return math.inf
        return sse

    return func


def _result_at(t, y, tc, m, omega, n_points, evaluations, converged=True) -> FitResult:
    beta, sse = _solve_linear(t, y, tc, m, omega)
    params = LpplsParams(
        tc=float(tc), m=float(m), omega=float(omega),
        A=float(beta[0]), B=float(beta[1]), C1=float(beta[2]), C2=float(beta[3]),
    )
    return FitResult(params=params, cost=sse, n_points=n_points,
                     converged=converged, evaluations=evaluations)


def fit(series: PriceSeries, window: Window, cfg: SearchConfig = SearchConfig()) -> FitResult:
    """Calibrate one window: CMA-ES over (tc, m, omega), analytic linear solve.

    Deterministic given cfg.seed. Raises FitFailedError if no admissible
    candidate was found (every sampled point degenerate or rejected by the
    damping floor); garbage is never returned silently.
    """
    t, y = _window_arrays(series, window)
    tc_lo, tc_hi = cfg.tc_bounds(window)
    lower = np.array([tc_lo + TC_GUARD, cfg.m_min, cfg.omega_min])
    upper = np.array([tc_hi, cfg.m_max, cfg.omega_max])
    if upper[0] <= lower[0]:
        raise ValidationError("tc search interval collapsed; window too short for guard")

    rng = np.random.default_rng(cfg.seed)
    result = minimize_box(
        _objective(t, y, cfg),
        lower,
        upper,
        popsize=cfg.population,
        max_evals=cfg.max_evaluations,
        restarts=cfg.restarts,
        rng=rng,
    )
    if not math.isfinite(result.cost):
        raise FitFailedError(
            f"no admissible fit in window [{window.t1}, {window.t2}] "
            f"({result.evaluations} evaluations)"
        )
    tc, m, omega = result.x
    return _result_at(t, y, tc, m, omega, window.length, result.evaluations)


def grid_oracle(
    series: PriceSeries,
    window: Window,
    grid_spec: tuple[int, int, int],
    cfg: SearchConfig = SearchConfig(),
) -> FitResult:
    """Exhaustive profiled-cost evaluation on a regular (tc, m, omega) grid.

    Testing oracle: slower but assumption-free. Applies the same
    admissibility rules as fit(); returns the grid minimizer.
    """
    n_tc, n_m, n_omega = (int(k) for k in grid_spec)
    if n_tc < 1 or n_m < 1 or n_omega < 1:
        raise ValidationError(f"empty grid spec {grid_spec}")
    t, y = _window_arrays(series, window)
    tc_lo, tc_hi = cfg.tc_bounds(window)
    tcs = np.linspace(tc_lo + TC_GUARD, tc_hi, n_tc)
    ms = np.linspace(cfg.m_min, cfg.m_max, n_m)
    omegas = np.linspace(cfg.omega_min, cfg.omega_max, n_omega)
    func = _objective(t, y, cfg)

    best = (math.inf, None)
    evals = 0
    for tc in tcs:
        for m in ms:
            for omega in omegas:
                value = func((tc, m, omega))
                evals += 1
                if value < best[0]:
                    best = (value, (tc, m, omega))
    if best[1] is None:
        raise FitFailedError(f"no admissible grid point among {evals}")
    tc, m, omega = best[1]
    return _result_at(t, y, tc, m, omega, window.length, evals)

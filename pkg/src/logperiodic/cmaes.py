"""Covariance matrix adaptation evolution strategy on a box.

A compact (mu/mu_w, lambda)-CMA-ES with the standard strategy-parameter
defaults, specialized for low-dimensional bound-constrained problems.
The search runs in box-normalized coordinates [0,1]^n; candidates are
clipped onto the box before evaluation and the pre-clip violation adds
a quadratic penalty to the selection fitness, so the reported optimum
is always feasible and evaluated at its true objective value.

Everything is driven by a caller-supplied numpy Generator: identical
generators give bit-identical runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["CmaResult", "minimize_box"]

# Penalty weight on squared normalized box violation; only has to dominate
# the objective's local variation near the boundary, not its global scale.
_PENALTY = 1e4

# Stop a run once the sampling ellipsoid collapses below this size
# (normalized coordinates); further evaluations cannot move the optimum.
_SIGMA_FLOOR = 1e-13


@dataclass(frozen=True)
class CmaResult:
    x: np.ndarray
    cost: float
    evaluations: int


def _run(func, lower, upper, x0_norm, sigma0, popsize, max_evals, rng):
    """One CMA-ES run in normalized coordinates; returns (x_best, f_best, evals)."""
    n = lower.size
    width = upper - lower

    lam = popsize
    mu = lam // 2
    raw_weights = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights = raw_weights / raw_weights.sum()
    mueff = 1.0 / np.sum(weights**2)

    csigma = (mueff + 2.0) / (n + mueff + 5.0)
    dsigma = 1.0 + 2.0 * max(0.0, math.sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + csigma
    cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n)
    c1 = 2.0 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) ** 2 + mueff))
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

    mean = x0_norm.copy()
    sigma = sigma0
    cov = np.eye(n)
    p_sigma = np.zeros(n)
    p_c = np.zeros(n)
    eigvals = np.ones(n)
    eigvecs = np.eye(n)

    best_x = np.clip(mean, 0.0, 1.0)
    best_f = func(lower + best_x * width)
    evals = 1

    while evals + lam <= max_evals:
        sqrt_d = np.sqrt(eigvals)
        z = rng.standard_normal((lam, n))
        y = z @ (eigvecs * sqrt_d).T          # y_k ~ N(0, C)
        x = mean + sigma * y
        x_clip = np.clip(x, 0.0, 1.0)
        violation = np.sum((x - x_clip) ** 2, axis=1)

        fitness = np.empty(lam)
        for k in range(lam):
            f_raw = func(lower + x_clip[k] * width)
            evals += 1
            if f_raw < best_f:
                best_f = f_raw
                best_x = x_clip[k].copy()
            fitness[k] = f_raw + _PENALTY * violation[k] if math.isfinite(f_raw) else f_raw

        order = np.argsort(fitness, kind="stable")
        y_sel = y[order[:mu]]
        y_w = weights @ y_sel
        mean = mean + sigma * y_w

        # step-size control
        c_invsqrt_y = (eigvecs / sqrt_d) @ (eigvecs.T @ y_w)
        p_sigma = (1.0 - csigma) * p_sigma + math.sqrt(csigma * (2.0 - csigma) * mueff) * c_invsqrt_y
        ps_norm = np.linalg.norm(p_sigma)
        sigma *= math.exp((csigma / dsigma) * (ps_norm / chi_n - 1.0))

        # covariance adaptation (rank-1 + rank-mu)
        gens_scale = math.sqrt(1.0 - (1.0 - csigma) ** (2.0 * evals / lam))
        hsig = 1.0 if ps_norm / gens_scale < (1.4 + 2.0 / (n + 1.0)) * chi_n else 0.0
        p_c = (1.0 - cc) * p_c + hsig * math.sqrt(cc * (2.0 - cc) * mueff) * y_w
        rank_mu = (y_sel * weights[:, None]).T @ y_sel
        cov = (
            (1.0 - c1 - cmu) * cov
            + c1 * (np.outer(p_c, p_c) + (1.0 - hsig) * cc * (2.0 - cc) * cov)
            + cmu * rank_mu
        )
        cov = (cov + cov.T) / 2.0

        eigvals, eigvecs = np.linalg.eigh(cov)
        eigvals = np.maximum(eigvals, 1e-30)

        if sigma * math.sqrt(eigvals[-1]) < _SIGMA_FLOOR:
            break
        if not math.isfinite(sigma) or sigma > 1e6:
            break

    return best_x, best_f, evals


def minimize_box(func, lower, upper, popsize, max_evals, restarts, rng) -> CmaResult:
    """Minimize func over the box [lower, upper] with restarted CMA-ES.

    The first run starts at the box center with step size 1/4 of each box
    width; subsequent runs restart from uniform random points. Each run
    gets max_evals objective evaluations. func may return +inf to reject
    a candidate outright.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = lower.size
    best_x = None
    best_f = math.inf
    total_evals = 0
    for run in range(max(1, restarts)):
        x0 = np.full(n, 0.5) if run == 0 else rng.uniform(0.0, 1.0, n)
        x_norm, f, used = _run(func, lower, upper, x0, 0.25, popsize, max_evals, rng)
        total_evals += used
        if best_x is None or f < best_f:
            best_f = f
            best_x = x_norm
    x = lower + best_x * (upper - lower)
    return CmaResult(x=x, cost=best_f, evaluations=total_evals)

"""Saturation scaling-law fitting over (n_f, n_c, score) grids.

The model is

    score(n_f, n_c) = S_inf - (C_f * n_f**-alpha + C_c * n_c**-beta)

fit by bounded damped least squares with deterministic multi-start. Also
provides the ordinary-least-squares line fit used for alignment-vs-accuracy
style comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from platonic_align.errors import DataError, FittingError, ParameterError

DEFAULT_RESTARTS = 16

# Parameter order everywhere: (s_inf, c_f, alpha, c_c, beta). Exponents get
# a tiny positive floor so "alpha, beta > 0" survives the bounded optimizer.
_LOWER = np.array([0.0, 0.0, 1e-6, 0.0, 1e-6])
_UPPER = np.array([1.0, 2.0, 5.0, 2.0, 5.0])


@dataclass(frozen=True)
class ScoreGrid:
    """Observed alignment scores at (n_f, n_c) sample sizes."""

    points: tuple[tuple[int, int, float], ...]

    def __init__(self, points) -> None:
        cleaned = []
        seen = set()
        for entry in points:
            try:
                n_f, n_c, score = entry
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"grid point must be (n_f, n_c, score), got {entry!r}") from exc
            for name, value in (("n_f", n_f), ("n_c", n_c)):
                if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                    raise ParameterError(f"{name} must be an integer >= 1, got {value!r}")
            score = float(score)
            if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                raise ParameterError(f"score must lie in [0, 1], got {score!r}")
            key = (int(n_f), int(n_c))
            if key in seen:
                raise ParameterError(f"duplicate grid key (n_f={key[0]}, n_c={key[1]})")
            seen.add(key)
            cleaned.append((key[0], key[1], score))
        object.__setattr__(self, "points", tuple(cleaned))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n_f = np.array([p[0] for p in self.points], dtype=np.float64)
        n_c = np.array([p[1] for p in self.points], dtype=np.float64)
        score = np.array([p[2] for p in self.points], dtype=np.float64)
        return n_f, n_c, score


@dataclass(frozen=True)
class ScalingLawFit:
    s_inf: float
    c_f: float
    alpha: float
    c_c: float
    beta: float
    r2: float
    residual_norm: float
    converged: bool
    iterations: int
    degenerate: bool = False


@dataclass(frozen=True)
class LineFit:
    """OLS line y = slope * x + intercept with Pearson r.

    Iterable, so it unpacks as (slope, intercept, r). A constant-y input is
    reported as slope 0 with r = 0 and ``y_constant`` set, rather than an
    undefined correlation.
    """

    slope: float
    intercept: float
    r: float
    y_constant: bool = False

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r))


def _model(params: np.ndarray, n_f: np.ndarray, n_c: np.ndarray) -> np.ndarray:
    s_inf, c_f, alpha, c_c, beta = params
    return s_inf - c_f * n_f ** (-alpha) - c_c * n_c ** (-beta)


def _start_points(
    n_f: np.ndarray, n_c: np.ndarray, score: np.ndarray, restarts: int, seed: int
) -> list[np.ndarray]:
    s0 = min(1.0, float(score.max()) + 0.02)
    # Deficit at the smallest grid point seeds the two coefficient terms.
    smallest = int(np.lexsort((n_c, n_f))[0])
    deficit = max(s0 - float(score[smallest]), 0.0)
    base = np.array([s0, deficit / 2.0, 1.0, deficit / 2.0, 1.0])
    starts = [np.clip(base, _LOWER, _UPPER)]
    rng = np.random.default_rng(seed)
    coeff_high = min(2.0, max(0.5, 4.0 * deficit))
    for _ in range(restarts):
        draw = np.array(
            [
                rng.uniform(min(float(score.max()), 1.0), 1.0),
                rng.uniform(0.0, coeff_high),
                rng.uniform(0.1, 3.0),
                rng.uniform(0.0, coeff_high),
                rng.uniform(0.1, 3.0),
            ]
        )
        starts.append(np.clip(draw, _LOWER, _UPPER))
    return starts


def fit_scaling_law(
    grid: ScoreGrid,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> ScalingLawFit:
    """Fit the saturation law to a grid, keeping the best of many restarts.

    The optimizer is a bounded trust-region least-squares solver; restarts
    perturb the initial point with a seeded generator, so the returned
    optimum (lowest residual, ties to the earliest restart) is deterministic.
    R-squared is computed over the fitting grid itself.
    """
    if not isinstance(grid, ScoreGrid):
        grid = ScoreGrid(grid)
    if restarts < 0:
        raise ParameterError(f"restarts must be >= 0, got {restarts}")
    n_f, n_c, score = grid.arrays()
    if len(grid.points) < 6:
        raise ParameterError(f"fitting needs at least 6 grid points, got {len(grid.points)}")
    if len(set(n_f.tolist())) < 2 or len(set(n_c.tolist())) < 2:
        raise ParameterError("fitting needs at least 2 distinct n_f and 2 distinct n_c values")

    mean = float(score.mean())
    ss_tot = float(np.sum((score - mean) ** 2))
    if ss_tot == 0.0:
        # Constant scores: the law collapses to score = S_inf exactly.
        return ScalingLawFit(
            s_inf=mean,
            c_f=0.0,
            alpha=1.0,
            c_c=0.0,
            beta=1.0,
            r2=1.0,
            residual_norm=0.0,
            converged=True,
            iterations=0,
            degenerate=True,
        )

    if bounds is None:
        lower, upper = _LOWER, _UPPER
    else:
        lower = np.asarray(bounds[0], dtype=np.float64)
        upper = np.asarray(bounds[1], dtype=np.float64)
        if lower.shape != (5,) or upper.shape != (5,):
            raise ParameterError("bounds must be two length-5 arrays (lower, upper)")

    def residuals(params: np.ndarray) -> np.ndarray:
        return _model(params, n_f, n_c) - score

    best = None
    for x0 in _start_points(n_f, n_c, score, restarts, seed):
        try:
            result = least_squares(
                residuals,
                np.clip(x0, lower, upper),
                bounds=(lower, upper),
                method="trf",
                ftol=1e-12,
                xtol=1e-12,
                gtol=1e-12,
                max_nfev=3000,
            )
        except Exception:
            continue
        if best is None or result.cost < best.cost:
            best = result
    if best is None:
        raise FittingError("no restart produced a usable optimum")

    s_inf, c_f, alpha, c_c, beta = (float(v) for v in best.x)
    ss_res = float(np.sum(residuals(best.x) ** 2))
    return ScalingLawFit(
        s_inf=s_inf,
        c_f=c_f,
        alpha=alpha,
        c_c=c_c,
        beta=beta,
        r2=1.0 - ss_res / ss_tot,
        residual_norm=math.sqrt(ss_res),
        converged=bool(best.status > 0),
        iterations=int(best.nfev),
    )


def predict_score(fit: ScalingLawFit, n_f: int, n_c: int) -> float:
    """Evaluate the fitted law at integer sample sizes n_f, n_c >= 1.

    The value can fall below 0 for small n when C_f + C_c > S_inf; it is
    returned unclamped.
    """
    for name, value in (("n_f", n_f), ("n_c", n_c)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
            raise ParameterError(f"{name} must be an integer >= 1, got {value!r}")
    return float(fit.s_inf - fit.c_f * float(n_f) ** (-fit.alpha) - fit.c_c * float(n_c) ** (-fit.beta))


def fit_line(points) -> LineFit:
    """Ordinary least squares through (x, y) points, with Pearson r."""
    points = list(points)
    if len(points) < 2:
        raise ParameterError(f"line fit needs at least 2 points, got {len(points)}")
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("line-fit points contain non-finite values")

    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ParameterError("all x values are identical; slope is undefined")
    syy = float(dy @ dy)
    slope = float(dx @ dy) / sxx
    intercept = float(y.mean() - slope * x.mean())
    if syy == 0.0:
        return LineFit(slope=slope, intercept=intercept, r=0.0, y_constant=True)
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return LineFit(slope=slope, intercept=intercept, r=r)

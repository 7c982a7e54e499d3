"""Large-N predictions for lambda_1 at beta = 1/2 and the leading-exponent fit.

Four closed forms for lambda_1(N) are exposed side by side and never
substituted for one another:

* ``leading``   8 pi sqrt(log N) / (4 pi N e)^(2/pi)
* ``nlo``       leading * [1 + (8 log(4 pi e^(-1-pi/2)) - pi) / (16 log N)]
* ``saddle``    8 pi sqrt(log(4 pi e^(-1-pi/2) N)) / ((4 pi e)^(2/pi) N^(2/pi))
* ``conjecture_old``  8 pi sqrt(log(4 pi N e)) / (4 pi N e)^(2/pi)

The fit regresses y = log((8 pi / lambda_1) sqrt(log N)) on x = log(4 pi N e)
with weights proportional to N^2; the slope estimates 2/pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

TWO_OVER_PI = 2.0 / math.pi
_SADDLE_SHIFT = 4.0 * math.pi * math.exp(-1.0 - math.pi / 2.0)


@dataclass(frozen=True)
class Prediction:
    N: int
    lambda1_leading: float
    lambda1_nlo: float
    lambda1_saddle: float
    lambda1_conjecture_old: float
    sumK_leading: float
    sumK_nlo: float
    lower_bound: float


def _scale(N: float) -> float:
    return (4.0 * math.pi * N * math.e) ** TWO_OVER_PI


def predict(N: int) -> Prediction:
    if N < 2:
        raise ValueError("predictions need N >= 2")
    logN = math.log(N)
    scale = _scale(N)
    leading = 8.0 * math.pi * math.sqrt(logN) / scale
    nlo = leading * (1.0 + (8.0 * math.log(_SADDLE_SHIFT) - math.pi) / (16.0 * logN))
    saddle = (
        8.0
        * math.pi
        * math.sqrt(math.log(_SADDLE_SHIFT * N))
        / ((4.0 * math.pi * math.e) ** TWO_OVER_PI * N**TWO_OVER_PI)
    )
    old = 8.0 * math.pi * math.sqrt(math.log(4.0 * math.pi * N * math.e)) / scale
    sumK = scale / (4.0 * math.sqrt(logN))
    sumK_nlo = scale / (4.0 * math.sqrt(math.log(_SADDLE_SHIFT * N))) * (1.0 + math.pi / (16.0 * logN))
    return Prediction(N, leading, nlo, saddle, old, sumK, sumK_nlo, 2.0 * math.pi / sumK)


def fit_coordinates(N, lambda1):
    """Plot axes: x = log(4 pi N e), y = log((8 pi / lambda_1) sqrt(log N))."""
    N = np.asarray(N, dtype=float)
    lam = np.asarray(lambda1, dtype=float)
    x = np.log(4.0 * np.pi * N * np.e)
    y = np.log(8.0 * np.pi / lam * np.sqrt(np.log(N)))
    return x, y


class DegenerateFit(ValueError):
    pass


@dataclass
class FitResult:
    gradient: float
    intercept: float
    gradient_ci_low: float
    gradient_ci_high: float
    intercept_ci_low: float
    intercept_ci_high: float
    r_squared_adjusted: float
    residuals: list
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    N: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "gradient": self.gradient,
            "intercept": self.intercept,
            "gradient_ci": [self.gradient_ci_low, self.gradient_ci_high],
            "intercept_ci": [self.intercept_ci_low, self.intercept_ci_high],
            "r_squared_adjusted": self.r_squared_adjusted,
            "two_over_pi": TWO_OVER_PI,
            "points": [
                {"N": n, "x": xi, "y": yi, "residual": r}
                for n, xi, yi, r in zip(self.N, self.x, self.y, self.residuals)
            ],
        }


def weighted_line_fit(x, y, w):
    """Weighted least squares for y = a + b x.

    Returns (a, b, cov, residuals, adjusted R^2). Weights are treated as
    relative: cov uses the weighted residual variance with n - 2 dof.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    n = len(x)
    if n < 3:
        raise DegenerateFit("need at least 3 points")
    if np.any(w <= 0):
        raise DegenerateFit("weights must be positive")
    w = w / w.sum()
    xm = np.dot(w, x)
    ym = np.dot(w, y)
    sxx = np.dot(w, (x - xm) ** 2)
    if sxx <= 0 or np.ptp(x) == 0:
        raise DegenerateFit("all x values are equal")
    b = np.dot(w, (x - xm) * (y - ym)) / sxx
    a = ym - b * xm
    resid = y - (a + b * x)
    sse = np.dot(w, resid**2)
    sst = np.dot(w, (y - ym) ** 2)
    sigma2 = sse / (n - 2)
    var_b = sigma2 / sxx
    var_a = sigma2 * (1.0 + xm**2 / sxx)
    cov_ab = -sigma2 * xm / sxx
    cov = np.array([[var_a, cov_ab], [cov_ab, var_b]])
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    r2_adj = 1.0 - (1.0 - r2) * (n - 1) / (n - 2)
    return a, b, cov, resid, r2_adj


def fit_leading_exponent(points, level: float = 0.95) -> FitResult:
    """Fit the log-log line through ``(N, lambda_1)`` pairs, weights ~ N^2."""
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateFit("need at least 3 points")
    Ns = np.array([p[0] for p in pts], dtype=float)
    lam = np.array([p[1] for p in pts], dtype=float)
    if np.any(Ns < 2) or np.any(lam <= 0):
        raise ValueError("need N >= 2 and lambda_1 > 0 for every point")
    x, y = fit_coordinates(Ns, lam)
    a, b, cov, resid, r2_adj = weighted_line_fit(x, y, Ns**2)
    n = len(pts)
    tq = stats.t.ppf(0.5 + level / 2.0, n - 2)
    se_a, se_b = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
    return FitResult(
        gradient=float(b),
        intercept=float(a),
        gradient_ci_low=float(b - tq * se_b),
        gradient_ci_high=float(b + tq * se_b),
        intercept_ci_low=float(a - tq * se_a),
        intercept_ci_high=float(a + tq * se_a),
        r_squared_adjusted=float(r2_adj),
        residuals=[float(r) for r in resid],
        x=[float(v) for v in x],
        y=[float(v) for v in y],
        N=[int(v) for v in Ns],
    )

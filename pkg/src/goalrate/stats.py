"""Hypothesis tests and tail probabilities.

The special functions (regularized incomplete gamma and beta) come from
``scipy.special``; the tests built on top of them are implemented here.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from statistics import NormalDist

_NORMAL = NormalDist()


class LowExpectedCountWarning(UserWarning):
    """Some expected cell value in a chi-square test is below 5."""


@dataclass(frozen=True)
class TestConfig:
    alpha: float = 0.05

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class ChiSqResult:
    statistic: float
    df: int
    pvalue: float
    low_expected: bool = False

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "df": self.df, "pvalue": self.pvalue,
                "low_expected": self.low_expected}


@dataclass(frozen=True)
class RegressionFit:
    intercept: float
    slope: float
    slope_se: float
    t_stat: float
    pvalue_slope: float
    r_squared: float
    residuals: np.ndarray = field(repr=False)

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "slope": self.slope,
            "slope_se": self.slope_se,
            "t_stat": self.t_stat,
            "pvalue_slope": self.pvalue_slope,
            "r_squared": self.r_squared,
            "residuals": [float(r) for r in self.residuals],
        }


@dataclass(frozen=True)
class NormalityResult:
    method: str  # "ks" or "shapiro_wilk"
    statistic: float
    pvalue: float

    def to_dict(self) -> dict:
        return {"method": self.method, "statistic": self.statistic, "pvalue": self.pvalue}


@dataclass(frozen=True)
class BootstrapSummary:
    replicates: int
    mean: float
    sd: float
    samples: np.ndarray = field(repr=False)

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {"replicates": self.replicates, "mean": self.mean, "sd": self.sd}
        if include_samples:
            out["samples"] = [float(s) for s in self.samples]
        return out


def chisq_sf(x: float, df: int) -> float:
    """Upper tail P(X > x) of the chi-square distribution, Q(df/2, x/2)."""
    if df < 1:
        raise ValueError(f"df must be a positive integer, got {df}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def chisq_gof(observed, probs) -> ChiSqResult:
    """Pearson chi-square goodness of fit of ``observed`` against ``probs``.

    ``observed`` need not be integer; block averages are fed in as-is.
    """
    obs = np.asarray(observed, dtype=float)
    p = np.asarray(probs, dtype=float)
    if obs.ndim != 1 or obs.shape != p.shape:
        raise ValueError(f"observed and probs must be 1-d of equal length, got {obs.shape} and {p.shape}")
    if len(obs) < 2:
        raise ValueError("need at least two cells")
    if np.any(obs < 0) or np.any(p < 0):
        raise ValueError("observed and probs must be non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probs must sum to 1, got {p.sum()!r}")
    n = obs.sum()
    if n <= 0:
        raise ValueError("observed total must be positive")
    if np.any((p == 0) & (obs > 0)):
        raise ValueError("zero probability cell with positive observation: statistic is infinite")
    expected = p * n
    keep = expected > 0
    statistic = float(np.sum((obs[keep] - expected[keep]) ** 2 / expected[keep]))
    low = bool(np.any(expected[keep] < 5))
    if low:
        warnings.warn("expected cell value below 5; chi-square approximation is rough",
                      LowExpectedCountWarning, stacklevel=2)
    df = len(obs) - 1
    return ChiSqResult(statistic, df, chisq_sf(statistic, df), low)


def student_t_sf(t: float, df: int) -> float:
    """Upper tail P(T > t) of Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    # P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    two_tail = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return 0.5 * two_tail if t >= 0 else 1.0 - 0.5 * two_tail


def ols_fit(x, y) -> RegressionFit:
    """Simple linear regression of y on x with a two-sided t-test on the slope."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d vectors of equal length")
    n = len(x)
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    xbar, ybar = x.mean(), y.mean()
    dx = x - xbar
    sxx = float(dx @ dx)
    if sxx == 0:
        raise ValueError("x is constant")
    slope = float(dx @ (y - ybar)) / sxx
    intercept = float(ybar - slope * xbar)
    residuals = y - (intercept + slope * x)
    rss = float(residuals @ residuals)
    tss = float((y - ybar) @ (y - ybar))
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0
    slope_se = math.sqrt(rss / (n - 2) / sxx)
    if slope_se == 0:
        t_stat = math.copysign(math.inf, slope) if slope != 0 else 0.0
        pvalue = 0.0 if slope != 0 else 1.0
    else:
        t_stat = slope / slope_se
        pvalue = min(1.0, 2.0 * student_t_sf(abs(t_stat), n - 2))
    return RegressionFit(intercept, slope, slope_se, t_stat, pvalue, r_squared, residuals)


def kolmogorov_sf(z: float, tol: float = 1e-12) -> float:
    """Asymptotic Kolmogorov tail 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 z^2)."""
    if z <= 0:
        return 1.0
    if z < 0.2:
        # the alternating series converges too slowly here and the tail is 1 to double precision
        return 1.0
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * z * z)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_normality(sample) -> NormalityResult:
    """One-sample KS test against a normal with mean and sd taken from the sample.

    No Lilliefors correction: the p-value is the plain asymptotic Kolmogorov tail.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    if n < 5:
        raise ValueError(f"need at least 5 observations, got {n}")
    mu, sd = x.mean(), x.std(ddof=1)
    if sd == 0:
        raise ValueError("sample has zero variance")
    cdf = np.array([_NORMAL.cdf(v) for v in (x - mu) / sd])
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    return NormalityResult("ks", d, kolmogorov_sf(math.sqrt(n) * d))


# Shapiro-Wilk coefficients and p-value polynomials (Royston's approximation).
_SW_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)
_SW_G = (-2.273, 0.459)


def _poly(coefs, x: float) -> float:
    # coefs in increasing order of power
    result = 0.0
    for c in reversed(coefs):
        result = result * x + c
    return result


def shapiro_wilk_coefficients(n: int) -> np.ndarray:
    """Antisymmetric weight vector for the sorted sample, unit norm."""
    if n < 3:
        raise ValueError("n must be >= 3")
    half = n // 2
    if n == 3:
        a = np.array([math.sqrt(0.5)])
    else:
        m = np.array([_NORMAL.inv_cdf((i - 0.375) / (n + 0.25)) for i in range(1, half + 1)])
        summ2 = 2.0 * float(m @ m)
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_SW_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = -m[1] / ssumm2 + _poly(_SW_C2, rsn)
            fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
            a = -m / fac
            a[1] = a2
        else:
            fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
            a = -m / fac
        a[0] = a1
    # a[i] weights the i-th largest minus i-th smallest
    full = np.zeros(n)
    full[:half] = -a
    full[n - half:] = a[::-1]
    return full


def shapiro_wilk(sample) -> NormalityResult:
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    if not 3 <= n <= 5000:
        raise ValueError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if x[-1] - x[0] < 1e-19 * max(1.0, abs(x[0])):
        raise ValueError("sample has zero variance")
    a = shapiro_wilk_coefficients(n)
    xc = (x - x.mean()) / (x[-1] - x[0])
    sax = float(a @ xc)
    ssx = float(xc @ xc)
    ssa = float(a @ a)
    w = min(1.0, sax * sax / (ssa * ssx))
    return NormalityResult("shapiro_wilk", w, _shapiro_wilk_pvalue(w, n))


def _shapiro_wilk_pvalue(w: float, n: int) -> float:
    if n == 3:
        pw = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return min(1.0, max(0.0, pw))
    w1 = math.log1p(-w) if w < 1 else -math.inf
    if n <= 11:
        gamma = _poly(_SW_G, n)
        if w1 >= gamma:
            return 0.0
        w1 = -math.log(gamma - w1)
        m = _poly(_SW_C3, n)
        s = math.exp(_poly(_SW_C4, n))
    else:
        ln = math.log(n)
        m = _poly(_SW_C5, ln)
        s = math.exp(_poly(_SW_C6, ln))
    if math.isinf(w1):
        return 1.0
    return 1.0 - NormalDist(m, s).cdf(w1)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """PCG64 stream for replicate ``index``; independent of scheduling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def parallel_map_indices(fn, n: int, workers: int = 1) -> list:
    """``[fn(i) for i in range(n)]``, optionally spread over threads."""
    if workers <= 1 or n < 2:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n), chunksize=max(1, n // (4 * workers))))


def bootstrap_mean_diff(a, b, replicates: int, seed: int, workers: int = 1) -> BootstrapSummary:
    """Bootstrap distribution of mean(b) - mean(a), resampling each vector independently."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")

    def one(i: int) -> float:
        rng = replicate_rng(seed, i)
        ia = rng.integers(0, len(a), size=len(a))
        ib = rng.integers(0, len(b), size=len(b))
        return b[ib].mean() - a[ia].mean()

    samples = np.array(parallel_map_indices(one, replicates, workers))
    sd = float(samples.std(ddof=1)) if replicates > 1 else 0.0
    return BootstrapSummary(replicates, float(samples.mean()), sd, samples)

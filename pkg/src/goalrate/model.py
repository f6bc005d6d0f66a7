"""The piecewise scoring model: constant rate before half time, linear after.

Discrete side: expected goals per minute ``g[m]`` are the first-half mean for
minutes 1..45 and the fitted regression line for 46..90; normalising gives the
minute probability vector.

Continuous side: the match is rescaled to [0, 1] with minute ``m`` covering
((m - 1)/90, m/90]. The rate is flat on the first half and linear on the
second, chosen so each minute integrates to its discrete value. The CDF is then

    F(x) = a1 * x                  for 0 <= x < 0.5
    F(x) = a2 x^2 + b2 x + c2      for 0.5 <= x < 1

and coincides with the cumulative minute probabilities at every x = m/90.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import stats
from .blocks import Half, block_probs, reshape_blocks
from .ingest import HALF_LENGTH, N_MINUTES, MinuteCounts

FIRST_MINUTES = np.arange(1, HALF_LENGTH + 1)
SECOND_MINUTES = np.arange(HALF_LENGTH + 1, N_MINUTES + 1)
ALL_MINUTES = np.arange(1, N_MINUTES + 1)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PiecewiseScoringModel:
    rate_first: float
    intercept: float
    slope: float
    total_goals: int
    prob_vector: tuple[float, ...] = field(repr=False)
    cdf_linear: float
    cdf_quad: tuple[float, float, float]

    def expected_goals(self, minute: int) -> float:
        if not 1 <= minute <= N_MINUTES:
            raise ValueError(f"minute {minute} outside 1..{N_MINUTES}")
        if minute <= HALF_LENGTH:
            return self.rate_first
        return self.intercept + self.slope * minute

    @property
    def expected_vector(self) -> np.ndarray:
        line = self.intercept + self.slope * SECOND_MINUTES
        return np.concatenate([np.full(HALF_LENGTH, self.rate_first), line])

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.prob_vector)

    @property
    def second_half_probs(self) -> np.ndarray:
        """The fitted line at minutes 46..90, normalised to sum to 1."""
        line = self.intercept + self.slope * SECOND_MINUTES
        return line / line.sum()

    @property
    def first_half_mass(self) -> float:
        return float(np.sum(self.prob_vector[:HALF_LENGTH]))

    def cdf(self, x):
        return cdf(self, x)

    def inverse_cdf(self, u):
        return inverse_cdf(self, u)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["prob_vector"] = list(self.prob_vector)
        d["cdf_quad"] = list(self.cdf_quad)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseScoringModel":
        return cls(
            rate_first=float(d["rate_first"]),
            intercept=float(d["intercept"]),
            slope=float(d["slope"]),
            total_goals=int(d["total_goals"]),
            prob_vector=tuple(float(p) for p in d["prob_vector"]),
            cdf_linear=float(d["cdf_linear"]),
            cdf_quad=tuple(float(c) for c in d["cdf_quad"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseScoringModel":
        return cls.from_dict(json.loads(text))


def cdf_coefficients(rate_first: float, intercept: float, slope: float) -> tuple[float, tuple[float, float, float]]:
    """(a1, (a2, b2, c2)) for the rescaled CDF, given the per-minute rates.

    On match time t in minutes the second-half rate is intercept + slope*(t + 1/2),
    which integrates over (m - 1, m] to intercept + slope*m.
    """
    first_mass = HALF_LENGTH * rate_first
    shifted = intercept + 0.5 * slope
    total = first_mass + HALF_LENGTH * intercept + slope * float(SECOND_MINUTES.sum())
    if total <= 0:
        raise ModelError("expected goal total must be positive")
    a1 = N_MINUTES * rate_first / total
    a2 = slope * N_MINUTES ** 2 / 2.0 / total
    b2 = N_MINUTES * shifted / total
    c2 = (first_mass - HALF_LENGTH * shifted - slope * HALF_LENGTH ** 2 / 2.0) / total
    return a1, (a2, b2, c2)


def cdf_from_half_means(mean_first: float, mean_second: float, slope: float):
    """CDF coefficients from half means and a second-half slope.

    Least squares puts the line through (68, mean_second), the centroid of
    minutes 46..90, which fixes the intercept.
    """
    intercept = mean_second - slope * float(SECOND_MINUTES.mean())
    return cdf_coefficients(mean_first, intercept, slope)


def fit_model(counts: MinuteCounts) -> PiecewiseScoringModel:
    if counts.total_first <= 0 or counts.total_second <= 0:
        raise ModelError("empty half: both halves need at least one goal")
    rate_first = counts.total_first / HALF_LENGTH
    line = stats.ols_fit(SECOND_MINUTES, counts.second)
    expected_second = line.intercept + line.slope * SECOND_MINUTES
    if np.any(expected_second <= 0):
        raise ModelError("fitted second-half line is not positive on minutes 46..90")
    g = np.concatenate([np.full(HALF_LENGTH, rate_first), expected_second])
    p = g / g.sum()
    a1, quad = cdf_coefficients(rate_first, line.intercept, line.slope)
    return PiecewiseScoringModel(
        rate_first=float(rate_first),
        intercept=float(line.intercept),
        slope=float(line.slope),
        total_goals=counts.total,
        prob_vector=tuple(float(v) for v in p),
        cdf_linear=float(a1),
        cdf_quad=tuple(float(c) for c in quad),
    )


def expected_goals(model: PiecewiseScoringModel, minute: int) -> float:
    return model.expected_goals(minute)


def cdf(model: PiecewiseScoringModel, x):
    """Probability that a goal falls before rescaled time ``x``; vectorised."""
    x_arr = np.asarray(x, dtype=float)
    a2, b2, c2 = model.cdf_quad
    out = np.where(
        x_arr < 0.5,
        model.cdf_linear * x_arr,
        (a2 * x_arr + b2) * x_arr + c2,
    )
    out = np.where(x_arr < 0, 0.0, np.where(x_arr >= 1, 1.0, out))
    return float(out) if out.ndim == 0 else out


def inverse_cdf(model: PiecewiseScoringModel, u):
    """Rescaled time x with F(x) = u for u in [0, 1]; vectorised."""
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0) | (u_arr > 1)):
        raise ValueError("u must lie in [0, 1]")
    a1 = model.cdf_linear
    a2, b2, c2 = model.cdf_quad
    breakpoint_mass = 0.5 * a1
    lower = np.divide(u_arr, a1, out=np.zeros_like(u_arr), where=a1 > 0)
    # root of a2 x^2 + b2 x + (c2 - u) = 0 in the cancellation-free form
    disc = np.maximum(b2 * b2 - 4.0 * a2 * (c2 - u_arr), 0.0)
    upper = 2.0 * (u_arr - c2) / (b2 + np.sqrt(disc))
    out = np.where(u_arr < breakpoint_mass, lower, np.clip(upper, 0.5, 1.0))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sample_goal_times(model: PiecewiseScoringModel, n: int, seed: int) -> np.ndarray:
    """``n`` goal times on [0, 1] by inverse-transform sampling (PCG64 stream)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    return np.atleast_1d(inverse_cdf(model, rng.random(n)))


def time_to_minute(times) -> np.ndarray:
    """Minute of match, ceil(90 x), at least 1."""
    return np.maximum(1, np.ceil(np.asarray(times) * N_MINUTES)).astype(int)


@dataclass(frozen=True)
class MaximaSimResult:
    n_sims: int
    histogram: dict[int, int]
    half: str | None = None
    n_goals: int = 0

    def tail_prob_ge(self, observed: int) -> float:
        return sum(f for v, f in self.histogram.items() if v >= observed) / self.n_sims

    def tail_prob_gt(self, observed: int) -> float:
        return sum(f for v, f in self.histogram.items() if v > observed) / self.n_sims

    def to_dict(self, observed: int | None = None) -> dict:
        d = {
            "half": self.half,
            "n_sims": self.n_sims,
            "n_goals": self.n_goals,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }
        if observed is not None:
            d["observed_max"] = int(observed)
            d["tail_prob_gt"] = self.tail_prob_gt(observed)
            d["tail_prob_ge"] = self.tail_prob_ge(observed)
        return d


def simulate_maxima(probs, n_goals: int, n_sims: int, seed: int, workers: int = 1,
                    half: str | None = None) -> MaximaSimResult:
    """Distribution of the largest cell of Multinomial(n_goals, probs).

    Simulation ``i`` draws from its own stream seeded by (seed, i), so results
    do not depend on ``workers``.
    """
    p = np.asarray(probs, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9 or np.any(p < 0):
        raise ValueError("probs must be a probability vector summing to 1")
    if n_goals < 1 or n_sims < 1:
        raise ValueError("n_goals and n_sims must be >= 1")
    p = p / p.sum()

    def one(i: int) -> int:
        return int(stats.replicate_rng(seed, i).multinomial(n_goals, p).max())

    maxima = stats.parallel_map_indices(one, n_sims, workers)
    values, freq = np.unique(maxima, return_counts=True)
    hist = {int(v): int(f) for v, f in zip(values, freq)}
    return MaximaSimResult(n_sims, hist, half, n_goals)


def half_maxima(counts: MinuteCounts, model: PiecewiseScoringModel, half: str, n_sims: int,
                seed: int, exclude_minutes=(), workers: int = 1) -> MaximaSimResult:
    """Maxima simulation for one half under the fitted model.

    First half: uniform over the minutes; second half: the normalised fitted
    line. ``exclude_minutes`` removes those minutes and their goals.
    """
    half = Half(half)
    if half is Half.FIRST:
        minutes, p = FIRST_MINUTES, np.full(HALF_LENGTH, 1.0 / HALF_LENGTH)
    elif half is Half.SECOND:
        minutes, p = SECOND_MINUTES, model.second_half_probs
    else:
        raise ValueError("maxima are simulated per half")
    keep = ~np.isin(minutes, list(exclude_minutes))
    if not keep.any():
        raise ModelError(f"every minute of the {half.value} half is excluded")
    p = p[keep] / p[keep].sum()
    n_goals = int(counts.counts[minutes[keep] - 1].sum())
    return simulate_maxima(p, n_goals, n_sims, seed, workers, half=half.value)


def _drop(observed: np.ndarray, probs: np.ndarray, minutes: np.ndarray, drop_minutes) -> tuple[np.ndarray, np.ndarray]:
    drop = set(int(m) for m in drop_minutes)
    unknown = drop - set(int(m) for m in minutes)
    if unknown:
        raise ValueError(f"cannot drop minutes outside the tested range: {sorted(unknown)}")
    keep = ~np.isin(minutes, list(drop))
    for lo, hi in ((1, HALF_LENGTH), (HALF_LENGTH + 1, N_MINUTES)):
        in_half = (minutes >= lo) & (minutes <= hi)
        if in_half.any() and not (keep & in_half).any():
            raise ModelError(f"dropping every minute of {lo}..{hi}")
    p = probs[keep]
    return observed[keep], p / p.sum()


def _gof(counts: MinuteCounts, probs: np.ndarray, half: Half, drop_minutes, block_size):
    drop_minutes = frozenset(drop_minutes or ())
    if drop_minutes and block_size is not None:
        raise ValueError("combine either dropped minutes or blocking, not both")
    if block_size is not None:
        blocking = reshape_blocks(counts, half, block_size)
        return stats.chisq_gof(blocking.values, block_probs(probs, blocking))
    minutes = ALL_MINUTES if half is Half.FULL else (FIRST_MINUTES if half is Half.FIRST else SECOND_MINUTES)
    observed = counts.counts[minutes - 1].astype(float)
    if drop_minutes:
        observed, probs = _drop(observed, probs, minutes, drop_minutes)
    return stats.chisq_gof(observed, probs)


def full_gof(counts: MinuteCounts, model: PiecewiseScoringModel, drop_minutes=(),
             block_size: int | None = None) -> stats.ChiSqResult:
    """Whole-match counts against the model's minute probabilities."""
    return _gof(counts, model.probs, Half.FULL, drop_minutes, block_size)


def first_half_homogeneity(counts: MinuteCounts, drop_minutes=(),
                           block_size: int | None = None) -> stats.ChiSqResult:
    """First-half counts against equal probabilities for every minute."""
    return _gof(counts, np.full(HALF_LENGTH, 1.0 / HALF_LENGTH), Half.FIRST, drop_minutes, block_size)


def second_half_gof(counts: MinuteCounts, model: PiecewiseScoringModel, drop_minutes=(),
                    block_size: int | None = None) -> stats.ChiSqResult:
    """Second-half counts against the normalised fitted line."""
    return _gof(counts, model.second_half_probs, Half.SECOND, drop_minutes, block_size)

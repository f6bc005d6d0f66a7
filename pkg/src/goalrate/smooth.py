"""Local polynomial regression (loess) with tricube weights.

Every fitted value is computed by its own weighted least-squares fit; there is
no interpolation surface and there are no robustness iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LoessFit:
    span: float
    degree: int
    fitted: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"span": self.span, "degree": self.degree, "fitted": [float(v) for v in self.fitted]}


def tricube(u):
    u = np.clip(np.abs(u), 0.0, 1.0)
    return (1.0 - u ** 3) ** 3


def loess_fit(x, y, span: float = 0.75, degree: int = 2) -> LoessFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-d vectors of equal length")
    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    if not 0 < span <= 1:
        raise ValueError(f"span must lie in (0, 1], got {span}")
    if n < degree + 2:
        raise ValueError(f"need at least {degree + 2} points for degree {degree}, got {n}")
    if np.any(np.diff(x) <= 0):
        raise ValueError("x must be strictly increasing")
    q = math.floor(span * n)
    if q < degree + 1:
        raise ValueError(f"span too small: {q} neighbours for a degree-{degree} fit")

    # centre and scale x so the local design matrices stay well conditioned
    scale = x[-1] - x[0]
    xs = (x - x[0]) / scale
    fitted = np.empty(n)
    for i in range(n):
        dist = np.abs(xs - xs[i])
        nearest = np.argsort(dist, kind="stable")[:q]
        d_max = dist[nearest].max()
        if d_max == 0:
            raise ValueError(f"degenerate neighbourhood at x={x[i]!r}")
        w = tricube(dist[nearest] / d_max)
        if np.count_nonzero(w) < degree + 1:
            raise ValueError(f"too few weighted neighbours at x={x[i]!r}")
        # local polynomial in (x - x_i); fitted value is the intercept
        design = np.vander(xs[nearest] - xs[i], degree + 1, increasing=True)
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(design * sw[:, None], y[nearest] * sw, rcond=None)
        fitted[i] = coef[0]
    return LoessFit(span, degree, fitted)

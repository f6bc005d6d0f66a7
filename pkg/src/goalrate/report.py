"""Running the full analysis and assembling the JSON report."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import model as m
from . import stats
from .blocks import Half, reshape_blocks
from .ingest import HALF_LENGTH, MinuteCounts, half_means
from .smooth import loess_fit

SCHEMA_VERSION = "1.0"

NOTES = (
    "KS p-value uses mean and sd estimated from the residuals with the asymptotic "
    "Kolmogorov distribution; no Lilliefors correction, so it is conservative.",
    "Chi-square tests use df = cells - 1, without deducting fitted parameters.",
    "Blocked chi-square tests feed per-block averages (not integer counts) into the statistic.",
    "Bootstrap resamples the two halves independently of each other.",
)


@dataclass
class FitConfig:
    seed: int = 0
    alpha: float = 0.05
    bootstrap_reps: int = 10_000
    sims: int = 10_000
    block_sizes: tuple[int, ...] = (2, 3, 5)
    drop_sets: tuple[tuple[int, ...], ...] = ((18,), (1, 2, 3, 18))
    sim_exclude: tuple[int, ...] = ()
    loess_span: float = 0.75
    loess_degree: int = 2
    loess_mode: str = "full"  # "full" or "per-half"
    workers: int = 1
    input_format: str | None = None
    seeds: dict = field(init=False)

    def __post_init__(self):
        stats.TestConfig(self.alpha)
        if self.loess_mode not in ("full", "per-half"):
            raise ValueError(f"loess mode must be 'full' or 'per-half', got {self.loess_mode!r}")
        self.seeds = {
            "bootstrap": self.seed,
            "maxima_first": self.seed + 1,
            "maxima_second": self.seed + 2,
        }

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "seeds": dict(self.seeds),
            "rng": "PCG64, per-replicate SeedSequence([seed, index])",
            "alpha": self.alpha,
            "bootstrap_reps": self.bootstrap_reps,
            "sims": self.sims,
            "block_sizes": list(self.block_sizes),
            "drop_sets": [list(d) for d in self.drop_sets],
            "sim_exclude": list(self.sim_exclude),
            "loess": {"span": self.loess_span, "degree": self.loess_degree, "mode": self.loess_mode},
        }


def _smooth(counts: MinuteCounts, cfg: FitConfig) -> dict:
    minutes = np.arange(1, 91, dtype=float)
    y = counts.counts.astype(float)
    if cfg.loess_mode == "full":
        fitted = loess_fit(minutes, y, cfg.loess_span, cfg.loess_degree).fitted
    else:
        fitted = np.concatenate([
            loess_fit(minutes[:HALF_LENGTH], y[:HALF_LENGTH], cfg.loess_span, cfg.loess_degree).fitted,
            loess_fit(minutes[HALF_LENGTH:], y[HALF_LENGTH:], cfg.loess_span, cfg.loess_degree).fitted,
        ])
    return {"span": cfg.loess_span, "degree": cfg.loess_degree, "mode": cfg.loess_mode,
            "fitted": [float(v) for v in fitted]}


class _Tests:
    def __init__(self, alpha: float):
        self.alpha = alpha
        self.entries: list[dict] = []
        self.warnings: list[str] = []

    def chisq(self, name: str, result: stats.ChiSqResult, drop=(), block_size=None):
        entry = {"name": name, "kind": "chisq", "drop_minutes": sorted(drop), "block_size": block_size}
        entry.update(result.to_dict())
        entry["reject"] = result.pvalue < self.alpha
        if result.low_expected:
            self.warnings.append(f"{name}: some expected cell values are below 5")
        self.entries.append(entry)


def _drop_label(drop) -> str:
    return "drop_" + "_".join(str(d) for d in sorted(drop))


def build_report(counts: MinuteCounts, cfg: FitConfig) -> dict:
    """Fit the model and run every test and simulation; returns a JSON-ready dict."""
    model = m.fit_model(counts)
    mean_first, mean_second = half_means(counts)
    t = _Tests(cfg.alpha)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", stats.LowExpectedCountWarning)

        t.chisq("first_half_uniform", m.first_half_homogeneity(counts))
        for drop in cfg.drop_sets:
            first_drop = [d for d in drop if d <= HALF_LENGTH]
            if first_drop and len(first_drop) == len(drop):
                t.chisq(f"first_half_uniform_{_drop_label(drop)}",
                        m.first_half_homogeneity(counts, drop), drop)
        for b in cfg.block_sizes:
            t.chisq(f"first_half_uniform_blocks_{b}", m.first_half_homogeneity(counts, block_size=b),
                    block_size=b)

        line = stats.ols_fit(m.SECOND_MINUTES, counts.second)
        reg = {"name": "second_half_ols", "kind": "regression", **line.to_dict(),
               "fitted_mean_second": float(np.mean(line.predict(m.SECOND_MINUTES))),
               "reject": line.pvalue_slope < cfg.alpha}
        t.entries.append(reg)
        for test in (stats.ks_normality, stats.shapiro_wilk):
            r = test(line.residuals)
            t.entries.append({"name": f"second_half_residuals_{r.method}", "kind": "normality",
                              **r.to_dict(), "reject": r.pvalue < cfg.alpha})

        t.chisq("second_half_line", m.second_half_gof(counts, model))

        t.chisq("full_match_model", m.full_gof(counts, model))
        for drop in cfg.drop_sets:
            t.chisq(f"full_match_model_{_drop_label(drop)}", m.full_gof(counts, model, drop), drop)
        for b in cfg.block_sizes:
            t.chisq(f"full_match_model_blocks_{b}", m.full_gof(counts, model, block_size=b), block_size=b)

    boot = stats.bootstrap_mean_diff(counts.first, counts.second, cfg.bootstrap_reps,
                                     cfg.seeds["bootstrap"], cfg.workers)
    t.entries.append({"name": "half_mean_difference_bootstrap", "kind": "bootstrap",
                      "observed": mean_second - mean_first, **boot.to_dict()})

    simulations = []
    for half, observed in (("first", int(counts.first.max())), ("second", int(counts.second.max()))):
        sim = m.half_maxima(counts, model, half, cfg.sims, cfg.seeds[f"maxima_{half}"],
                            exclude_minutes=cfg.sim_exclude, workers=cfg.workers)
        simulations.append(sim.to_dict(observed))

    def _argext(vec, fn, offset):
        return {"minute": int(fn(vec)) + 1 + offset, "count": int(vec[fn(vec)])}

    report = {
        "schema_version": SCHEMA_VERSION,
        "dataset": {
            "input_format": cfg.input_format,
            "counts": [int(c) for c in counts.counts],
            "total": counts.total,
            "total_first": counts.total_first,
            "total_second": counts.total_second,
            "mean_first": mean_first,
            "mean_second": mean_second,
            "max_first": _argext(counts.first, np.argmax, 0),
            "min_first": _argext(counts.first, np.argmin, 0),
            "max_second": _argext(counts.second, np.argmax, HALF_LENGTH),
        },
        "model": {**model.to_dict(), "first_half_mass": model.first_half_mass},
        "smooth": _smooth(counts, cfg),
        "blocks": [reshape_blocks(counts, Half.FULL, b).to_dict() for b in cfg.block_sizes],
        "tests": t.entries,
        "simulations": simulations,
        "config": cfg.to_dict(),
        "warnings": t.warnings + list(NOTES),
    }
    _check_finite(report)
    return report


def _check_finite(obj, path="report"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise FloatingPointError(f"non-finite value at {path}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("goalrate").joinpath("schema/report.schema.json").read_text())


def model_from_report(report: dict) -> m.PiecewiseScoringModel:
    fields = {k: v for k, v in report["model"].items() if k != "first_half_mass"}
    return m.PiecewiseScoringModel.from_dict(fields)


def summary_lines(report: dict) -> list[str]:
    """Human-readable digest; p-values at 4 decimals."""
    d = report["dataset"]
    mod = report["model"]
    lines = [
        f"goals: {d['total']} (first half {d['total_first']}, second half {d['total_second']})",
        f"half means: {d['mean_first']:.2f} / {d['mean_second']:.2f}",
        f"model: first-half rate {mod['rate_first']:.4f}; second-half line "
        f"{mod['intercept']:.4f} + {mod['slope']:.4f} * minute; P(first half) = {mod['first_half_mass']:.4f}",
        f"cdf: {mod['cdf_linear']:.6f} x | {mod['cdf_quad'][0]:.6f} x^2 + {mod['cdf_quad'][1]:.6f} x + "
        f"{mod['cdf_quad'][2]:.6f}",
    ]
    for e in report["tests"]:
        if e["kind"] == "chisq":
            lines.append(f"{e['name']}: chi2={e['statistic']:.4f} df={e['df']} p={e['pvalue']:.4f}")
        elif e["kind"] == "regression":
            lines.append(f"{e['name']}: slope={e['slope']:.4f} se={e['slope_se']:.4f} "
                         f"p={e['pvalue_slope']:.4f} R2={e['r_squared']:.4f}")
        elif e["kind"] == "normality":
            lines.append(f"{e['name']}: stat={e['statistic']:.4f} p={e['pvalue']:.4f}")
        elif e["kind"] == "bootstrap":
            lines.append(f"{e['name']}: mean={e['mean']:.4f} sd={e['sd']:.4f} (B={e['replicates']})")
    for s in report["simulations"]:
        lines.append(f"maxima_{s['half']}: observed {s['observed_max']}, "
                     f"P(max > obs)={s['tail_prob_gt']:.4f} P(max >= obs)={s['tail_prob_ge']:.4f}")
    return lines

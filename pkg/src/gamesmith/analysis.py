"""Expressive range and metric-weight controllability studies.

Expressive range: sample many designs, playtest each with all weights at 1,
and aggregate the per-design mean metric scores of the playable ones.
Controllability: for each sampled playable game and each metric, optimize
once with that metric's weight driven low and once driven high, re-evaluate
both outputs with all-ones weights, and test whether the score difference
shifts in the direction the metric's polarity predicts.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm, rankdata

from .metrics import METRIC_NAMES, PENALTY_METRICS, MetricWeights
from .evolve import ArgmaxSelector, EvolutionConfig, balance, generate
from .sampler import SamplerCaps, sample_random_design
from .seeding import child_seed
from .simulate import SimConfig, simulate

HISTOGRAM_BINS = 40


def signed_rank_test(deltas: list[float], direction: str = "+") -> float:
    """One-sided Wilcoxon signed-rank p-value for a shift in `direction`.

    Zero deltas are dropped; an all-zero sample carries no evidence and
    returns 0.5. Ties get midranks. Exact by full sign enumeration up to
    n = 16, normal approximation with tie correction beyond.
    """
    if direction not in ("+", "-"):
        raise ValueError("direction must be '+' or '-'")
    values = np.asarray([d for d in deltas if d != 0.0], dtype=float)
    if direction == "-":
        values = -values
    n = len(values)
    if n == 0:
        return 0.5
    ranks = rankdata(np.abs(values))
    w_plus = float(np.sum(ranks[values > 0]))
    if n <= 16:
        # All 2^n sign assignments are equally likely under the null.
        # Rank sums are multiples of 0.5, exact in floats, so >= is exact.
        patterns = np.arange(1 << n, dtype=np.uint32)
        bits = ((patterns[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(np.float64)
        w_all = bits @ ranks
        return float(np.count_nonzero(w_all >= w_plus) / (1 << n))
    mean = n * (n + 1) / 4.0
    _, counts = np.unique(ranks, return_counts=True)
    tie_term = np.sum(counts**3 - counts) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    z = (w_plus - mean - 0.5) / np.sqrt(var)
    return float(norm.sf(z))


@dataclass(frozen=True)
class MetricStats:
    min: float
    mean: float
    max: float
    variance: float


@dataclass(frozen=True)
class ExpressiveRangeReport:
    n_generated: int
    n_playable: int
    stats: dict[str, MetricStats]
    histograms: dict[str, dict]
    rows: tuple[tuple[int, dict[str, float]], ...]

    def to_dict(self) -> dict:
        return {
            "nGenerated": self.n_generated,
            "nPlayable": self.n_playable,
            "stats": {m: vars(s).copy() for m, s in self.stats.items()},
            "histograms": {m: {"binEdges": list(h["binEdges"]),
                               "counts": list(h["counts"])}
                           for m, h in self.histograms.items()},
            "rows": [{"design": i, "meanMetrics": dict(metrics)} for i, metrics in self.rows],
        }

    @staticmethod
    def from_dict(doc: dict) -> "ExpressiveRangeReport":
        return ExpressiveRangeReport(
            n_generated=doc["nGenerated"],
            n_playable=doc["nPlayable"],
            stats={m: MetricStats(**s) for m, s in doc["stats"].items()},
            histograms={m: {"binEdges": list(h["binEdges"]), "counts": list(h["counts"])}
                        for m, h in doc["histograms"].items()},
            rows=tuple((r["design"], dict(r["meanMetrics"])) for r in doc["rows"]),
        )


def _histogram(values: np.ndarray) -> dict:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(values, bins=HISTOGRAM_BINS, range=(lo, hi))
    return {"binEdges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def expressive_range(n: int, caps: SamplerCaps, sim_cfg: SimConfig,
                     seed: int) -> ExpressiveRangeReport:
    """Sample n designs, keep the playable ones, aggregate their mean scores."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ones = MetricWeights()
    rows: list[tuple[int, dict[str, float]]] = []
    for i in range(n):
        rng = np.random.default_rng(child_seed(seed, "sample", i))
        design = sample_random_design(caps, rng, name=f"sampled-{i}")
        report = simulate(design, ones, sim_cfg.with_seed(child_seed(seed, "sim", i)))
        if report.playable:
            rows.append((i, report.mean_metrics.as_dict()))
    stats: dict[str, MetricStats] = {}
    histograms: dict[str, dict] = {}
    if rows:
        for name in METRIC_NAMES:
            values = np.asarray([metrics[name] for _, metrics in rows], dtype=float)
            stats[name] = MetricStats(
                min=float(values.min()),
                mean=float(values.mean()),
                max=float(values.max()),
                variance=float(values.var()),
            )
            histograms[name] = _histogram(values)
    return ExpressiveRangeReport(
        n_generated=n,
        n_playable=len(rows),
        stats=stats,
        histograms=histograms,
        rows=tuple(rows),
    )


@dataclass(frozen=True)
class MetricControl:
    deltas: tuple[float, ...]
    scores_low: tuple[float, ...]
    scores_high: tuple[float, ...]
    mean_delta: float
    std_delta: float
    direction: str
    p_value: float


@dataclass(frozen=True)
class ControllabilityReport:
    mode: str
    n_games: int
    w_low: float
    w_high: float
    metrics: dict[str, MetricControl]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "nGames": self.n_games,
            "wLow": self.w_low,
            "wHigh": self.w_high,
            "metrics": {
                m: {
                    "deltas": list(c.deltas),
                    "scoresLow": list(c.scores_low),
                    "scoresHigh": list(c.scores_high),
                    "meanDelta": c.mean_delta,
                    "stdDelta": c.std_delta,
                    "direction": c.direction,
                    "pValue": c.p_value,
                }
                for m, c in self.metrics.items()
            },
        }

    @staticmethod
    def from_dict(doc: dict) -> "ControllabilityReport":
        return ControllabilityReport(
            mode=doc["mode"],
            n_games=doc["nGames"],
            w_low=doc["wLow"],
            w_high=doc["wHigh"],
            metrics={
                m: MetricControl(
                    deltas=tuple(c["deltas"]),
                    scores_low=tuple(c["scoresLow"]),
                    scores_high=tuple(c["scoresHigh"]),
                    mean_delta=c["meanDelta"],
                    std_delta=c["stdDelta"],
                    direction=c["direction"],
                    p_value=c["pValue"],
                )
                for m, c in doc["metrics"].items()
            },
        )


def sample_playable_designs(n_games: int, caps: SamplerCaps, sim_cfg: SimConfig,
                            seed: int) -> list:
    """Rejection-sample designs until n_games playable ones are found."""
    ones = MetricWeights()
    designs = []
    i = 0
    while len(designs) < n_games:
        rng = np.random.default_rng(child_seed(seed, "game", i))
        design = sample_random_design(caps, rng, name=f"game-{len(designs)}")
        report = simulate(design, ones, sim_cfg.with_seed(child_seed(seed, "probe", i)))
        if report.playable:
            designs.append(design)
        i += 1
    return designs


def _run_arm(args) -> tuple[int, str, str, dict[str, float]]:
    design, mode, metric, arm, weight, evo_cfg_doc, game_index, seed, score_runs = args
    evo_cfg = EvolutionConfig.from_dict(evo_cfg_doc)
    weights = MetricWeights.from_dict({metric: weight})
    cfg = replace(evo_cfg, weights=weights,
                  seed=child_seed(seed, "evo", game_index, metric, arm))
    optimizer = balance if mode == "balancer" else generate
    result = optimizer(design, cfg, ArgmaxSelector())
    # The measuring instrument: all-ones playtests with per-game seeds that
    # are identical across both arms.
    totals = {name: 0.0 for name in METRIC_NAMES}
    for k in range(score_runs):
        score_cfg = evo_cfg.sim_config.with_seed(child_seed(seed, "score", game_index, k))
        report = simulate(result.best_design, MetricWeights(), score_cfg)
        for name, value in report.mean_metrics.as_dict().items():
            totals[name] += value
    return game_index, metric, arm, {n: v / score_runs for n, v in totals.items()}


def controllability(n_games: int, w_low: float, w_high: float, mode: str,
                    evo_cfg: EvolutionConfig, seed: int,
                    caps: SamplerCaps | None = None,
                    workers: int = 1, score_runs: int = 3) -> ControllabilityReport:
    """Measure how driving one metric's weight to w_low vs w_high moves its score.

    Every optimized design is re-evaluated with all weights at 1 (fixed
    seed per game) so the measuring instrument is identical across arms;
    the per-game delta is score(w_high arm) minus score(w_low arm).
    """
    if n_games < 2:
        raise ValueError("n_games must be at least 2")
    if mode not in ("balancer", "generator"):
        raise ValueError("mode must be 'balancer' or 'generator'")
    caps = caps or SamplerCaps()
    designs = sample_playable_designs(n_games, caps, evo_cfg.sim_config, seed)

    tasks = []
    evo_doc = evo_cfg.to_dict()
    for g, design in enumerate(designs):
        for metric in METRIC_NAMES:
            for arm, weight in (("low", w_low), ("high", w_high)):
                tasks.append((design, mode, metric, arm, weight, evo_doc, g, seed,
                              score_runs))

    scores: dict[tuple[int, str, str], dict[str, float]] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for g, metric, arm, means in pool.map(_run_arm, tasks, chunksize=4):
                scores[(g, metric, arm)] = means
    else:
        for task in tasks:
            g, metric, arm, means = _run_arm(task)
            scores[(g, metric, arm)] = means

    metrics: dict[str, MetricControl] = {}
    for metric in METRIC_NAMES:
        lows = [scores[(g, metric, "low")][metric] for g in range(n_games)]
        highs = [scores[(g, metric, "high")][metric] for g in range(n_games)]
        deltas = [h - l for h, l in zip(highs, lows)]
        direction = "-" if metric in PENALTY_METRICS else "+"
        arr = np.asarray(deltas)
        metrics[metric] = MetricControl(
            deltas=tuple(deltas),
            scores_low=tuple(lows),
            scores_high=tuple(highs),
            mean_delta=float(arr.mean()),
            std_delta=float(arr.std()),
            direction=direction,
            p_value=signed_rank_test(deltas, direction),
        )
    return ControllabilityReport(mode=mode, n_games=n_games, w_low=w_low,
                                 w_high=w_high, metrics=metrics)


def _expressive_csv(report: ExpressiveRangeReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["design"] + list(METRIC_NAMES))
    for index, metrics in report.rows:
        writer.writerow([index] + [repr(metrics[m]) for m in METRIC_NAMES])
    return out.getvalue()


def _controllability_csv(report: ControllabilityReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["game", "metric", "scoreLow", "scoreHigh", "delta",
                     "direction", "meanDelta", "stdDelta", "pValue"])
    for metric in METRIC_NAMES:
        control = report.metrics[metric]
        for g in range(report.n_games):
            writer.writerow([
                g, metric,
                repr(control.scores_low[g]), repr(control.scores_high[g]),
                repr(control.deltas[g]), control.direction,
                repr(control.mean_delta), repr(control.std_delta), repr(control.p_value),
            ])
    return out.getvalue()


def render_report(report, fmt: str) -> str:
    """Serialize a study report deterministically as 'csv' or 'json' text."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        if isinstance(report, ExpressiveRangeReport):
            return _expressive_csv(report)
        if isinstance(report, ControllabilityReport):
            return _controllability_csv(report)
        raise TypeError(f"no CSV form for {type(report).__name__}")
    raise ValueError(f"unknown format {fmt!r}")


def export_report(report, fmt: str, path) -> None:
    """Write a report to disk; two exports of one report are byte-identical."""
    text = render_report(report, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)

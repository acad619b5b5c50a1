from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from scipy.stats import rankdata

from gamesmith.analysis import (
    ControllabilityReport,
    ExpressiveRangeReport,
    controllability,
    export_report,
    expressive_range,
    render_report,
    signed_rank_test,
)
from gamesmith.evolve import EvolutionConfig
from gamesmith.metrics import METRIC_NAMES
from gamesmith.sampler import SamplerCaps
from gamesmith.simulate import SimConfig


# --- signed_rank_test ---------------------------------------------------------

def enumerate_p(deltas, direction):
    """Independent oracle: walk all sign patterns explicitly."""
    values = [d for d in deltas if d != 0.0]
    if direction == "-":
        values = [-d for d in values]
    if not values:
        return 0.5
    ranks = rankdata(np.abs(values))
    observed = sum(r for r, v in zip(ranks, values) if v > 0)
    count = 0
    total = 0
    for signs in itertools.product((0, 1), repeat=len(values)):
        w = sum(r for r, s in zip(ranks, signs) if s)
        count += w >= observed
        total += 1
    return count / total


def test_all_positive_exact_value():
    # every pattern except W+ = max is below: p = 1 / 2^10
    assert signed_rank_test([1.0] * 10, "+") == pytest.approx(1 / 1024)


def test_all_zero_returns_half():
    assert signed_rank_test([0.0, 0.0, 0.0], "+") == 0.5


def test_symmetric_pairs_near_half():
    p = signed_rank_test([1, -1, 2, -2, 3, -3, 4, -4], "+")
    assert 0.3 < p < 0.7


def test_direction_flip_is_symmetric():
    deltas = [3.0, -1.0, 2.5, 4.0, -0.5]
    p_plus = signed_rank_test(deltas, "+")
    p_minus = signed_rank_test([-d for d in deltas], "-")
    assert p_plus == pytest.approx(p_minus)


def test_permutation_invariance():
    deltas = [0.3, -1.2, 2.0, 0.9, -0.1, 1.1]
    rng = np.random.default_rng(4)
    base = signed_rank_test(deltas, "+")
    for _ in range(10):
        shuffled = list(rng.permutation(deltas))
        assert signed_rank_test(shuffled, "+") == pytest.approx(base)


def test_matches_enumeration_up_to_n8():
    rng = np.random.default_rng(77)
    for n in range(2, 9):
        for _ in range(20):
            deltas = list(np.round(rng.normal(0, 2, size=n), 1))
            for direction in ("+", "-"):
                assert signed_rank_test(deltas, direction) == pytest.approx(
                    enumerate_p(deltas, direction)), (deltas, direction)


def test_matches_enumeration_with_zeros_and_ties():
    cases = [
        [0.0, 1.0, -1.0, 2.0],
        [1.0, 1.0, -1.0, 3.0, 0.0],
        [2.0, 2.0, 2.0],
        [-1.0, -1.0, 4.0, 4.0],
    ]
    for deltas in cases:
        for direction in ("+", "-"):
            assert signed_rank_test(deltas, direction) == pytest.approx(
                enumerate_p(deltas, direction))


def test_scipy_agreement_tie_free():
    from scipy.stats import wilcoxon

    rng = np.random.default_rng(5)
    for _ in range(20):
        deltas = list(rng.normal(0.5, 1.0, size=12))
        ours = signed_rank_test(deltas, "+")
        ref = wilcoxon(deltas, alternative="greater", method="exact").pvalue
        assert ours == pytest.approx(ref)


def test_large_n_normal_tail_reasonable():
    rng = np.random.default_rng(6)
    deltas = list(rng.normal(1.0, 1.0, size=40))
    p = signed_rank_test(deltas, "+")
    assert 0.0 < p < 1e-4


# --- expressive range ---------------------------------------------------------

def test_expressive_range_small_run():
    caps = SamplerCaps()
    report = expressive_range(60, caps, SimConfig(max_epochs=60), seed=5)
    assert report.n_generated == 60
    assert 0 < report.n_playable <= 60
    assert set(report.stats) == set(METRIC_NAMES)
    for name in METRIC_NAMES:
        hist = report.histograms[name]
        assert sum(hist["counts"]) == report.n_playable
        assert len(hist["binEdges"]) == len(hist["counts"]) + 1
        stats = report.stats[name]
        assert stats.min <= stats.mean <= stats.max
    assert len(report.rows) == report.n_playable


def test_expressive_range_zero_playable_corner():
    # Single-state designs have no transitions, so nothing is playable.
    caps = SamplerCaps(max_states=1, max_actions=1, max_resources=1,
                       max_transitions=1, max_taps=1, max_drains=1, max_converters=1)
    report = expressive_range(20, caps, SimConfig(max_epochs=10), seed=1)
    assert report.n_playable == 0
    assert report.stats == {}
    assert report.histograms == {}
    text = render_report(report, "json")
    assert "NaN" not in text and "nan" not in text


def test_expressive_range_deterministic():
    caps = SamplerCaps()
    a = expressive_range(40, caps, SimConfig(max_epochs=50), seed=9)
    b = expressive_range(40, caps, SimConfig(max_epochs=50), seed=9)
    assert a == b
    assert render_report(a, "json") == render_report(b, "json")
    assert render_report(a, "csv") == render_report(b, "csv")


def test_expressive_range_json_round_trip():
    report = expressive_range(30, SamplerCaps(), SimConfig(max_epochs=40), seed=3)
    doc = json.loads(render_report(report, "json"))
    again = ExpressiveRangeReport.from_dict(doc)
    assert again == report


def test_export_report_files(tmp_path):
    report = expressive_range(20, SamplerCaps(), SimConfig(max_epochs=30), seed=2)
    for fmt in ("csv", "json"):
        p1 = tmp_path / f"a.{fmt}"
        p2 = tmp_path / f"b.{fmt}"
        export_report(report, fmt, p1)
        export_report(report, fmt, p2)
        assert p1.read_bytes() == p2.read_bytes()
    header = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert header == "design," + ",".join(METRIC_NAMES)


# --- controllability (small smoke; the full bands live in acceptance) ---------

@pytest.fixture(scope="module")
def tiny_controllability():
    cfg = EvolutionConfig(population_size=4, generations=3, seed=1, human_every_k=0,
                          sim_config=SimConfig(max_epochs=40))
    return controllability(2, -100.0, 100.0, "balancer", cfg, seed=8,
                           caps=SamplerCaps(), workers=1)


def test_controllability_shape(tiny_controllability):
    report = tiny_controllability
    assert report.n_games == 2
    assert set(report.metrics) == set(METRIC_NAMES)
    for name, control in report.metrics.items():
        assert len(control.deltas) == 2
        assert len(control.scores_low) == 2
        assert control.direction in "+-"
        assert 0.0 <= control.p_value <= 1.0


def test_controllability_round_trip(tiny_controllability):
    doc = json.loads(render_report(tiny_controllability, "json"))
    again = ControllabilityReport.from_dict(doc)
    assert again == tiny_controllability


def test_controllability_csv_rows(tiny_controllability):
    lines = render_report(tiny_controllability, "csv").splitlines()
    # header + one row per game x metric
    assert len(lines) == 1 + 2 * len(METRIC_NAMES)


def test_controllability_null_arms_near_half():
    # wLow == wHigh: both arms differ only by optimizer seed noise.
    cfg = EvolutionConfig(population_size=4, generations=2, seed=3, human_every_k=0,
                          sim_config=SimConfig(max_epochs=30))
    report = controllability(3, 1.0, 1.0, "balancer", cfg, seed=21, workers=1)
    for name, control in report.metrics.items():
        assert 0.05 <= control.p_value <= 1.0

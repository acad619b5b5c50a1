from __future__ import annotations

import pytest

from gamesmith.errors import UnknownMetricError
from gamesmith.metrics import (
    METRIC_NAMES,
    PENALTY_METRICS,
    MetricVector,
    MetricWeights,
    compute_step_metrics,
    step_reward,
)
from gamesmith.model import Inventory


def empty_inv(design):
    return Inventory({r.id: 0.0 for r in design.resources})


def test_metric_order_is_fixed():
    assert METRIC_NAMES == (
        "goalImportance", "stateRepetition", "stateNovelty", "actionRepetition",
        "actionNovelty", "resourceGains", "resourceLosses", "rewardConsistency",
        "interactivity", "curiosity",
    )
    assert PENALTY_METRICS == {"stateRepetition", "actionRepetition",
                               "resourceLosses", "rewardConsistency"}


def test_step_reward_zero_weights():
    m = MetricVector(goalImportance=5, resourceGains=10, interactivity=2)
    assert step_reward(m, MetricWeights.zeros()) == 0.0


def test_step_reward_polarity_hand_computed():
    # 5 + 1 + 1 + 10 + 2 + 1 = 20 with all penalty terms zero.
    m = MetricVector(goalImportance=5, stateRepetition=0, stateNovelty=1,
                     actionRepetition=0, actionNovelty=1, resourceGains=10,
                     resourceLosses=0, rewardConsistency=0, interactivity=2,
                     curiosity=1)
    assert step_reward(m, MetricWeights()) == 20.0


def test_step_reward_negative_weight_multiplies():
    m = MetricVector(goalImportance=5, stateNovelty=1, actionNovelty=1,
                     resourceGains=10, interactivity=2, curiosity=1)
    w = MetricWeights.from_dict({"resourceGains": -100.0}, default=0.0)
    assert step_reward(m, w) == -1000.0


def test_step_reward_penalties_subtract():
    m = MetricVector(stateRepetition=3, actionRepetition=2, resourceLosses=4,
                     rewardConsistency=1)
    assert step_reward(m, MetricWeights()) == -10.0


def test_weights_reject_unknown_metric():
    with pytest.raises(UnknownMetricError):
        MetricWeights.from_dict({"coolness": 2.0})


def test_first_step_metrics(shop_design):
    m = compute_step_metrics(shop_design, "field", empty_inv(shop_design),
                             gains=2.0, losses=0.0, via_action=None,
                             visit_counts={}, action_counts={}, reward_history=[])
    assert m.stateNovelty == 1.0
    assert m.stateRepetition == 0.0
    assert m.rewardConsistency == 0.0
    assert m.actionNovelty == 0.0  # no action led to the initial placement
    assert m.actionRepetition == 0.0
    assert m.goalImportance == 1.0


def test_third_visit_counts_prior_visits(shop_design):
    m = compute_step_metrics(shop_design, "field", empty_inv(shop_design),
                             0.0, 0.0, "walk", {"field": 2}, {"walk": 5},
                             reward_history=[1.0, 2.0])
    assert m.stateRepetition == 2.0
    assert m.stateNovelty == 0.0
    assert m.actionRepetition == 5.0
    assert m.actionNovelty == 0.0


def test_interactivity_and_curiosity(shop_design):
    # field offers walk->shop and work->field; shop unvisited, field visited.
    m = compute_step_metrics(shop_design, "field", empty_inv(shop_design),
                             0.0, 0.0, None, {"field": 1}, {},
                             reward_history=[])
    assert m.interactivity == 2.0
    assert m.curiosity == 1.0  # shop is the one unvisited neighbor


def test_curiosity_excludes_current_state(shop_design):
    # Standing in an unvisited state: the state itself is not "unvisited
    # reachable", only genuinely other states count.
    m = compute_step_metrics(shop_design, "field", empty_inv(shop_design),
                             0.0, 0.0, None, {}, {}, reward_history=[])
    assert m.curiosity == 1.0  # shop only; field itself excluded


@pytest.mark.parametrize("history,expected", [
    ([], 0.0),
    ([7.0], 0.0),
    ([1.0, 2.0], 2.0),
    ([1.0, 2.0, 3.0], 3.0),
    ([1.0, 2.0, 3.0, 4.0], 7.0),
    ([1.0, 2.0, 3.0, 4.0, 5.0], 9.0),
])
def test_reward_consistency_latest_half(shop_design, history, expected):
    m = compute_step_metrics(shop_design, "field", empty_inv(shop_design),
                             0.0, 0.0, None, {}, {}, reward_history=history)
    assert m.rewardConsistency == expected


def test_metric_vector_round_trip():
    m = MetricVector(goalImportance=1.5, curiosity=3)
    assert MetricVector(**m.as_dict()) == m
    assert list(m.as_dict()) == list(METRIC_NAMES)

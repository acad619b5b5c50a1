"""The ten per-step playtest metrics and their weighted reward.

Metric order is fixed everywhere (reports, CSV columns, weight vectors):
goalImportance, stateRepetition, stateNovelty, actionRepetition,
actionNovelty, resourceGains, resourceLosses, rewardConsistency,
interactivity, curiosity. Four of them are penalties and enter the reward
with a minus sign: stateRepetition, actionRepetition, resourceLosses, and
rewardConsistency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import UnknownMetricError
from .mechanics import DesignIndex
from .model import GameDesign, Inventory

METRIC_NAMES = (
    "goalImportance",
    "stateRepetition",
    "stateNovelty",
    "actionRepetition",
    "actionNovelty",
    "resourceGains",
    "resourceLosses",
    "rewardConsistency",
    "interactivity",
    "curiosity",
)

PENALTY_METRICS = frozenset(
    {"stateRepetition", "actionRepetition", "resourceLosses", "rewardConsistency"}
)

# +1 where a higher score is good, -1 where it is a penalty.
METRIC_SIGNS = {name: (-1.0 if name in PENALTY_METRICS else 1.0) for name in METRIC_NAMES}


@dataclass(frozen=True)
class MetricVector:
    goalImportance: float = 0.0
    stateRepetition: float = 0.0
    stateNovelty: float = 0.0
    actionRepetition: float = 0.0
    actionNovelty: float = 0.0
    resourceGains: float = 0.0
    resourceLosses: float = 0.0
    rewardConsistency: float = 0.0
    interactivity: float = 0.0
    curiosity: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in METRIC_NAMES)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


@dataclass(frozen=True)
class MetricWeights:
    """One multiplier per metric; negative weights invert what the agent values."""

    goalImportance: float = 1.0
    stateRepetition: float = 1.0
    stateNovelty: float = 1.0
    actionRepetition: float = 1.0
    actionNovelty: float = 1.0
    resourceGains: float = 1.0
    resourceLosses: float = 1.0
    rewardConsistency: float = 1.0
    interactivity: float = 1.0
    curiosity: float = 1.0

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    @staticmethod
    def from_dict(values: Mapping[str, float], default: float = 1.0) -> "MetricWeights":
        unknown = set(values) - set(METRIC_NAMES)
        if unknown:
            raise UnknownMetricError(f"unknown metric name(s): {sorted(unknown)}")
        return MetricWeights(**{name: float(values.get(name, default)) for name in METRIC_NAMES})

    @staticmethod
    def zeros() -> "MetricWeights":
        return MetricWeights(**{name: 0.0 for name in METRIC_NAMES})


def step_reward(m: MetricVector, w: MetricWeights) -> float:
    """Weighted sum of the metrics with penalties subtracted."""
    total = 0.0
    for name in METRIC_NAMES:
        total += METRIC_SIGNS[name] * getattr(w, name) * getattr(m, name)
    return total


def arrival_metrics(
    index: DesignIndex,
    current_state: str,
    gains: float,
    losses: float,
    via_action: str | None,
    visit_counts: Mapping[str, int],
    action_counts: Mapping[str, int],
    consistency: float,
) -> MetricVector:
    """Core scoring shared by the public op and the simulator's fast path.

    Interactivity counts the choices the design offers at the state (its
    distinct outgoing transitions); like curiosity, it reads the structure
    the player can see, not the momentary affordability, which only gates
    what the simulated player may actually do.
    """
    prior_visits = visit_counts.get(current_state, 0)
    if via_action is None:
        action_repetition = 0.0
        action_novelty = 0.0
    else:
        prior_uses = action_counts.get(via_action, 0)
        action_repetition = float(prior_uses)
        action_novelty = 1.0 if prior_uses == 0 else 0.0
    # Unvisited neighbors: the state we are standing in counts as visited.
    curiosity = 0
    for neighbor in index.neighbors[current_state]:
        if neighbor != current_state and visit_counts.get(neighbor, 0) == 0:
            curiosity += 1
    return MetricVector(
        goalImportance=index.importance[current_state],
        stateRepetition=float(prior_visits),
        stateNovelty=1.0 if prior_visits == 0 else 0.0,
        actionRepetition=action_repetition,
        actionNovelty=action_novelty,
        resourceGains=gains,
        resourceLosses=losses,
        rewardConsistency=consistency,
        interactivity=float(index.out_degree[current_state]),
        curiosity=float(curiosity),
    )


def compute_step_metrics(
    design: GameDesign,
    current_state: str,
    inv: Inventory,
    gains: float,
    losses: float,
    via_action: str | None,
    visit_counts: Mapping[str, int],
    action_counts: Mapping[str, int],
    reward_history: list[float],
    index: DesignIndex | None = None,
) -> MetricVector:
    """Score one arrival at `current_state`.

    The count mappings and reward history must reflect the playthrough
    strictly before this arrival; `via_action` is the action that caused
    it (None for the initial placement, which scores zero on both action
    metrics). `reward_history` is the base (all-ones-weight) reward stream,
    which coincides with the recorded rewards under default weights. `inv`
    is the post-arrival inventory; it gates what the player may do next but
    not the scored choice counts.
    """
    index = index or DesignIndex(design)
    half = len(reward_history) // 2
    consistency = sum(reward_history[-half:]) if half else 0.0
    return arrival_metrics(index, current_state, gains, losses, via_action,
                           visit_counts, action_counts, consistency)


def mean_metrics(vectors: list[MetricVector]) -> MetricVector:
    if not vectors:
        return MetricVector()
    n = len(vectors)
    sums = [0.0] * len(METRIC_NAMES)
    for v in vectors:
        for i, name in enumerate(METRIC_NAMES):
            sums[i] += getattr(v, name)
    return MetricVector(**{name: sums[i] / n for i, name in enumerate(METRIC_NAMES)})

"""Simulated playtesting with a tabular Q-learning agent.

One playthrough is a single continuous online-learning run: the agent is
placed at the start state with an empty inventory, arrival effects fire on
every arrival (the initial placement included), and each step's weighted
metric reward both trains the agent and goes into the report. The run ends
when the step cap is crossed or no affordable action remains.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import InvalidDesignError, NoValidActionsError
from .mechanics import DesignIndex
from .metrics import (
    MetricVector,
    MetricWeights,
    arrival_metrics,
    mean_metrics,
    step_reward,
)
from .model import GameDesign, validate_design

QTable = dict[str, dict[str, float]]

TERMINATED_MAX_EPOCHS = "maxEpochs"
TERMINATED_NO_ACTIONS = "noValidActions"

_CONFIG_KEYS = {
    "maxEpochs": "max_epochs",
    "learningRate": "learning_rate",
    "discount": "discount",
    "explorationStart": "exploration_start",
    "explorationDecay": "exploration_decay",
    "explorationFloor": "exploration_floor",
    "minPlayableSteps": "min_playable_steps",
    "seed": "seed",
}


@dataclass(frozen=True)
class SimConfig:
    max_epochs: int = 1000
    learning_rate: float = 0.1
    discount: float = 0.9
    exploration_start: float = 0.3
    exploration_decay: float = 0.995
    exploration_floor: float = 0.01
    min_playable_steps: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be positive")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must be in [0, 1)")
        if not 0.0 <= self.exploration_start <= 1.0:
            raise ValueError("exploration_start must be in [0, 1]")
        if not 0.0 < self.exploration_decay <= 1.0:
            raise ValueError("exploration_decay must be in (0, 1]")
        if self.exploration_floor < 0.0:
            raise ValueError("exploration_floor must be non-negative")
        if self.min_playable_steps < 1:
            raise ValueError("min_playable_steps must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {camel: getattr(self, attr) for camel, attr in _CONFIG_KEYS.items()}

    @staticmethod
    def from_dict(values: Mapping, base: "SimConfig | None" = None) -> "SimConfig":
        base = base or SimConfig()
        unknown = set(values) - set(_CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown simulation config field(s): {sorted(unknown)}")
        kwargs = {attr: getattr(base, attr) for attr in _CONFIG_KEYS.values()}
        for camel, value in values.items():
            attr = _CONFIG_KEYS[camel]
            kwargs[attr] = int(value) if attr in ("max_epochs", "min_playable_steps", "seed") \
                else float(value)
        return SimConfig(**kwargs)


@dataclass(frozen=True)
class PlaythroughReport:
    state_path: tuple[str, ...]
    actions_taken: tuple[str, ...]
    state_counts: dict[str, int]
    action_counts: dict[str, int]
    resource_totals: dict[str, tuple[float, float]]
    per_step_metrics: tuple[MetricVector, ...]
    per_step_rewards: tuple[float, ...]
    total_reward: float
    mean_metrics: MetricVector
    termination_reason: str
    playable: bool

    def to_dict(self) -> dict:
        return {
            "statePath": list(self.state_path),
            "actionsTaken": list(self.actions_taken),
            "stateCounts": dict(self.state_counts),
            "actionCounts": dict(self.action_counts),
            "resourceTotals": {
                rid: {"gained": g, "lost": l} for rid, (g, l) in self.resource_totals.items()
            },
            "perStepMetrics": [m.as_dict() for m in self.per_step_metrics],
            "perStepRewards": list(self.per_step_rewards),
            "totalReward": self.total_reward,
            "meanMetrics": self.mean_metrics.as_dict(),
            "terminationReason": self.termination_reason,
            "playable": self.playable,
        }


def select_action(q_row: Mapping[str, float], valid: list[str], epsilon: float,
                  rng: np.random.Generator) -> str:
    """Epsilon-greedy choice over the valid actions, random tie-breaking.

    NaN Q-values (possible under extreme metric weights) rank below
    everything; if every value is NaN the choice is uniform.
    """
    if not valid:
        raise NoValidActionsError("no valid actions to select from")
    if rng.random() < epsilon:
        return valid[int(rng.integers(len(valid)))]
    values = [q_row.get(a, 0.0) for a in valid]
    finite = [v for v in values if v == v]
    if not finite:
        return valid[int(rng.integers(len(valid)))]
    best = max(finite)
    ties = [a for a, v in zip(valid, values) if v == best]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def q_update(q: QTable, state: str, action: str, reward: float, next_state: str,
             valid_next: list[str], alpha: float, gamma: float) -> QTable:
    """Standard tabular update; the max over an empty next-action set is 0."""
    row = q.setdefault(state, {})
    current = row.get(action, 0.0)
    if valid_next:
        next_row = q.get(next_state, {})
        best_next = max(next_row.get(a, 0.0) for a in valid_next)
    else:
        best_next = 0.0
    row[action] = current + alpha * (reward + gamma * best_next - current)
    return q


def _require_valid(design: GameDesign) -> None:
    report = validate_design(design)
    if not report.valid:
        codes = sorted({i.code for i in report.errors})
        raise InvalidDesignError(f"design is invalid: {', '.join(codes)}", report)


_ONES = MetricWeights()


class _PlaythroughState:
    """Mutable bookkeeping for one run: histories, counts, consistency window.

    The consistency window tracks the *base* (all-ones-weight) reward
    history. Under default weights that is exactly the recorded reward
    stream; under extreme weights it keeps the metric from feeding back
    into itself, which would otherwise grow rewards without bound.
    """

    def __init__(self, design: GameDesign, idx: DesignIndex, weights: MetricWeights):
        self.idx = idx
        self.weights = weights
        self.reweighted = weights != _ONES
        self.amounts = {r.id: 0.0 for r in design.resources}
        self.totals = {r.id: [0.0, 0.0] for r in design.resources}
        self.visit_counts: dict[str, int] = {}
        self.action_counts: dict[str, int] = {}
        self.state_path: list[str] = []
        self.actions_taken: list[str] = []
        self.per_step_metrics: list[MetricVector] = []
        self.rewards: list[float] = []
        self.base_rewards: list[float] = []
        self._window_sum = 0.0
        self._window_start = 0

    def arrive(self, state: str, via_action: str | None) -> tuple[float, list[str]]:
        """Fire arrival effects, score the step, update histories.

        Returns the step's weighted reward and the list of actions now
        available (used both for learning and for loop control).
        """
        gains, losses = self.idx.arrive(state, self.amounts, self.totals)
        valid = self.idx.available(state, self.amounts)
        metrics = arrival_metrics(self.idx, state, gains, losses, via_action,
                                  self.visit_counts, self.action_counts,
                                  self._window_sum)
        base = step_reward(metrics, _ONES)
        reward = step_reward(metrics, self.weights) if self.reweighted else base
        self.visit_counts[state] = self.visit_counts.get(state, 0) + 1
        if via_action is not None:
            self.action_counts[via_action] = self.action_counts.get(via_action, 0) + 1
            self.actions_taken.append(via_action)
        self.state_path.append(state)
        self.per_step_metrics.append(metrics)
        self.rewards.append(reward)
        self.base_rewards.append(base)
        # Slide the consistency window to cover the latest half of the history.
        self._window_sum += base
        target_start = len(self.base_rewards) - len(self.base_rewards) // 2
        while self._window_start < target_start:
            self._window_sum -= self.base_rewards[self._window_start]
            self._window_start += 1
        return reward, valid

    def bounds_violation(self) -> str | None:
        for rid, value in self.amounts.items():
            if not 0.0 <= value <= self.idx.capacity[rid]:
                return f"{rid}={value} outside [0, {self.idx.capacity[rid]}]"
        return None

    def build_report(self, design: GameDesign, reason: str, min_playable_steps: int
                     ) -> PlaythroughReport:
        return PlaythroughReport(
            state_path=tuple(self.state_path),
            actions_taken=tuple(self.actions_taken),
            state_counts={s.id: self.visit_counts.get(s.id, 0)
                          for s in sorted(design.states, key=lambda s: s.id)},
            action_counts={a.id: self.action_counts.get(a.id, 0)
                           for a in sorted(design.actions, key=lambda a: a.id)},
            resource_totals={rid: (g, l)
                             for rid, (g, l) in sorted(self.totals.items())},
            per_step_metrics=tuple(self.per_step_metrics),
            per_step_rewards=tuple(self.rewards),
            total_reward=sum(self.rewards),
            mean_metrics=mean_metrics(self.per_step_metrics),
            termination_reason=reason,
            playable=len(self.actions_taken) >= min_playable_steps - 1,
        )


def run_playthrough(design: GameDesign, weights: MetricWeights, cfg: SimConfig,
                    check_bounds: bool = False) -> tuple[PlaythroughReport, QTable]:
    """Simulate one learning playthrough; also hands back the learned Q-table.

    `check_bounds` turns on a per-arrival assertion that every inventory
    amount stays inside [0, capacity]; the safety suite runs with it on.
    """
    _require_valid(design)
    idx = DesignIndex(design)
    rng = np.random.default_rng(cfg.seed)
    run = _PlaythroughState(design, idx, weights)
    q: QTable = {}
    epsilon = cfg.exploration_start

    state = design.start_state
    _, valid = run.arrive(state, None)
    if check_bounds and (msg := run.bounds_violation()):
        raise RuntimeError(f"inventory bound violated at {state}: {msg}")

    steps = 0
    while True:
        if steps >= cfg.max_epochs:
            reason = TERMINATED_MAX_EPOCHS
            break
        if not valid:
            reason = TERMINATED_NO_ACTIONS
            break
        action = select_action(q.get(state, {}), valid, epsilon, rng)
        idx.pay(action, run.amounts, run.totals)
        next_state = idx.destination(state, action)
        reward, valid = run.arrive(next_state, action)
        if check_bounds and (msg := run.bounds_violation()):
            raise RuntimeError(f"inventory bound violated at {next_state}: {msg}")
        q_update(q, state, action, reward, next_state, valid,
                 cfg.learning_rate, cfg.discount)
        epsilon = max(cfg.exploration_floor, epsilon * cfg.exploration_decay)
        state = next_state
        steps += 1

    return run.build_report(design, reason, cfg.min_playable_steps), q


def simulate(design: GameDesign, weights: MetricWeights, cfg: SimConfig) -> PlaythroughReport:
    """Run one playthrough and return its report."""
    report, _ = run_playthrough(design, weights, cfg)
    return report


def playthrough_digest(report: PlaythroughReport, top_n: int = 3) -> dict:
    """Small JSON-friendly summary of a run, used on candidate cards."""
    visited = [(rid, n) for rid, n in report.state_counts.items() if n > 0]
    visited.sort(key=lambda kv: (-kv[1], kv[0]))
    return {
        "pathLength": len(report.state_path),
        "actionsTaken": len(report.actions_taken),
        "topStates": [{"state": s, "visits": n} for s, n in visited[:top_n]],
        "meanMetrics": report.mean_metrics.as_dict(),
        "totalReward": report.total_reward,
        "terminationReason": report.termination_reason,
        "playable": report.playable,
    }


def _path_digest(path: tuple[str, ...], limit: int = 12) -> str:
    if len(path) <= limit:
        return " -> ".join(path)
    head = " -> ".join(path[: limit - 2])
    return f"{head} -> ... -> {path[-1]}"


def render_summary(design: GameDesign, report: PlaythroughReport) -> str:
    """Designer-readable digest of a playthrough report."""
    ended = ("step cap reached" if report.termination_reason == TERMINATED_MAX_EPOCHS
             else "dead end (no valid actions left)")
    lines = [
        f"Playthrough of {design.name!r}: {len(report.state_path)} arrivals, "
        f"{len(report.actions_taken)} actions, ended by {ended}.",
    ]
    if not report.actions_taken:
        lines.append("Unplayable: no valid actions from start.")
    elif not report.playable:
        lines.append("Not playable under the configured minimum step count.")
    lines.append(f"Path: {_path_digest(report.state_path)}")
    visited = [(s, n) for s, n in report.state_counts.items() if n > 0]
    if visited:
        top_state = min(visited, key=lambda kv: (-kv[1], kv[0]))
        lines.append(f"Most visited state: {top_state[0]} ({top_state[1]} visits)")
    used = [(a, n) for a, n in report.action_counts.items() if n > 0]
    if used:
        top_action = min(used, key=lambda kv: (-kv[1], kv[0]))
        lines.append(f"Most used action: {top_action[0]} ({top_action[1]} uses)")
    if report.resource_totals:
        flows = ", ".join(f"{rid} +{g:.6g}/-{l:.6g}"
                          for rid, (g, l) in report.resource_totals.items())
        lines.append(f"Resource flow: {flows}")
    means = " ".join(f"{name}={value:.6g}"
                     for name, value in report.mean_metrics.as_dict().items())
    lines.append(f"Mean metrics: {means}")
    lines.append(f"Total reward: {report.total_reward:.6g}")
    return "\n".join(lines)


def evaluate(design: GameDesign, weights: MetricWeights, cfg: SimConfig
             ) -> tuple[PlaythroughReport, str]:
    """Simulate once and pair the report with its human summary."""
    report = simulate(design, weights, cfg)
    return report, render_summary(design, report)


def greedy_rollout(design: GameDesign, q: QTable, weights: MetricWeights,
                   horizon: int) -> tuple[float, list[str], list[str]]:
    """Replay the design for `horizon` steps following argmax-Q, no learning.

    Fresh histories and inventory; ties break toward the lexicographically
    first action so the rollout is deterministic. Returns the total reward
    (initial placement included), the state path, and the actions taken.
    """
    _require_valid(design)
    idx = DesignIndex(design)
    run = _PlaythroughState(design, idx, weights)
    state = design.start_state
    _, valid = run.arrive(state, None)
    for _ in range(horizon):
        if not valid:
            break
        row = q.get(state, {})
        best = max(row.get(a, 0.0) for a in valid)
        action = next(a for a in valid if row.get(a, 0.0) == best)
        idx.pay(action, run.amounts, run.totals)
        state = idx.destination(state, action)
        _, valid = run.arrive(state, action)
    return sum(run.rewards), run.state_path, run.actions_taken

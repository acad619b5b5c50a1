"""Random design sampling under per-category caps.

Samples are valid by construction: counts are drawn first, then references
are drawn from components that already exist, so no dangling ids or
duplicate (state, action) transitions can appear. Two calibrated choices
shape the population: a quarter of actions are free (the rest cost one or
more resources), and transitions always move the player to a different
state, so single-state designs come out transition-free. Both keep the
playable share and the short-run/long-run mix in sensible balance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import (
    ActionDef,
    ConverterDef,
    CostDef,
    DrainDef,
    GameDesign,
    ResourceDef,
    StateDef,
    TapDef,
    TransitionDef,
)

_CAPS_KEYS = {
    "maxStates": "max_states",
    "maxActions": "max_actions",
    "maxResources": "max_resources",
    "maxTransitions": "max_transitions",
    "maxTaps": "max_taps",
    "maxDrains": "max_drains",
    "maxConverters": "max_converters",
    "amountMax": "amount_max",
    "capacityMax": "capacity_max",
    "importanceMax": "importance_max",
}


@dataclass(frozen=True)
class SamplerCaps:
    max_states: int = 10
    max_actions: int = 8
    max_resources: int = 5
    max_transitions: int = 20
    max_taps: int = 5
    max_drains: int = 5
    max_converters: int = 5
    amount_max: float = 20.0
    capacity_min: float = 1.0
    capacity_max: float = 100.0
    importance_max: int = 5

    def __post_init__(self) -> None:
        for name in ("max_states", "max_actions", "max_resources", "max_transitions",
                     "max_taps", "max_drains", "max_converters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.amount_max < 0 or self.capacity_max < self.capacity_min or self.importance_max < 0:
            raise ValueError("empty sampling range")

    def to_dict(self) -> dict:
        return {camel: getattr(self, attr) for camel, attr in _CAPS_KEYS.items()}

    @staticmethod
    def from_dict(values: Mapping, base: "SamplerCaps | None" = None) -> "SamplerCaps":
        base = base or SamplerCaps()
        unknown = set(values) - set(_CAPS_KEYS)
        if unknown:
            raise ValueError(f"unknown sampler cap field(s): {sorted(unknown)}")
        kwargs = {attr: getattr(base, attr) for attr in _CAPS_KEYS.values()}
        kwargs["capacity_min"] = base.capacity_min
        for camel, value in values.items():
            attr = _CAPS_KEYS[camel]
            kwargs[attr] = float(value) if attr in ("amount_max", "capacity_max") else int(value)
        return SamplerCaps(**kwargs)


def _uniform_amount(rng: np.random.Generator, caps: SamplerCaps) -> float:
    return float(rng.uniform(0.0, caps.amount_max))


# Probability that a sampled action has no costs at all.
FREE_ACTION_P = 0.25


def sample_random_design(caps: SamplerCaps, rng: np.random.Generator,
                         name: str = "sampled") -> GameDesign:
    """Draw one random design: counts uniform in [1, cap] for core components
    and [0, cap] for attachments, references uniform over what exists."""
    n_states = int(rng.integers(1, caps.max_states + 1))
    n_actions = int(rng.integers(1, caps.max_actions + 1))
    n_resources = int(rng.integers(1, caps.max_resources + 1))

    state_ids = [f"s{i}" for i in range(n_states)]
    action_ids = [f"a{i}" for i in range(n_actions)]
    resource_ids = [f"r{i}" for i in range(n_resources)]

    resources = tuple(
        ResourceDef(rid, float(rng.uniform(caps.capacity_min, caps.capacity_max)))
        for rid in resource_ids
    )
    states = tuple(
        StateDef(sid, float(rng.integers(0, caps.importance_max + 1))) for sid in state_ids
    )

    actions = []
    for aid in action_ids:
        if rng.random() < FREE_ACTION_P:
            n_costs = 0
        else:
            n_costs = int(rng.integers(1, n_resources + 1))
        chosen = rng.choice(n_resources, size=n_costs, replace=False)
        costs = tuple(CostDef(resource_ids[int(i)], _uniform_amount(rng, caps))
                      for i in sorted(chosen))
        actions.append(ActionDef(aid, costs))

    transitions = []
    if n_states > 1:
        n_slots = n_states * n_actions
        target = int(rng.integers(1, caps.max_transitions + 1))
        n_transitions = min(target, n_slots)
        slots = rng.choice(n_slots, size=n_transitions, replace=False)
        for slot in sorted(int(s) for s in slots):
            from_idx = slot // n_actions
            action = action_ids[slot % n_actions]
            to_idx = int(rng.integers(n_states - 1))
            if to_idx >= from_idx:
                to_idx += 1
            transitions.append(TransitionDef(state_ids[from_idx], action, state_ids[to_idx]))

    taps = tuple(
        TapDef(state_ids[int(rng.integers(n_states))],
               resource_ids[int(rng.integers(n_resources))],
               _uniform_amount(rng, caps))
        for _ in range(int(rng.integers(0, caps.max_taps + 1)))
    )
    drains = tuple(
        DrainDef(state_ids[int(rng.integers(n_states))],
                 resource_ids[int(rng.integers(n_resources))],
                 _uniform_amount(rng, caps))
        for _ in range(int(rng.integers(0, caps.max_drains + 1)))
    )
    converters = []
    if n_resources >= 2:
        for _ in range(int(rng.integers(0, caps.max_converters + 1))):
            from_res, to_res = rng.choice(n_resources, size=2, replace=False)
            converters.append(ConverterDef(
                state_ids[int(rng.integers(n_states))],
                resource_ids[int(from_res)], _uniform_amount(rng, caps),
                resource_ids[int(to_res)], _uniform_amount(rng, caps)))

    return GameDesign(
        name=name,
        resources=resources,
        actions=tuple(actions),
        states=states,
        start_state=state_ids[int(rng.integers(n_states))],
        transitions=tuple(transitions),
        taps=taps,
        drains=drains,
        converters=tuple(converters),
    )

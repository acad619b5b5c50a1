from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from gamesmith.errors import UnaffordableError, UnknownStateError
from gamesmith.mechanics import (
    apply_action_cost,
    apply_arrival_effects,
    available_actions,
)
from gamesmith.model import Inventory, TapDef, validate_design
from gamesmith.sampler import SamplerCaps, sample_random_design


def inv(design, **amounts):
    base = {r.id: 0.0 for r in design.resources}
    base.update({k: float(v) for k, v in amounts.items()})
    return Inventory(base)


def test_no_outbound_transitions_gives_empty_list(shop_design):
    # "home" only has walk; strip its transitions to create a dead end.
    stripped = dataclasses.replace(
        shop_design,
        transitions=tuple(t for t in shop_design.transitions if t.from_state != "home"),
    )
    assert available_actions(stripped, "home", inv(stripped)) == []


def test_unaffordable_action_excluded(shop_design):
    # buy costs 5 gold; with 3 gold it must not be offered.
    assert "buy" not in available_actions(shop_design, "shop", inv(shop_design, gold=3))
    assert "buy" in available_actions(shop_design, "shop", inv(shop_design, gold=5))


def test_zero_cost_action_always_available(shop_design):
    assert available_actions(shop_design, "shop", inv(shop_design)) == ["walk"]


def test_available_actions_sorted(shop_design):
    actions = available_actions(shop_design, "field", inv(shop_design))
    assert actions == sorted(actions) == ["walk", "work"]


def test_unknown_state_raises(shop_design):
    with pytest.raises(UnknownStateError):
        available_actions(shop_design, "nowhere", inv(shop_design))
    with pytest.raises(UnknownStateError):
        apply_arrival_effects(shop_design, "nowhere", inv(shop_design))


def test_apply_cost_subtracts_exactly(shop_design):
    out = apply_action_cost(shop_design, "buy", inv(shop_design, gold=8))
    assert out.amounts["gold"] == 3.0
    assert out.amounts["planks"] == 0.0


def test_apply_cost_boundary(shop_design):
    out = apply_action_cost(shop_design, "buy", inv(shop_design, gold=5))
    assert out.amounts["gold"] == 0.0


def test_apply_cost_no_costs_identity(shop_design):
    before = inv(shop_design, gold=7)
    out = apply_action_cost(shop_design, "walk", before)
    assert out.amounts == before.amounts


def test_apply_cost_unaffordable_raises(shop_design):
    with pytest.raises(UnaffordableError):
        apply_action_cost(shop_design, "buy", inv(shop_design, gold=4.99))


def test_tap_clamps_at_capacity(shop_design):
    # field taps +2 gold; capacity 100, start at 99 -> only 1 actually added.
    out, gains, losses = apply_arrival_effects(shop_design, "field", inv(shop_design, gold=99))
    assert out.amounts["gold"] == 100.0
    assert gains == 1.0
    assert losses == 0.0


def test_arrival_noop_state(sprint_design):
    # running has a drain but walking only a tap; test a state with nothing.
    design = dataclasses.replace(sprint_design, taps=(), drains=())
    before = inv(design, stamina=4)
    out, gains, losses = apply_arrival_effects(design, "walking", before)
    assert out.amounts == before.amounts
    assert gains == 0.0 and losses == 0.0


def test_converter_all_or_nothing(shop_design):
    # shop converts 3 gold -> 2 planks; with 2 gold nothing happens.
    out, gains, losses = apply_arrival_effects(shop_design, "shop", inv(shop_design, gold=2))
    assert out.amounts["gold"] == 2.0
    assert out.amounts["planks"] == 0.0
    assert gains == 0.0 and losses == 0.0


def test_converter_fires_and_counts_flows(shop_design):
    out, gains, losses = apply_arrival_effects(shop_design, "shop", inv(shop_design, gold=4))
    assert out.amounts["gold"] == 1.0
    assert out.amounts["planks"] == 2.0
    assert gains == 2.0
    assert losses == 3.0


def test_converter_output_clamped_but_input_spent(shop_design):
    full = inv(shop_design, gold=10, planks=50)
    out, gains, losses = apply_arrival_effects(shop_design, "shop", full)
    assert out.amounts["planks"] == 50.0  # no headroom
    assert out.amounts["gold"] == 7.0  # input still consumed
    assert gains == 0.0
    assert losses == 3.0


def test_drain_clamps_at_zero(shop_design):
    # home drains 1 gold; with 0.25 gold only 0.25 is lost.
    out, gains, losses = apply_arrival_effects(shop_design, "home", inv(shop_design, gold=0.25))
    assert out.amounts["gold"] == 0.0
    assert losses == 0.25


def test_arrival_order_taps_then_drains_then_converters(shop_design):
    # Put a tap, drain, and converter all on one state and check the order:
    # tap grants 2 gold, drain takes 1, converter then has 3 gold available.
    design = dataclasses.replace(
        shop_design,
        taps=(TapDef("shop", "gold", 2.0),),
        drains=(dataclasses.replace(shop_design.drains[0], state="shop"),),
    )
    out, gains, losses = apply_arrival_effects(design, "shop", inv(design, gold=2))
    # 2 + 2 = 4 gold after tap, 3 after drain, converter fires: 0 gold, 2 planks
    assert out.amounts["gold"] == 0.0
    assert out.amounts["planks"] == 2.0
    assert gains == 4.0  # tap 2 + converter output 2
    assert losses == 4.0  # drain 1 + converter input 3


def test_inventory_bounds_under_random_op_sequences():
    # Inventory invariant: any sequence of affordable costs and arrival
    # effects keeps every amount within [0, capacity].
    rng = np.random.default_rng(17)
    caps = SamplerCaps()
    for _ in range(300):
        design = sample_random_design(caps, rng)
        assert validate_design(design).valid
        current = Inventory({r.id: 0.0 for r in design.resources})
        capacity = {r.id: r.capacity for r in design.resources}
        states = [s.id for s in design.states]
        for _ in range(30):
            state = states[int(rng.integers(len(states)))]
            current, _, _ = apply_arrival_effects(design, state, current)
            affordable = available_actions(design, state, current)
            if affordable:
                action = affordable[int(rng.integers(len(affordable)))]
                current = apply_action_cost(design, action, current)
            for rid, amount in current.amounts.items():
                assert 0.0 <= amount <= capacity[rid]

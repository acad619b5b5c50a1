from __future__ import annotations

import dataclasses

import numpy as np

from gamesmith.model import (
    ActionDef,
    CostDef,
    GameDesign,
    ResourceDef,
    StateDef,
    TapDef,
    TransitionDef,
    topology_digest,
    validate_design,
)
from gamesmith.sampler import SamplerCaps, sample_random_design


def codes(report, severity=None):
    return {i.code for i in report.issues
            if severity is None or i.severity == severity}


def test_valid_design_passes(shop_design):
    report = validate_design(shop_design)
    assert report.valid
    assert report.errors == ()


def test_missing_start_state():
    design = GameDesign(name="x", states=(StateDef("s1", 0.0),), start_state="foo")
    report = validate_design(design)
    assert not report.valid
    assert "MISSING_START" in codes(report, "error")


def test_duplicate_transition_is_error():
    design = GameDesign(
        name="x",
        actions=(ActionDef("jump"),),
        states=(StateDef("s1", 0.0), StateDef("s2", 0.0), StateDef("s3", 0.0)),
        start_state="s1",
        transitions=(TransitionDef("s1", "jump", "s2"), TransitionDef("s1", "jump", "s3")),
    )
    report = validate_design(design)
    assert not report.valid
    assert "DUPLICATE_TRANSITION" in codes(report, "error")


def test_unreachable_state_is_warning_only():
    # s2 has no inbound transition: reachability is a breadth-first search
    # from the start state, so s2 must be flagged but the design stays valid.
    design = GameDesign(
        name="x",
        states=(StateDef("s1", 0.0), StateDef("s2", 0.0)),
        start_state="s1",
    )
    report = validate_design(design)
    assert report.valid
    assert "UNREACHABLE_STATE" in codes(report, "warning")
    refs = {i.component_ref for i in report.warnings}
    assert "state:s2" in refs


def test_duplicate_ids_and_negative_values():
    design = GameDesign(
        name="x",
        resources=(ResourceDef("gold", -1.0), ResourceDef("gold", 5.0)),
        states=(StateDef("s1", -2.0),),
        start_state="s1",
    )
    report = validate_design(design)
    assert {"DUPLICATE_ID", "NEGATIVE_VALUE"} <= codes(report, "error")


def test_dangling_references():
    design = GameDesign(
        name="x",
        actions=(ActionDef("buy", (CostDef("nope", 1.0),)),),
        states=(StateDef("s1", 0.0),),
        start_state="s1",
        transitions=(TransitionDef("s1", "ghost", "missing"),),
        taps=(TapDef("elsewhere", "nope", 1.0),),
    )
    report = validate_design(design)
    errs = codes(report, "error")
    assert "UNKNOWN_RESOURCE" in errs
    assert "UNKNOWN_ACTION" in errs
    assert "UNKNOWN_STATE" in errs


def test_self_conversion_rejected(shop_design):
    bad = dataclasses.replace(
        shop_design,
        converters=(dataclasses.replace(shop_design.converters[0], to_resource="gold"),),
    )
    report = validate_design(bad)
    assert "SELF_CONVERSION" in codes(report, "error")


def test_duplicate_cost_rejected(shop_design):
    buy = shop_design.actions[1]
    bad_buy = dataclasses.replace(buy, costs=buy.costs + (CostDef("gold", 2.0),))
    bad = dataclasses.replace(shop_design, actions=(shop_design.actions[0], bad_buy))
    report = validate_design(bad)
    assert "DUPLICATE_COST" in codes(report, "error")


def test_unused_action_warning():
    design = GameDesign(
        name="x",
        actions=(ActionDef("idle"),),
        states=(StateDef("s1", 0.0),),
        start_state="s1",
    )
    report = validate_design(design)
    assert report.valid
    assert "UNUSED_ACTION" in codes(report, "warning")


def test_unpayable_cost_is_legal_but_flagged():
    design = GameDesign(
        name="x",
        resources=(ResourceDef("gem", 10.0),),
        actions=(ActionDef("spend", (CostDef("gem", 1.0),)),),
        states=(StateDef("s1", 0.0), StateDef("s2", 0.0)),
        start_state="s1",
        transitions=(TransitionDef("s1", "spend", "s2"),),
    )
    report = validate_design(design)
    assert report.valid
    assert "UNSATISFIABLE_COST" in codes(report, "warning")


def test_non_finite_amounts_are_errors(shop_design):
    bad = dataclasses.replace(
        shop_design, resources=(ResourceDef("gold", float("nan")), shop_design.resources[1])
    )
    assert "NON_FINITE" in codes(validate_design(bad), "error")


def test_topology_digest_ignores_numbers(shop_design):
    altered = dataclasses.replace(
        shop_design,
        resources=tuple(dataclasses.replace(r, capacity=r.capacity * 2)
                        for r in shop_design.resources),
        taps=(TapDef("field", "gold", 9.5),),
    )
    assert topology_digest(altered) == topology_digest(shop_design)
    rewired = dataclasses.replace(
        shop_design,
        transitions=shop_design.transitions[:-1]
        + (TransitionDef("home", "walk", "shop"),),
    )
    assert topology_digest(rewired) != topology_digest(shop_design)


def test_sampled_designs_always_validate():
    rng = np.random.default_rng(7)
    caps = SamplerCaps()
    for _ in range(1000):
        design = sample_random_design(caps, rng)
        assert validate_design(design).valid


def test_sampler_state_counts_uniform():
    # Component counts are drawn uniformly in [1, cap]; a chi-square test
    # over 1000 samples should not reject uniformity on 1..10.
    from scipy.stats import chisquare

    rng = np.random.default_rng(99)
    caps = SamplerCaps()
    counts = np.zeros(caps.max_states, dtype=int)
    for _ in range(1000):
        design = sample_random_design(caps, rng)
        counts[len(design.states) - 1] += 1
    _, p = chisquare(counts)
    assert p > 0.01


def test_sampler_degenerate_caps():
    rng = np.random.default_rng(3)
    caps = SamplerCaps(max_states=1, max_actions=1, max_resources=1,
                       max_transitions=1, max_taps=1, max_drains=1, max_converters=1)
    for _ in range(50):
        design = sample_random_design(caps, rng)
        assert len(design.states) == 1
        assert len(design.actions) <= 1
        assert len(design.transitions) <= 1
        assert validate_design(design).valid

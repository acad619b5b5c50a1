from __future__ import annotations

import numpy as np
import pytest

from gamesmith.model import (
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


@pytest.fixture
def shop_design() -> GameDesign:
    """Small economy: a field that grants gold, a shop that sells planks."""
    return GameDesign(
        name="shop",
        resources=(ResourceDef("gold", 100.0), ResourceDef("planks", 50.0)),
        actions=(
            ActionDef("walk", ()),
            ActionDef("buy", (CostDef("gold", 5.0),)),
            ActionDef("work", ()),
        ),
        states=(StateDef("field", 1.0), StateDef("shop", 3.0), StateDef("home", 5.0)),
        start_state="field",
        transitions=(
            TransitionDef("field", "walk", "shop"),
            TransitionDef("field", "work", "field"),
            TransitionDef("shop", "buy", "home"),
            TransitionDef("shop", "walk", "field"),
            TransitionDef("home", "walk", "field"),
        ),
        taps=(TapDef("field", "gold", 2.0),),
        drains=(DrainDef("home", "gold", 1.0),),
        converters=(ConverterDef("shop", "gold", 3.0, "planks", 2.0),),
    )


@pytest.fixture
def sprint_design() -> GameDesign:
    """Walking/running pair where running drains stamina."""
    return GameDesign(
        name="sprinting",
        resources=(ResourceDef("stamina", 10.0),),
        actions=(ActionDef("sprint", (CostDef("stamina", 2.0),)), ActionDef("rest", ())),
        states=(StateDef("walking", 0.0), StateDef("running", 2.0)),
        start_state="walking",
        transitions=(
            TransitionDef("walking", "sprint", "running"),
            TransitionDef("running", "rest", "walking"),
        ),
        taps=(TapDef("walking", "stamina", 3.0),),
        drains=(DrainDef("running", "stamina", 1.0),),
        converters=(),
    )


@pytest.fixture
def single_state_design() -> GameDesign:
    return GameDesign(
        name="lonely",
        states=(StateDef("only", 4.0),),
        start_state="only",
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)

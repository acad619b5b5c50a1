"""Gamesmith: model, playtest, balance, and generate game systems."""

from .errors import (
    DesignValidationError,
    GamesmithError,
    InvalidDesignError,
    NoLegalEditError,
    NoValidActionsError,
    ParseError,
    SchemaError,
    SelectorAborted,
    UnaffordableError,
    UnknownMetricError,
    UnknownStateError,
)
from .mechanics import apply_action_cost, apply_arrival_effects, available_actions
from .metrics import (
    METRIC_NAMES,
    PENALTY_METRICS,
    MetricVector,
    MetricWeights,
    compute_step_metrics,
    step_reward,
)
from .model import (
    ActionDef,
    ConverterDef,
    CostDef,
    DrainDef,
    GameDesign,
    Inventory,
    ResourceDef,
    StateDef,
    TapDef,
    TransitionDef,
    ValidationIssue,
    ValidationReport,
    validate_design,
)
from .sampler import SamplerCaps, sample_random_design
from .serialize import design_from_dict, design_to_dict, load_design, save_design
from .simulate import (
    PlaythroughReport,
    SimConfig,
    evaluate,
    greedy_rollout,
    q_update,
    run_playthrough,
    select_action,
    simulate,
)

__version__ = "0.1.0"

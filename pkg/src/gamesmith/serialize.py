"""Design file format: a strict JSON interchange schema.

The same document shape is used by the CLI, the HTTP service, and the web
UI. Serialization is canonical (components sorted by id) so that equal
designs always produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import DesignValidationError, ParseError, SchemaError
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
    validate_design,
)

_TOP_LEVEL_FIELDS = (
    "name", "resources", "actions", "states", "startState",
    "transitions", "taps", "drains", "converters",
)


def _require_object(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def _take(obj: dict, where: str, fields: tuple[str, ...]) -> dict:
    unknown = set(obj) - set(fields)
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = [f for f in fields if f not in obj]
    if missing:
        raise SchemaError(f"{where}: missing field(s) {missing}")
    return obj


def _string(obj: dict, key: str, where: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"{where}.{key}: expected a string, got {type(value).__name__}")
    return value


def _number(obj: dict, key: str, where: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}.{key}: expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{where}.{key}: must be finite")
    if value < 0:
        raise SchemaError(f"{where}.{key}: must be non-negative")
    return value


def _array(obj: dict, key: str, where: str) -> list:
    value = obj[key]
    if not isinstance(value, list):
        raise SchemaError(f"{where}.{key}: expected an array, got {type(value).__name__}")
    return value


def design_from_dict(doc: dict) -> GameDesign:
    """Decode (and schema-check) a design document. Does not validate references."""
    _require_object(doc, "design")
    _take(doc, "design", _TOP_LEVEL_FIELDS)

    resources = []
    for i, item in enumerate(_array(doc, "resources", "design")):
        where = f"resources[{i}]"
        item = _take(_require_object(item, where), where, ("id", "capacity"))
        resources.append(ResourceDef(_string(item, "id", where), _number(item, "capacity", where)))

    actions = []
    for i, item in enumerate(_array(doc, "actions", "design")):
        where = f"actions[{i}]"
        item = _take(_require_object(item, where), where, ("id", "costs"))
        costs = []
        for j, cost in enumerate(_array(item, "costs", where)):
            cwhere = f"{where}.costs[{j}]"
            cost = _take(_require_object(cost, cwhere), cwhere, ("resource", "amount"))
            costs.append(CostDef(_string(cost, "resource", cwhere), _number(cost, "amount", cwhere)))
        actions.append(ActionDef(_string(item, "id", where), tuple(costs)))

    states = []
    for i, item in enumerate(_array(doc, "states", "design")):
        where = f"states[{i}]"
        item = _take(_require_object(item, where), where, ("id", "importance"))
        states.append(StateDef(_string(item, "id", where), _number(item, "importance", where)))

    transitions = []
    for i, item in enumerate(_array(doc, "transitions", "design")):
        where = f"transitions[{i}]"
        item = _take(_require_object(item, where), where, ("from", "action", "to"))
        transitions.append(TransitionDef(_string(item, "from", where),
                                         _string(item, "action", where),
                                         _string(item, "to", where)))

    taps = []
    drains = []
    for key, defs, out in (("taps", TapDef, taps), ("drains", DrainDef, drains)):
        for i, item in enumerate(_array(doc, key, "design")):
            where = f"{key}[{i}]"
            item = _take(_require_object(item, where), where, ("state", "resource", "amount"))
            out.append(defs(_string(item, "state", where), _string(item, "resource", where),
                            _number(item, "amount", where)))

    converters = []
    for i, item in enumerate(_array(doc, "converters", "design")):
        where = f"converters[{i}]"
        item = _take(_require_object(item, where), where,
                     ("state", "fromResource", "fromAmount", "toResource", "toAmount"))
        converters.append(ConverterDef(
            _string(item, "state", where),
            _string(item, "fromResource", where), _number(item, "fromAmount", where),
            _string(item, "toResource", where), _number(item, "toAmount", where)))

    return GameDesign(
        name=_string(doc, "name", "design"),
        resources=tuple(resources),
        actions=tuple(actions),
        states=tuple(states),
        start_state=_string(doc, "startState", "design"),
        transitions=tuple(transitions),
        taps=tuple(taps),
        drains=tuple(drains),
        converters=tuple(converters),
    )


def design_to_dict(design: GameDesign) -> dict:
    """Encode a design as a canonical document (components sorted by id)."""
    d = design.canonical()
    return {
        "name": d.name,
        "resources": [{"id": r.id, "capacity": r.capacity} for r in d.resources],
        "actions": [
            {"id": a.id, "costs": [{"resource": c.resource, "amount": c.amount} for c in a.costs]}
            for a in d.actions
        ],
        "states": [{"id": s.id, "importance": s.importance} for s in d.states],
        "startState": d.start_state,
        "transitions": [
            {"from": t.from_state, "action": t.action, "to": t.to_state} for t in d.transitions
        ],
        "taps": [{"state": t.state, "resource": t.resource, "amount": t.amount} for t in d.taps],
        "drains": [{"state": t.state, "resource": t.resource, "amount": t.amount} for t in d.drains],
        "converters": [
            {"state": c.state, "fromResource": c.from_resource, "fromAmount": c.from_amount,
             "toResource": c.to_resource, "toAmount": c.to_amount}
            for c in d.converters
        ],
    }


def load_design(text: str | bytes) -> GameDesign:
    """Parse, schema-check, and validate a design document.

    Raises ParseError for malformed JSON, SchemaError for structural
    problems (missing/unknown/mistyped fields, negative or non-finite
    numbers), and DesignValidationError when the decoded design breaks a
    model invariant (the report rides on the exception).
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    design = design_from_dict(doc)
    report = validate_design(design)
    if not report.valid:
        codes = sorted({i.code for i in report.errors})
        raise DesignValidationError(f"design is invalid: {', '.join(codes)}", report)
    return design


def save_design(design: GameDesign) -> str:
    """Serialize a valid design canonically; identical designs serialize identically."""
    report = validate_design(design)
    if not report.valid:
        codes = sorted({i.code for i in report.errors})
        raise DesignValidationError(f"refusing to save invalid design: {', '.join(codes)}", report)
    return json.dumps(design_to_dict(design), indent=2) + "\n"

"""Component model for game systems.

A game is described by seven component categories: resources the player
carries in a capacity-bounded inventory, actions that may consume resources,
abstract states with designer-assigned importance, deterministic
(state, action) -> state transitions, and three kinds of state attachments
that move resources on arrival (taps grant, drains remove, converters
exchange one resource for another).

All types are immutable values; every operation in this package returns new
objects rather than mutating inputs.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

CATEGORY_NAMES = (
    "resources",
    "actions",
    "states",
    "transitions",
    "taps",
    "drains",
    "converters",
)


@dataclass(frozen=True)
class ResourceDef:
    id: str
    capacity: float


@dataclass(frozen=True)
class CostDef:
    resource: str
    amount: float


@dataclass(frozen=True)
class ActionDef:
    id: str
    costs: tuple[CostDef, ...] = ()


@dataclass(frozen=True)
class StateDef:
    id: str
    importance: float = 0.0


@dataclass(frozen=True)
class TransitionDef:
    from_state: str
    action: str
    to_state: str


@dataclass(frozen=True)
class TapDef:
    state: str
    resource: str
    amount: float


@dataclass(frozen=True)
class DrainDef:
    state: str
    resource: str
    amount: float


@dataclass(frozen=True)
class ConverterDef:
    state: str
    from_resource: str
    from_amount: float
    to_resource: str
    to_amount: float


@dataclass(frozen=True)
class GameDesign:
    name: str
    resources: tuple[ResourceDef, ...] = ()
    actions: tuple[ActionDef, ...] = ()
    states: tuple[StateDef, ...] = ()
    start_state: str = ""
    transitions: tuple[TransitionDef, ...] = ()
    taps: tuple[TapDef, ...] = ()
    drains: tuple[DrainDef, ...] = ()
    converters: tuple[ConverterDef, ...] = ()

    def canonical(self) -> "GameDesign":
        """Return an equivalent design with every component list sorted.

        Two designs that differ only in list order canonicalize to equal
        values, which is what makes serialization deterministic.
        """
        return replace(
            self,
            resources=tuple(sorted(self.resources, key=lambda r: r.id)),
            actions=tuple(
                sorted(
                    (replace(a, costs=tuple(sorted(a.costs, key=lambda c: c.resource)))
                     for a in self.actions),
                    key=lambda a: a.id,
                )
            ),
            states=tuple(sorted(self.states, key=lambda s: s.id)),
            transitions=tuple(
                sorted(self.transitions, key=lambda t: (t.from_state, t.action, t.to_state))
            ),
            taps=tuple(sorted(self.taps, key=lambda t: (t.state, t.resource, t.amount))),
            drains=tuple(sorted(self.drains, key=lambda d: (d.state, d.resource, d.amount))),
            converters=tuple(
                sorted(
                    self.converters,
                    key=lambda c: (c.state, c.from_resource, c.to_resource,
                                   c.from_amount, c.to_amount),
                )
            ),
        )


def topology_digest(design: GameDesign) -> tuple:
    """Ids and references only, no numeric values.

    Two designs with equal digests differ at most in their tunable numbers,
    which is exactly what the balancer is allowed to change.
    """
    d = design.canonical()
    return (
        tuple(r.id for r in d.resources),
        tuple((a.id, tuple(c.resource for c in a.costs)) for a in d.actions),
        tuple(s.id for s in d.states),
        d.start_state,
        tuple((t.from_state, t.action, t.to_state) for t in d.transitions),
        tuple((t.state, t.resource) for t in d.taps),
        tuple((t.state, t.resource) for t in d.drains),
        tuple((c.state, c.from_resource, c.to_resource) for c in d.converters),
    )


@dataclass(frozen=True)
class Inventory:
    """Per-resource amounts, always within [0, capacity] for its design."""

    amounts: Mapping[str, float]

    @staticmethod
    def empty(design: GameDesign) -> "Inventory":
        return Inventory({r.id: 0.0 for r in design.resources})


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    code: str
    message: str
    component_ref: str = ""


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def valid(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")


class _IssueCollector:
    def __init__(self) -> None:
        self.issues: list[ValidationIssue] = []

    def error(self, code: str, message: str, ref: str = "") -> None:
        self.issues.append(ValidationIssue("error", code, message, ref))

    def warning(self, code: str, message: str, ref: str = "") -> None:
        self.issues.append(ValidationIssue("warning", code, message, ref))


def _check_ids(out: _IssueCollector, kind: str, ids: Iterable[str]) -> None:
    counts = Counter(ids)
    for cid, n in sorted(counts.items()):
        if not cid:
            out.error("EMPTY_ID", f"{kind} with empty id", f"{kind}:")
        if n > 1:
            out.error("DUPLICATE_ID", f"{kind} id {cid!r} defined {n} times", f"{kind}:{cid}")


def _check_amount(out: _IssueCollector, value: float, what: str, ref: str) -> None:
    if not math.isfinite(value):
        out.error("NON_FINITE", f"{what} is not finite", ref)
    elif value < 0:
        out.error("NEGATIVE_VALUE", f"{what} is negative ({value})", ref)


def validate_design(design: GameDesign) -> ValidationReport:
    """Check every structural invariant of a candidate design.

    Malformed designs never raise; every violation is reported as an
    error-severity issue. Unreachable states, actions without transitions,
    and costs on resources the design can never produce are reported as
    warnings (the design stays valid).
    """
    out = _IssueCollector()

    resource_ids = {r.id for r in design.resources}
    action_ids = {a.id for a in design.actions}
    state_ids = {s.id for s in design.states}

    _check_ids(out, "resource", (r.id for r in design.resources))
    _check_ids(out, "action", (a.id for a in design.actions))
    _check_ids(out, "state", (s.id for s in design.states))

    for r in design.resources:
        _check_amount(out, r.capacity, f"capacity of resource {r.id!r}", f"resource:{r.id}")

    for s in design.states:
        _check_amount(out, s.importance, f"importance of state {s.id!r}", f"state:{s.id}")

    for a in design.actions:
        seen: set[str] = set()
        for c in a.costs:
            ref = f"action:{a.id}/cost:{c.resource}"
            if c.resource not in resource_ids:
                out.error("UNKNOWN_RESOURCE",
                          f"action {a.id!r} costs unknown resource {c.resource!r}", ref)
            if c.resource in seen:
                out.error("DUPLICATE_COST",
                          f"action {a.id!r} has multiple costs for resource {c.resource!r}", ref)
            seen.add(c.resource)
            _check_amount(out, c.amount, f"cost of action {a.id!r}", ref)

    if design.start_state not in state_ids:
        out.error("MISSING_START",
                  f"start state {design.start_state!r} is not a defined state",
                  f"state:{design.start_state}")

    seen_edges: set[tuple[str, str]] = set()
    for t in design.transitions:
        ref = f"transition:{t.from_state}--{t.action}-->{t.to_state}"
        if t.from_state not in state_ids:
            out.error("UNKNOWN_STATE", f"transition from unknown state {t.from_state!r}", ref)
        if t.to_state not in state_ids:
            out.error("UNKNOWN_STATE", f"transition to unknown state {t.to_state!r}", ref)
        if t.action not in action_ids:
            out.error("UNKNOWN_ACTION", f"transition uses unknown action {t.action!r}", ref)
        edge = (t.from_state, t.action)
        if edge in seen_edges:
            out.error("DUPLICATE_TRANSITION",
                      f"more than one transition for ({t.from_state!r}, {t.action!r})", ref)
        seen_edges.add(edge)

    for kind, items in (("tap", design.taps), ("drain", design.drains)):
        for x in items:
            ref = f"{kind}:{x.state}/{x.resource}"
            if x.state not in state_ids:
                out.error("UNKNOWN_STATE", f"{kind} attached to unknown state {x.state!r}", ref)
            if x.resource not in resource_ids:
                out.error("UNKNOWN_RESOURCE", f"{kind} moves unknown resource {x.resource!r}", ref)
            _check_amount(out, x.amount, f"{kind} amount at state {x.state!r}", ref)

    for c in design.converters:
        ref = f"converter:{c.state}/{c.from_resource}->{c.to_resource}"
        if c.state not in state_ids:
            out.error("UNKNOWN_STATE", f"converter attached to unknown state {c.state!r}", ref)
        for rid in (c.from_resource, c.to_resource):
            if rid not in resource_ids:
                out.error("UNKNOWN_RESOURCE", f"converter uses unknown resource {rid!r}", ref)
        if c.from_resource == c.to_resource:
            out.error("SELF_CONVERSION",
                      f"converter at {c.state!r} converts {c.from_resource!r} to itself", ref)
        _check_amount(out, c.from_amount, "converter input amount", ref)
        _check_amount(out, c.to_amount, "converter output amount", ref)

    # Warnings below need a structurally sound design to be meaningful.
    if not out.issues or all(i.severity == "warning" for i in out.issues):
        _reachability_warnings(out, design, state_ids)
        _unused_action_warnings(out, design, action_ids)
        _unsatisfiable_cost_warnings(out, design)

    return ValidationReport(tuple(out.issues))


def _reachability_warnings(out: _IssueCollector, design: GameDesign, state_ids: set[str]) -> None:
    adjacency: dict[str, set[str]] = {sid: set() for sid in state_ids}
    for t in design.transitions:
        adjacency[t.from_state].add(t.to_state)
    reached = {design.start_state}
    frontier = deque([design.start_state])
    while frontier:
        current = frontier.popleft()
        for nxt in adjacency[current]:
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    for s in design.states:
        if s.id not in reached:
            out.warning("UNREACHABLE_STATE",
                        f"state {s.id!r} cannot be reached from the start state",
                        f"state:{s.id}")


def _unused_action_warnings(out: _IssueCollector, design: GameDesign, action_ids: set[str]) -> None:
    used = {t.action for t in design.transitions}
    for a in design.actions:
        if a.id not in used:
            out.warning("UNUSED_ACTION",
                        f"action {a.id!r} appears in no transition", f"action:{a.id}")


def _unsatisfiable_cost_warnings(out: _IssueCollector, design: GameDesign) -> None:
    # Inventories start empty, so a resource no tap grants and no converter
    # produces can never be spent.
    obtainable = {t.resource for t in design.taps} | {c.to_resource for c in design.converters}
    for a in design.actions:
        for c in a.costs:
            if c.amount > 0 and c.resource not in obtainable:
                out.warning("UNSATISFIABLE_COST",
                            f"action {a.id!r} costs {c.resource!r}, which nothing ever grants",
                            f"action:{a.id}/cost:{c.resource}")

"""Resource-flow mechanics: affordability, costs, and arrival effects.

Arrival effects fire in a fixed order (taps, then drains, then converters,
each in definition order) so playthroughs are reproducible. Gains and
losses report the amounts that actually moved after clamping to
[0, capacity], not the nominal attachment amounts.
"""

from __future__ import annotations

from .errors import UnaffordableError, UnknownStateError
from .model import GameDesign, Inventory


class DesignIndex:
    """Precomputed lookups for one design; shared by all hot paths.

    The public functions below and the simulator both run through this
    class, so affordability and arrival semantics cannot diverge.
    """

    def __init__(self, design: GameDesign):
        self.design = design
        self.capacity = {r.id: r.capacity for r in design.resources}
        self.importance = {s.id: s.importance for s in design.states}
        self.costs = {a.id: tuple((c.resource, c.amount) for c in a.costs)
                      for a in design.actions}
        # Outgoing edges per state, ordered by action id for determinism.
        self.outgoing: dict[str, tuple[tuple[str, str], ...]] = {s.id: () for s in design.states}
        edges: dict[str, list[tuple[str, str]]] = {s.id: [] for s in design.states}
        for t in design.transitions:
            edges[t.from_state].append((t.action, t.to_state))
        for sid, lst in edges.items():
            self.outgoing[sid] = tuple(sorted(lst))
        self.taps: dict[str, tuple[tuple[str, float], ...]] = {s.id: () for s in design.states}
        self.drains: dict[str, tuple[tuple[str, float], ...]] = {s.id: () for s in design.states}
        self.converters: dict[str, tuple[tuple[str, float, str, float], ...]] = {
            s.id: () for s in design.states}
        taps: dict[str, list] = {s.id: [] for s in design.states}
        drains: dict[str, list] = {s.id: [] for s in design.states}
        convs: dict[str, list] = {s.id: [] for s in design.states}
        for tap in design.taps:
            taps[tap.state].append((tap.resource, tap.amount))
        for drain in design.drains:
            drains[drain.state].append((drain.resource, drain.amount))
        for conv in design.converters:
            convs[conv.state].append(
                (conv.from_resource, conv.from_amount, conv.to_resource, conv.to_amount))
        for sid in self.outgoing:
            self.taps[sid] = tuple(taps[sid])
            self.drains[sid] = tuple(drains[sid])
            self.converters[sid] = tuple(convs[sid])
        self.neighbors = {sid: tuple(sorted({to for _, to in lst}))
                          for sid, lst in self.outgoing.items()}
        self.out_degree = {sid: len(lst) for sid, lst in self.outgoing.items()}

    def affordable(self, action: str, amounts: dict[str, float]) -> bool:
        for resource, amount in self.costs[action]:
            if amounts.get(resource, 0.0) < amount:
                return False
        return True

    def available(self, state: str, amounts: dict[str, float]) -> list[str]:
        return [action for action, _ in self.outgoing[state]
                if self.affordable(action, amounts)]

    def destination(self, state: str, action: str) -> str | None:
        for a, to in self.outgoing[state]:
            if a == action:
                return to
        return None

    def pay(self, action: str, amounts: dict[str, float],
            totals: dict[str, list[float]] | None = None) -> None:
        for resource, amount in self.costs[action]:
            amounts[resource] -= amount
            if totals is not None:
                totals[resource][1] += amount

    def arrive(self, state: str, amounts: dict[str, float],
               totals: dict[str, list[float]] | None = None) -> tuple[float, float]:
        """Apply taps, drains, then converters in place; return (gains, losses).

        Gains and losses are the post-clamp deltas, so the inventory bound
        [0, capacity] holds exactly even under float rounding. When given,
        `totals` accumulates the per-resource (gained, lost) flows.
        """
        gains = 0.0
        losses = 0.0
        for resource, amount in self.taps[state]:
            old = amounts[resource]
            new = old + amount
            cap = self.capacity[resource]
            if new > cap:
                new = cap
            amounts[resource] = new
            gains += new - old
            if totals is not None:
                totals[resource][0] += new - old
        for resource, amount in self.drains[state]:
            old = amounts[resource]
            new = old - amount
            if new < 0.0:
                new = 0.0
            amounts[resource] = new
            losses += old - new
            if totals is not None:
                totals[resource][1] += old - new
        for from_res, from_amt, to_res, to_amt in self.converters[state]:
            if amounts[from_res] < from_amt:
                continue  # all-or-nothing: partial input never converts
            amounts[from_res] -= from_amt
            losses += from_amt
            if totals is not None:
                totals[from_res][1] += from_amt
            old = amounts[to_res]
            new = old + to_amt
            cap = self.capacity[to_res]
            if new > cap:
                new = cap
            amounts[to_res] = new
            gains += new - old
            if totals is not None:
                totals[to_res][0] += new - old
        return gains, losses


def available_actions(design: GameDesign, state: str, inv: Inventory,
                      index: DesignIndex | None = None) -> list[str]:
    """Actions with a transition out of `state` whose costs `inv` can pay, sorted by id."""
    index = index or DesignIndex(design)
    if state not in index.outgoing:
        raise UnknownStateError(f"unknown state {state!r}")
    return index.available(state, dict(inv.amounts))


def apply_action_cost(design: GameDesign, action: str, inv: Inventory,
                      index: DesignIndex | None = None) -> Inventory:
    """Subtract an affordable action's costs; other resources untouched."""
    index = index or DesignIndex(design)
    amounts = dict(inv.amounts)
    if not index.affordable(action, amounts):
        raise UnaffordableError(f"action {action!r} is not affordable")
    index.pay(action, amounts)
    return Inventory(amounts)


def apply_arrival_effects(design: GameDesign, state: str, inv: Inventory,
                          index: DesignIndex | None = None) -> tuple[Inventory, float, float]:
    """Fire the state's taps, drains, and converters; return (inventory, gains, losses)."""
    index = index or DesignIndex(design)
    if state not in index.outgoing:
        raise UnknownStateError(f"unknown state {state!r}")
    amounts = dict(inv.amounts)
    gains, losses = index.arrive(state, amounts)
    return Inventory(amounts), gains, losses

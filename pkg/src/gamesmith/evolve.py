"""Genetic optimizers over game designs.

Two mutation-only optimizers share one GA loop: the balancer perturbs a
design's tunable numbers with fixed topology, and the generator edits
structure (adding components, rewiring references) under category freezes.
Selection is tournament-based with elitism; every several generations a
human can pick the favorite candidate instead, and that pick becomes both
the elite and the parent of the next brood.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Protocol

import numpy as np

from .errors import InvalidDesignError, NoLegalEditError
from .metrics import MetricWeights
from .model import (
    CATEGORY_NAMES,
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
from .sampler import FREE_ACTION_P, SamplerCaps
from .seeding import child_seed
from .simulate import SimConfig, playthrough_digest, simulate

_EVO_KEYS = {
    "populationSize": "population_size",
    "generations": "generations",
    "mutationRate": "mutation_rate",
    "tournamentSize": "tournament_size",
    "eliteCount": "elite_count",
    "humanEveryK": "human_every_k",
    "candidatesShown": "candidates_shown",
    "frozenCategories": "frozen_categories",
    "seed": "seed",
}


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 20
    generations: int = 50
    mutation_rate: float = 0.2
    tournament_size: int = 3
    elite_count: int = 1
    human_every_k: int = 5
    candidates_shown: int = 4
    frozen_categories: frozenset[str] = frozenset()
    seed: int = 0
    sim_config: SimConfig = field(default_factory=SimConfig)
    weights: MetricWeights = field(default_factory=MetricWeights)

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValueError("tournament_size must be in [1, population_size]")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be below population_size")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        if self.generations < 0 or self.human_every_k < 0 or self.candidates_shown < 1:
            raise ValueError("bad evolution config")
        bad = set(self.frozen_categories) - set(CATEGORY_NAMES)
        if bad:
            raise ValueError(f"unknown frozen categories: {sorted(bad)}")

    def to_dict(self) -> dict:
        doc = {camel: getattr(self, attr) for camel, attr in _EVO_KEYS.items()}
        doc["frozenCategories"] = sorted(self.frozen_categories)
        doc["simConfig"] = self.sim_config.to_dict()
        doc["weights"] = self.weights.as_dict()
        return doc

    @staticmethod
    def from_dict(values: Mapping, base: "EvolutionConfig | None" = None) -> "EvolutionConfig":
        base = base or EvolutionConfig()
        known = set(_EVO_KEYS) | {"simConfig", "weights"}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown evolution config field(s): {sorted(unknown)}")
        kwargs = {attr: getattr(base, attr) for attr in _EVO_KEYS.values()}
        for camel, attr in _EVO_KEYS.items():
            if camel not in values:
                continue
            value = values[camel]
            if attr == "frozen_categories":
                kwargs[attr] = frozenset(value)
            elif attr == "mutation_rate":
                kwargs[attr] = float(value)
            else:
                kwargs[attr] = int(value)
        sim = SimConfig.from_dict(values.get("simConfig", {}), base.sim_config)
        weights = MetricWeights.from_dict(values["weights"]) if "weights" in values \
            else base.weights
        return EvolutionConfig(sim_config=sim, weights=weights, **kwargs)


@dataclass(frozen=True)
class EvolutionResult:
    best_design: GameDesign
    best_fitness: float
    history: tuple[tuple[float, float], ...]
    evaluations: int
    aborted: bool = False

    def to_dict(self) -> dict:
        from .serialize import design_to_dict

        return {
            "bestDesign": design_to_dict(self.best_design),
            "bestFitness": self.best_fitness,
            "history": [{"bestFitness": b, "meanFitness": m} for b, m in self.history],
            "evaluations": self.evaluations,
            "aborted": self.aborted,
        }


@dataclass(frozen=True)
class Candidate:
    design: GameDesign
    fitness: float
    digest: dict


class CandidateSelector(Protocol):
    """Human-in-the-loop hook: pick a favorite among candidates, or abort.

    Returning an index steers the run; returning None aborts it, leaving
    the best design so far as a partial result.
    """

    def choose(self, generation: int, candidates: list[Candidate]) -> int | None: ...


class ArgmaxSelector:
    """Automated stand-in: always picks the fittest candidate."""

    def choose(self, generation: int, candidates: list[Candidate]) -> int | None:
        return max(range(len(candidates)), key=lambda i: candidates[i].fitness)


class ConsoleSelector:
    """Prompts on stdin; empty input picks the fittest, 'q' aborts."""

    def choose(self, generation: int, candidates: list[Candidate]) -> int | None:
        print(f"\n-- generation {generation}: pick a favorite --")
        for i, c in enumerate(candidates):
            d = c.digest
            print(f"  [{i}] fitness={c.fitness:.6g} arrivals={d['pathLength']} "
                  f"reward={d['totalReward']:.6g} "
                  f"top={','.join(t['state'] for t in d['topStates'])}")
        while True:
            raw = input(f"choice 0-{len(candidates) - 1} (enter=best, q=abort): ").strip()
            if raw == "":
                return ArgmaxSelector().choose(generation, candidates)
            if raw.lower() == "q":
                return None
            try:
                index = int(raw)
            except ValueError:
                continue
            if 0 <= index < len(candidates):
                return index


def fitness(design: GameDesign, weights: MetricWeights, sim_cfg: SimConfig, seed: int) -> float:
    """Total playthrough reward under a fixed simulation seed."""
    return simulate(design, weights, sim_cfg.with_seed(seed)).total_reward


def _require_valid(design: GameDesign) -> None:
    report = validate_design(design)
    if not report.valid:
        codes = sorted({i.code for i in report.errors})
        raise InvalidDesignError(f"design is invalid: {', '.join(codes)}", report)


def _perturb(value: float, rng: np.random.Generator) -> float:
    sigma = max(0.2 * abs(value), 0.5)
    return max(0.0, value + float(rng.normal(0.0, sigma)))


def mutate_numbers(design: GameDesign, rate: float, rng: np.random.Generator,
                   frozen: frozenset[str] = frozenset()) -> GameDesign:
    """Gaussian-perturb tunable numbers in place of topology.

    Tunable: resource capacities, action costs, tap/drain amounts, and
    converter amounts. State importances are designer goals, not balance
    numbers, and stay fixed. Categories in `frozen` are skipped entirely.
    """
    _require_valid(design)

    def hit() -> bool:
        return rng.random() < rate

    resources = design.resources
    if "resources" not in frozen:
        resources = tuple(
            replace(r, capacity=_perturb(r.capacity, rng)) if hit() else r
            for r in design.resources
        )
    actions = design.actions
    if "actions" not in frozen:
        actions = tuple(
            replace(a, costs=tuple(
                replace(c, amount=_perturb(c.amount, rng)) if hit() else c for c in a.costs
            ))
            for a in design.actions
        )
    taps = design.taps
    if "taps" not in frozen:
        taps = tuple(
            replace(t, amount=_perturb(t.amount, rng)) if hit() else t for t in design.taps
        )
    drains = design.drains
    if "drains" not in frozen:
        drains = tuple(
            replace(t, amount=_perturb(t.amount, rng)) if hit() else t for t in design.drains
        )
    converters = design.converters
    if "converters" not in frozen:
        out = []
        for c in design.converters:
            if hit():
                c = replace(c, from_amount=_perturb(c.from_amount, rng))
            if hit():
                c = replace(c, to_amount=_perturb(c.to_amount, rng))
            out.append(c)
        converters = tuple(out)
    return replace(design, resources=resources, actions=actions, taps=taps,
                   drains=drains, converters=converters)


def _fresh_id(prefix: str, existing: set[str]) -> str:
    i = len(existing)
    while f"{prefix}{i}" in existing:
        i += 1
    return f"{prefix}{i}"


def mutate_structure(design: GameDesign, frozen: frozenset[str], rng: np.random.Generator,
                     caps: SamplerCaps) -> GameDesign:
    """Apply one random structural edit that respects freezes and caps.

    Edits: add a component of any category, rewire a transition target,
    reattach a tap/drain/converter, or re-randomize one numeric field.
    New components get fresh ids and uniformly sampled attributes; the
    result always validates.
    """
    _require_valid(design)
    state_ids = [s.id for s in design.states]
    action_ids = [a.id for a in design.actions]
    resource_ids = [r.id for r in design.resources]
    edits: list[tuple[str, Callable[[], GameDesign]]] = []

    def add_state() -> GameDesign:
        sid = _fresh_id("s", set(state_ids))
        importance = float(rng.integers(0, caps.importance_max + 1))
        return replace(design, states=design.states + (StateDef(sid, importance),))

    def add_action() -> GameDesign:
        aid = _fresh_id("a", set(action_ids))
        if not resource_ids or rng.random() < FREE_ACTION_P:
            n_costs = 0
        else:
            n_costs = int(rng.integers(1, len(resource_ids) + 1))
        chosen = rng.choice(len(resource_ids), size=n_costs, replace=False)
        costs = tuple(CostDef(resource_ids[int(i)], float(rng.uniform(0, caps.amount_max)))
                      for i in sorted(chosen))
        return replace(design, actions=design.actions + (ActionDef(aid, costs),))

    def add_resource() -> GameDesign:
        rid = _fresh_id("r", set(resource_ids))
        capacity = float(rng.uniform(caps.capacity_min, caps.capacity_max))
        return replace(design, resources=design.resources + (ResourceDef(rid, capacity),))

    def add_transition() -> GameDesign:
        taken = {(t.from_state, t.action) for t in design.transitions}
        free = [(s, a) for s in state_ids for a in action_ids if (s, a) not in taken]
        from_state, action = free[int(rng.integers(len(free)))]
        to_state = state_ids[int(rng.integers(len(state_ids)))]
        return replace(design,
                       transitions=design.transitions
                       + (TransitionDef(from_state, action, to_state),))

    def add_tap() -> GameDesign:
        tap = TapDef(state_ids[int(rng.integers(len(state_ids)))],
                     resource_ids[int(rng.integers(len(resource_ids)))],
                     float(rng.uniform(0, caps.amount_max)))
        return replace(design, taps=design.taps + (tap,))

    def add_drain() -> GameDesign:
        drain = DrainDef(state_ids[int(rng.integers(len(state_ids)))],
                         resource_ids[int(rng.integers(len(resource_ids)))],
                         float(rng.uniform(0, caps.amount_max)))
        return replace(design, drains=design.drains + (drain,))

    def add_converter() -> GameDesign:
        from_i, to_i = rng.choice(len(resource_ids), size=2, replace=False)
        conv = ConverterDef(state_ids[int(rng.integers(len(state_ids)))],
                            resource_ids[int(from_i)], float(rng.uniform(0, caps.amount_max)),
                            resource_ids[int(to_i)], float(rng.uniform(0, caps.amount_max)))
        return replace(design, converters=design.converters + (conv,))

    def rewire_transition() -> GameDesign:
        i = int(rng.integers(len(design.transitions)))
        t = design.transitions[i]
        rewired = replace(t, to_state=state_ids[int(rng.integers(len(state_ids)))])
        transitions = design.transitions[:i] + (rewired,) + design.transitions[i + 1:]
        return replace(design, transitions=transitions)

    def reattach(category: str) -> GameDesign:
        items = getattr(design, category)
        i = int(rng.integers(len(items)))
        moved = replace(items[i], state=state_ids[int(rng.integers(len(state_ids)))])
        return replace(design, **{category: items[:i] + (moved,) + items[i + 1:]})

    def rerandomize_number() -> GameDesign:
        fields: list[tuple[str, int, str]] = []
        if "resources" not in frozen:
            fields += [("resources", i, "capacity") for i in range(len(design.resources))]
        if "actions" not in frozen:
            fields += [("actions", i, f"cost{j}") for i, a in enumerate(design.actions)
                       for j in range(len(a.costs))]
        if "states" not in frozen:
            fields += [("states", i, "importance") for i in range(len(design.states))]
        if "taps" not in frozen:
            fields += [("taps", i, "amount") for i in range(len(design.taps))]
        if "drains" not in frozen:
            fields += [("drains", i, "amount") for i in range(len(design.drains))]
        if "converters" not in frozen:
            fields += [("converters", i, side) for i in range(len(design.converters))
                       for side in ("from_amount", "to_amount")]
        category, i, which = fields[int(rng.integers(len(fields)))]
        items = getattr(design, category)
        item = items[i]
        if category == "resources":
            item = replace(item, capacity=float(rng.uniform(caps.capacity_min,
                                                            caps.capacity_max)))
        elif category == "states":
            item = replace(item, importance=float(rng.integers(0, caps.importance_max + 1)))
        elif category == "actions":
            j = int(which.removeprefix("cost"))
            cost = replace(item.costs[j], amount=float(rng.uniform(0, caps.amount_max)))
            item = replace(item, costs=item.costs[:j] + (cost,) + item.costs[j + 1:])
        else:
            item = replace(item, **{which: float(rng.uniform(0, caps.amount_max))})
        return replace(design, **{category: items[:i] + (item,) + items[i + 1:]})

    if "states" not in frozen and len(design.states) < caps.max_states:
        edits.append(("add_state", add_state))
    if "actions" not in frozen and len(design.actions) < caps.max_actions:
        edits.append(("add_action", add_action))
    if "resources" not in frozen and len(design.resources) < caps.max_resources:
        edits.append(("add_resource", add_resource))
    if "transitions" not in frozen:
        taken = {(t.from_state, t.action) for t in design.transitions}
        if (len(design.transitions) < caps.max_transitions and state_ids and action_ids
                and len(taken) < len(state_ids) * len(action_ids)):
            edits.append(("add_transition", add_transition))
        if design.transitions:
            edits.append(("rewire_transition", rewire_transition))
    if "taps" not in frozen and resource_ids:
        if len(design.taps) < caps.max_taps:
            edits.append(("add_tap", add_tap))
        if design.taps:
            edits.append(("reattach_tap", lambda: reattach("taps")))
    if "drains" not in frozen and resource_ids:
        if len(design.drains) < caps.max_drains:
            edits.append(("add_drain", add_drain))
        if design.drains:
            edits.append(("reattach_drain", lambda: reattach("drains")))
    if "converters" not in frozen and len(resource_ids) >= 2:
        if len(design.converters) < caps.max_converters:
            edits.append(("add_converter", add_converter))
        if design.converters:
            edits.append(("reattach_converter", lambda: reattach("converters")))
    has_numbers = any(
        category not in frozen and n > 0
        for category, n in (
            ("resources", len(design.resources)),
            ("actions", sum(len(a.costs) for a in design.actions)),
            ("states", len(design.states)),
            ("taps", len(design.taps)),
            ("drains", len(design.drains)),
            ("converters", len(design.converters)),
        )
    )
    if has_numbers:
        edits.append(("rerandomize_number", rerandomize_number))

    if not edits:
        raise NoLegalEditError("every category is frozen or at its cap")
    _, edit = edits[int(rng.integers(len(edits)))]
    return edit()


class _Evaluator:
    """Fitness cache sharing one simulation seed across all candidates."""

    def __init__(self, cfg: EvolutionConfig):
        self.weights = cfg.weights
        self.sim_cfg = cfg.sim_config.with_seed(child_seed(cfg.seed, "fitness"))
        self.cache: dict[GameDesign, tuple[float, dict]] = {}
        self.evaluations = 0

    def score(self, design: GameDesign) -> float:
        return self.entry(design)[0]

    def entry(self, design: GameDesign) -> tuple[float, dict]:
        hit = self.cache.get(design)
        if hit is None:
            report = simulate(design, self.weights, self.sim_cfg)
            total = report.total_reward
            if total != total:  # NaN fitness loses every comparison
                total = float("-inf")
            hit = (total, playthrough_digest(report))
            self.cache[design] = hit
            self.evaluations += 1
        return hit


ProgressFn = Callable[[int, float, float], bool]


def _run_ga(design: GameDesign, cfg: EvolutionConfig, selector: CandidateSelector | None,
            offspring: Callable[[GameDesign, np.random.Generator], GameDesign],
            progress: ProgressFn | None = None) -> EvolutionResult:
    _require_valid(design)
    selector = selector or ArgmaxSelector()
    rng = np.random.default_rng(child_seed(cfg.seed, "ga"))
    evaluator = _Evaluator(cfg)

    best_design = design
    best_fitness = evaluator.score(design)
    history: list[tuple[float, float]] = []

    def result(aborted: bool = False) -> EvolutionResult:
        return EvolutionResult(best_design, best_fitness, tuple(history),
                               evaluator.evaluations, aborted)

    if cfg.generations == 0:
        return result()

    population = [design] + [offspring(design, rng)
                             for _ in range(cfg.population_size - 1)]

    for generation in range(1, cfg.generations + 1):
        scored = [(evaluator.score(d), i, d) for i, d in enumerate(population)]
        ranked = sorted(scored, key=lambda t: (-t[0], t[1]))
        for score, _, d in ranked:
            if score > best_fitness:
                best_fitness, best_design = score, d
        gen_best = ranked[0][0]
        gen_mean = sum(s for s, _, _ in scored) / len(scored)
        history.append((gen_best, gen_mean))

        if cfg.human_every_k > 0 and generation % cfg.human_every_k == 0:
            shown = ranked[: cfg.candidates_shown]
            candidates = [Candidate(d, s, evaluator.entry(d)[1]) for s, _, d in shown]
            choice = selector.choose(generation, candidates)
            if choice is None:
                return result(aborted=True)
            if not 0 <= choice < len(candidates):
                raise IndexError(f"candidate index {choice} out of range")
            chosen = candidates[choice].design
            if candidates[choice].fitness > best_fitness:
                best_fitness, best_design = candidates[choice].fitness, chosen
            elites = [chosen]
            parents = [chosen] * (cfg.population_size - 1)
        else:
            elites = [d for _, _, d in ranked[: cfg.elite_count]]
            parents = []
            for _ in range(cfg.population_size - len(elites)):
                picks = rng.integers(len(population), size=cfg.tournament_size)
                winner = max(((scored[int(p)][0], -int(p)) for p in picks))
                parents.append(population[-winner[1]])

        population = elites + [offspring(parent, rng) for parent in parents]

        if progress is not None and not progress(generation, gen_best, gen_mean):
            return result(aborted=True)

    scored = [(evaluator.score(d), i, d) for i, d in enumerate(population)]
    for score, _, d in sorted(scored, key=lambda t: (-t[0], t[1])):
        if score > best_fitness:
            best_fitness, best_design = score, d
    return result()


def balance(design: GameDesign, cfg: EvolutionConfig,
            selector: CandidateSelector | None = None,
            progress: ProgressFn | None = None) -> EvolutionResult:
    """Tune the design's numbers with a mutation-only GA; topology is untouched."""

    def offspring(parent: GameDesign, rng: np.random.Generator) -> GameDesign:
        return mutate_numbers(parent, cfg.mutation_rate, rng)

    return _run_ga(design, cfg, selector, offspring, progress)


def generate(design: GameDesign, cfg: EvolutionConfig,
             selector: CandidateSelector | None = None,
             caps: SamplerCaps | None = None,
             progress: ProgressFn | None = None) -> EvolutionResult:
    """Grow and rewire the design structurally under the configured freezes."""
    caps = caps or SamplerCaps()
    frozen = cfg.frozen_categories

    def offspring(parent: GameDesign, rng: np.random.Generator) -> GameDesign:
        try:
            child = mutate_structure(parent, frozen, rng, caps)
        except NoLegalEditError:
            child = parent
        if rng.random() < 0.5:
            child = mutate_numbers(child, cfg.mutation_rate, rng, frozen=frozen)
        return child

    return _run_ga(design, cfg, selector, offspring, progress)

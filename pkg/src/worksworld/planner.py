"""Forward heuristic search over ground states."""
from __future__ import annotations

import heapq
import random
import re
import resource
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .grounding import GroundAction, GroundProblem, State
from .heuristics import INF, Heuristic

STRATEGIES = ("greedy-best-first", "weighted-astar")
# macro ordering: zero-cost propagation first, then edges, placements, copies
SCHEMA_RANK = {
    "propagate_input": 0,
    "propagate_output": 0,
    "connect_direct_link": 1,
    "connect_composite_link": 1,
    "schedule_component": 2,
    "replicate_code": 3,
}


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "greedy-best-first"
    weight: float = 1.0
    heuristic: str = "relaxed-plan-length"
    objective: str = "cost"  # g-value for weighted A*: "cost" or "length"
    max_expansions: int = 1_000_000
    time_budget: float = 300.0
    memory_budget: float = 4096.0  # MB, peak resident set
    seed: int = 0
    minimize: bool = True
    backend: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.weight < 1:
            raise ValueError("weight must be >= 1")
        if self.time_budget <= 0 or self.memory_budget <= 0 or self.max_expansions <= 0:
            raise ValueError("budgets must be positive")
        if self.objective not in ("cost", "length"):
            raise ValueError("objective must be 'cost' or 'length'")

    @classmethod
    def parse_strategy(cls, text: str, **kw) -> "SearchConfig":
        """Accepts gbfs, greedy-best-first, weighted-astar, weighted-astar(w), wastar:w."""
        text = text.strip().lower()
        if text in ("gbfs", "greedy-best-first"):
            return cls(strategy="greedy-best-first", **kw)
        m = re.fullmatch(r"(?:weighted-astar|wastar|astar)(?:\((\d+(?:\.\d+)?)\)|:(\d+(?:\.\d+)?))?", text)
        if not m:
            raise ValueError(f"unknown strategy {text!r}")
        w = float(m.group(1) or m.group(2) or 1.0)
        return cls(strategy="weighted-astar", weight=w, **kw)


@dataclass(frozen=True)
class PlanStep:
    schema: str
    args: tuple[str, ...]
    cost: Fraction | None = None
    latency: Fraction | None = None

    @property
    def name(self) -> str:
        return "(" + " ".join((self.schema,) + self.args) + ")"


@dataclass
class Plan:
    steps: list[PlanStep]
    cost: Fraction | None
    latency: Fraction | None
    status: str  # solved | unsolvable | budget-exhausted
    expansions: int = 0
    generated: int = 0
    search_seconds: float = 0.0
    reason: str = ""
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.steps)


def peak_rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def steps_from_actions(actions: list[GroundAction]) -> list[PlanStep]:
    return [PlanStep(a.schema, a.args, a.cost, a.latency) for a in actions]


def make_plan(problem: GroundProblem, actions: list[GroundAction], status: str = "solved", **kw) -> Plan:
    state = problem.init
    for a in actions:
        state = problem.apply(a, state)
    return Plan(steps_from_actions(actions), state.cost, state.values[problem.latency_slot], status, **kw)


class SuccessorGenerator:
    """Candidate actions indexed by one positive precondition atom."""

    def __init__(self, problem: GroundProblem):
        self.problem = problem
        self.always: list[GroundAction] = []
        self.by_atom: dict[int, list[GroundAction]] = {}
        for a in problem.actions:
            if not a.static_ok:
                continue
            if a.pre:
                self.by_atom.setdefault(min(a.pre), []).append(a)
            else:
                self.always.append(a)
        self.order = {a.index: (SCHEMA_RANK[a.schema], a.index) for a in problem.actions}

    def __call__(self, state: State) -> list[GroundAction]:
        p = self.problem
        cands = [a for a in self.always if p.applicable(a, state)]
        for atom in state.atoms:
            for a in self.by_atom.get(atom, ()):
                if p.applicable(a, state):
                    cands.append(a)
        cands.sort(key=lambda a: self.order[a.index])
        return cands


def _extract(nodes, idx) -> list[GroundAction]:
    out = []
    while nodes[idx][1] is not None:
        _, parent, action, _ = nodes[idx]
        out.append(action)
        idx = parent
    out.reverse()
    return out


def plan(problem: GroundProblem, cfg: SearchConfig | None = None) -> Plan:
    """Search for a plan; deterministic for a fixed problem and config."""
    cfg = cfg or SearchConfig()
    start = time.monotonic()
    h = Heuristic(problem, cfg.heuristic, cfg.backend)
    succ = SuccessorGenerator(problem)
    rng = random.Random(cfg.seed)
    greedy = cfg.strategy == "greedy-best-first"
    weight = cfg.weight

    def g_of(state: State, depth: int):
        return depth if cfg.objective == "length" else state.cost

    def finish(status, actions=None, reason=""):
        elapsed = time.monotonic() - start
        kw = dict(expansions=expansions, generated=generated, search_seconds=elapsed, reason=reason)
        if actions is None:
            return Plan([], None, None, status, **kw)
        if cfg.minimize and greedy:
            actions = minimize_plan(problem, actions)
        return make_plan(problem, actions, status, **kw)

    expansions = generated = 0
    init = problem.init
    h0 = h(init)
    if h0 == INF:
        return finish("unsolvable", reason="initial state is a relaxed dead end")
    # node: (state, parent index, action, depth)
    nodes: list[tuple] = [(init, None, None, 0)]
    best_g = {init: g_of(init, 0)}
    heap: list = []

    def push(idx, hval):
        state, _, _, depth = nodes[idx]
        g = g_of(state, depth)
        f = hval if greedy else g + weight * hval
        heapq.heappush(heap, (f, hval, rng.random() if cfg.seed else 0.0, idx))

    push(0, h0)
    while heap:
        _, _, _, idx = heapq.heappop(heap)
        state, _, _, depth = nodes[idx]
        if not greedy and g_of(state, depth) > best_g.get(state, g_of(state, depth)):
            continue  # stale entry
        if problem.is_goal(state):
            return finish("solved", _extract(nodes, idx))
        expansions += 1
        if expansions >= cfg.max_expansions:
            return finish("budget-exhausted", reason="expansion limit")
        if expansions % 64 == 0:
            if time.monotonic() - start > cfg.time_budget:
                return finish("budget-exhausted", reason="time budget")
            if peak_rss_mb() > cfg.memory_budget:
                return finish("budget-exhausted", reason="memory budget")
        for a in succ(state):
            child = problem.apply(a, state)
            if child == state:
                continue
            generated += 1
            g = g_of(child, depth + 1)
            old = best_g.get(child)
            if old is not None and (greedy or g >= old):
                continue
            best_g[child] = g
            hval = h(child)
            if hval == INF:
                continue
            nodes.append((child, idx, a, depth + 1))
            push(len(nodes) - 1, hval)
    return finish("unsolvable", reason="search space exhausted")


def replay(problem: GroundProblem, actions: list[GroundAction]) -> State | None:
    state = problem.init
    for a in actions:
        if not problem.applicable(a, state):
            return None
        state = problem.apply(a, state)
    return state


def minimize_plan(problem: GroundProblem, actions: list[GroundAction]) -> list[GroundAction]:
    """Greedily drop steps whose removal keeps the plan executable and goal-reaching."""
    actions = list(actions)
    changed = True
    while changed:
        changed = False
        for i in range(len(actions) - 1, -1, -1):
            trial = actions[:i] + actions[i + 1:]
            end = replay(problem, trial)
            if end is not None and problem.is_goal(end):
                actions = trial
                changed = True
    return actions

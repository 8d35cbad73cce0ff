"""Per-seed invariant checks shared by the property tests and the acceptance run."""
import random
from fractions import Fraction

from oracles import fold_metrics

from worksworld.benchgen import gen_random
from worksworld.grounding import GroundProblem, State, ground
from worksworld.model import validate_model
from worksworld.planner import Plan, PlanStep, SearchConfig
from worksworld.report import solve
from worksworld.validator import StepFailure, SymbolicState, _apply, validate


def check_conservation(st: SymbolicState) -> None:
    for key, value in st.fl.items():
        if key[0] == "resource_available":
            total = st.fl[("resource_total",) + key[1:]]
            assert 0 <= value <= total, (key, value, total)


def same_state(problem: GroundProblem, s: State, sym: SymbolicState) -> bool:
    dynamic = set(problem.atoms)
    if {problem.atoms[i] for i in s.atoms} != {a for a in sym.atoms if a in dynamic}:
        return False
    # None marks a fluent that is still undefined
    return all(sym.fl.get(f) == v for f, v in zip(problem.fluents, s.values))


def well_formed(seed: int) -> None:
    assert validate_model(gen_random(seed)) == []


def deterministic_grounding(seed: int) -> None:
    a, b = ground(gen_random(seed)), ground(gen_random(seed))
    assert a.stats == b.stats and a.init == b.init
    assert [x.name for x in a.actions] == [x.name for x in b.actions]
    for act in a.actions:
        touched = [f for f, _ in act.inc] + [f for f, _ in act.assign]
        assert len(touched) == len(set(touched)), act.name


def random_walk(seed: int, length: int = 16) -> None:
    problem = ground(gen_random(seed))
    rng = random.Random(seed)
    s, sym = problem.init, SymbolicState(problem.instance)
    assert same_state(problem, s, sym)
    cost, latency = Fraction(0), Fraction(0)
    for _ in range(length):
        # mostly extend the walk, sometimes probe an arbitrary action: both
        # models must agree on applicability either way
        live = [a for a in problem.actions if problem.applicable(a, s)]
        pool = live if live and rng.random() < 0.7 else problem.actions
        if not pool:
            break
        a = rng.choice(pool)
        ok = problem.applicable(a, s)
        try:
            _apply(sym, a.schema, a.args)
            accepted = True
        except StepFailure:
            accepted = False
        assert ok == accepted, a.name
        if not ok:
            continue
        s = problem.apply(a, s)
        assert same_state(problem, s, sym), a.name
        check_conservation(sym)
        assert sym.fl[("total-cost",)] >= cost and sym.fl[("absolute-latency",)] >= latency
        cost, latency = sym.fl[("total-cost",)], sym.fl[("absolute-latency",)]
        assert s.cost == cost


def solved_plan(seed: int) -> str:
    """Plan the instance; when solved, check validity, totals, conservation and
    that every single-step deletion breaks the plan. Returns the status."""
    inst = gen_random(seed)
    res = solve(inst, SearchConfig(max_expansions=20_000, time_budget=10))
    if res.status != "solved":
        assert res.status in ("unsolvable", "budget-exhausted")
        return res.status
    p, r = res.plan, res.report
    assert r.valid and r.metrics_match and r.dag.ok
    assert (r.cost, r.latency) == (p.cost, p.latency) == fold_metrics(inst, p.steps)
    assert p.latency <= inst.latency_bound

    sym = SymbolicState(inst)
    for step in p.steps:
        _apply(sym, step.schema, step.args)
        check_conservation(sym)

    full = ground(inst)
    bare = [PlanStep(s.schema, s.args) for s in p.steps]
    for i in range(len(bare)):
        assert not validate(full, Plan(bare[:i] + bare[i + 1:], None, None, "solved")).valid, i
    return res.status

"""Reference computations that share no code with the planner's state model.

Search oracles step through the checker's named-atom semantics; the metric
fold recomputes cost and latency straight from instance attributes.
"""
from __future__ import annotations

import heapq
from collections import deque
from fractions import Fraction

from worksworld.grounding import GroundProblem, goal_candidates
from worksworld.model import ProblemInstance, ResourceKind
from worksworld.validator import StepFailure, SymbolicState, _apply


def _clone(st: SymbolicState) -> SymbolicState:
    new = SymbolicState.__new__(SymbolicState)
    new.__dict__.update(st.__dict__)
    new.atoms = set(st.atoms)
    new.fl = dict(st.fl)
    return new


def _key(st: SymbolicState):
    return frozenset(st.atoms), frozenset((k, v) for k, v in st.fl.items() if k != ("total-cost",))


def _goal(st: SymbolicState, inst: ProblemInstance) -> bool:
    if st.fl[("absolute-latency",)] > inst.latency_bound:
        return False
    return all(
        any(st.has("has_data", dc, dsi, g.source, inst.component(g.source).placement)
            for dc, dsi in goal_candidates(inst, g))
        for g in inst.goals
    )


def _successors(st: SymbolicState, names: list[tuple[str, tuple[str, ...]]]):
    for schema, args in names:
        child = _clone(st)
        try:
            _apply(child, schema, args)
        except StepFailure:
            continue
        if child.atoms == st.atoms and child.fl == st.fl:
            continue
        yield (schema, args), child


def bfs_min_length(problem: GroundProblem, limit: int = 200_000) -> int | None:
    """Length of a shortest plan, or None if no plan exists (exhaustive)."""
    inst = problem.instance
    names = [(a.schema, a.args) for a in problem.actions]
    start = SymbolicState(inst)
    if _goal(start, inst):
        return 0
    seen = {_key(start)}
    frontier = deque([(start, 0)])
    while frontier:
        st, depth = frontier.popleft()
        for _, child in _successors(st, names):
            if child.fl[("absolute-latency",)] > inst.latency_bound:
                continue
            k = _key(child)
            if k in seen:
                continue
            if _goal(child, inst):
                return depth + 1
            seen.add(k)
            if len(seen) > limit:
                raise RuntimeError("oracle state limit reached")
            frontier.append((child, depth + 1))
    return None


def dijkstra_min_cost(problem: GroundProblem, limit: int = 200_000) -> Fraction | None:
    """Cheapest total-cost over all plans, or None if no plan exists."""
    inst = problem.instance
    names = [(a.schema, a.args) for a in problem.actions]
    start = SymbolicState(inst)
    best = {_key(start): Fraction(0)}
    counter = 0
    heap = [(Fraction(0), counter, start)]
    while heap:
        cost, _, st = heapq.heappop(heap)
        if best.get(_key(st), cost) < cost:
            continue
        if _goal(st, inst):
            return cost
        for _, child in _successors(st, names):
            if child.fl[("absolute-latency",)] > inst.latency_bound:
                continue
            c = child.fl[("total-cost",)]
            k = _key(child)
            if k in best and best[k] <= c:
                continue
            best[k] = c
            if len(best) > limit:
                raise RuntimeError("oracle state limit reached")
            counter += 1
            heapq.heappush(heap, (c, counter, child))
    return None


def fold_metrics(inst: ProblemInstance, steps) -> tuple[Fraction, Fraction]:
    """Total cost and latency of a step list from the cost/latency formulas alone."""
    w = inst.weight
    cost = lat = Fraction(0)
    for s in steps:
        a = s.args
        if s.schema == "replicate_code":
            comp = inst.component(a[0])
            cost += w(ResourceKind.CONFIG) * comp.demand.get(ResourceKind.CONFIG, 0) / inst.graph.link(a[3]).total_bw
        elif s.schema == "schedule_component":
            comp = inst.component(a[0])
            r = ResourceKind(a[1])
            cost += w(r) * comp.demand.get(r, 0) / inst.graph.interface(a[2]).total[r]
            lat += 1 / comp.msg_max_rate
        elif s.schema.startswith("connect_"):
            dc = inst.component(a[3])
            bw = dc.msg_max_rate * inst.ctype(a[4]).msg_size
            link = inst.graph.link(a[7])
            hops = [inst.graph.link(h) for h in a[8:10]] if s.schema == "connect_composite_link" else [link]
            cost += sum(w(ResourceKind.NETWORK) * bw / h.total_bw for h in hops)
            lat += link.latency + 1 / dc.msg_max_rate
    return cost, lat


def brute_force_action_count(inst: ProblemInstance) -> dict[str, int]:
    """Ground actions per schema: full typed products filtered by the type-level constraints."""
    from itertools import product

    from worksworld.model import ComponentClass, InterfaceKind, LinkKind

    g = inst.graph
    sites = [s.id for s in g.sites]
    links = list(g.links)
    direct = [l for l in links if l.kind is LinkKind.DIRECT]
    composite = [l for l in links if l.kind is LinkKind.COMPOSITE]
    comps = list(inst.components)
    pcs = [c for c in comps if inst.component_class(c) is ComponentClass.PROCESSING]
    dcs = [c for c in comps if inst.component_class(c) is ComponentClass.DATA]
    dpis = [i for i in g.interfaces if i.kind is InterfaceKind.DATA_PROCESSING]
    dsis = [i for i in g.interfaces if i.kind is InterfaceKind.DATA_SHARING]
    dcts = [t.id for t in inst.component_types if t.cls is ComponentClass.DATA]
    resources = list(ResourceKind)
    dirs = ("input", "output")

    def joins(l, a, b):
        return set(l.endpoints) == {a, b} if a != b else l.endpoints == (a, a)

    counts = {}
    counts["replicate_code"] = sum(
        1 for wc, a, b, l in product(comps, sites, sites, links) if a != b and joins(l, a, b))
    counts["schedule_component"] = sum(
        1 for wc, r, i, r2, s in product(comps, resources, g.interfaces, resources, sites)
        if not wc.fixed and r is inst.component_class(wc).work_resource and r2 is i.resource and s == i.site
        and i.kind is inst.component_class(wc).interface_kind)
    counts["connect_direct_link"] = sum(
        1 for pc, dpi, sp, dc, dct, dsi, sd, l, d in product(pcs, dpis, sites, dcs, dcts, dsis, sites, direct, dirs)
        if sp == dpi.site and sd == dsi.site and dct == dc.type and joins(l, sp, sd))
    counts["connect_composite_link"] = sum(
        1 for pc, dpi, sp, dc, dct, dsi, sd, cl, h1, h2, d
        in product(pcs, dpis, sites, dcs, dcts, dsis, sites, composite, direct, direct, dirs)
        if sp == dpi.site and sd == dsi.site and dct == dc.type and joins(cl, sp, sd)
        and h1.id != h2.id and {h1.id, h2.id} == set(cl.hops))
    n_prop = len(pcs) * len(dpis) * (len(dcs) * len(dsis)) ** 2
    counts["propagate_input"] = counts["propagate_output"] = n_prop
    return counts

"""Ground the six action schemas, build the initial state, count and prune.

Atoms are tuples ``(predicate, arg, ...)``; only dynamic atoms get an integer
id (static facts such as ``linked`` or ``input_format`` are folded into each
action's ``static_ok`` flag). Numeric state variables get a slot in
``State.values``; ``total-cost`` travels separately as ``State.cost``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from .model import (
    ComponentClass,
    InterfaceKind,
    LinkKind,
    ProblemInstance,
    ResourceKind,
)

SCHEMAS = (
    "replicate_code",
    "schedule_component",
    "connect_direct_link",
    "connect_composite_link",
    "propagate_input",
    "propagate_output",
)
ARITY = {
    "replicate_code": 4,
    "schedule_component": 5,
    "connect_direct_link": 9,
    "connect_composite_link": 11,
    "propagate_input": 6,
    "propagate_output": 6,
}
# predicates whose ground universe defines the proposition count F
WORKFLOW_PREDICATES = ("scheduled_on", "has_input", "connected", "processed_by", "has_data")
LATENCY = ("absolute-latency",)

Atom = tuple
Conj = frozenset


@dataclass(frozen=True, eq=False)
class GroundAction:
    index: int
    schema: str
    args: tuple[str, ...]
    static_ok: bool
    pre: frozenset[int]
    neg: frozenset[int]
    alts: tuple[int, ...]  # ids of disjunctive groups, each must have one satisfied conjunction
    num_pre: tuple[tuple[int, Fraction], ...]  # value[fluent] >= threshold
    add: frozenset[int]
    inc: tuple[tuple[int, Fraction], ...]  # value[fluent] += delta
    assign: tuple[tuple[int, Fraction], ...]
    cost: Fraction
    latency: Fraction

    @property
    def name(self) -> str:
        return "(" + " ".join((self.schema,) + self.args) + ")"

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return self.schema, self.args


@dataclass(frozen=True)
class State:
    atoms: frozenset[int]
    values: tuple
    cost: Fraction = field(default=Fraction(0), compare=False)


@dataclass(frozen=True)
class GroundingStats:
    F: int
    X: int
    A: int
    F_pruned: int | None = None
    X_pruned: int | None = None
    A_pruned: int | None = None

    def row(self) -> tuple:
        return (self.F, self.X, self.A, self.F_pruned, self.X_pruned, self.A_pruned)


@dataclass(eq=False)
class GroundProblem:
    instance: ProblemInstance
    atoms: list[Atom]
    fluents: list[tuple]
    groups: list[tuple[Conj, ...]]
    actions: list[GroundAction]
    init: State
    goal_groups: tuple[int, ...]
    latency_slot: int
    stats: GroundingStats
    pruned: bool = False

    def __post_init__(self) -> None:
        self.atom_id = {a: i for i, a in enumerate(self.atoms)}
        self.fluent_id = {f: i for i, f in enumerate(self.fluents)}
        self._by_key = {a.key: a for a in self.actions}

    @property
    def latency_bound(self) -> Fraction:
        return self.instance.latency_bound

    def find(self, schema: str, args: Iterable[str]) -> GroundAction | None:
        return self._by_key.get((schema, tuple(args)))

    def holds(self, group: int, atoms: frozenset[int]) -> bool:
        return any(c <= atoms for c in self.groups[group])

    def applicable(self, a: GroundAction, s: State) -> bool:
        if not a.static_ok or not a.pre <= s.atoms or a.neg & s.atoms:
            return False
        vals = s.values
        for f, t in a.num_pre:
            v = vals[f]
            if v is None or v < t:
                return False
        return all(self.holds(g, s.atoms) for g in a.alts)

    def apply(self, a: GroundAction, s: State) -> State:
        vals = list(s.values)
        for f, d in a.inc:
            vals[f] = vals[f] + d
        for f, v in a.assign:
            vals[f] = v
        return State(s.atoms | a.add, tuple(vals), s.cost + a.cost)

    def is_goal(self, s: State) -> bool:
        lat = s.values[self.latency_slot]
        return lat <= self.latency_bound and all(self.holds(g, s.atoms) for g in self.goal_groups)

    def describe_atom(self, i: int) -> str:
        return "(" + " ".join(self.atoms[i]) + ")"


def action_semantics(problem: GroundProblem, schema: str, args, state: State) -> tuple[bool, State]:
    a = problem.find(schema, args)
    if a is None:
        raise KeyError(f"no ground action ({schema} {' '.join(args)})")
    if not problem.applicable(a, state):
        return False, state
    return True, problem.apply(a, state)


# ---------------------------------------------------------------------------
# grounding


class _Builder:
    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.atoms: list[Atom] = []
        self.atom_id: dict[Atom, int] = {}
        self.groups: list[tuple[Conj, ...]] = []
        self.group_id: dict[tuple[Conj, ...], int] = {}
        self._cache: dict = {}

    def atom(self, *t: str) -> int:
        i = self.atom_id.get(t)
        if i is None:
            i = self.atom_id[t] = len(self.atoms)
            self.atoms.append(t)
        return i

    def group(self, conjs: tuple[Conj, ...]) -> int:
        i = self.group_id.get(conjs)
        if i is None:
            i = self.group_id[conjs] = len(self.groups)
            self.groups.append(conjs)
        return i

    def cached(self, key, make):
        v = self._cache.get(key)
        if v is None:
            v = self._cache[key] = make()
        return v


def static_facts(inst: ProblemInstance) -> set[Atom]:
    """Facts that no action changes: topology, typing, formats, interface presence."""
    facts: set[Atom] = set()
    for i in inst.graph.interfaces:
        facts.add(("available_at", i.id, i.resource.value, i.site))
    for l in inst.graph.links:
        a, b = l.endpoints
        facts.add(("linked", l.id, a, b))
        facts.add(("linked", l.id, b, a))
        for h in l.hops:
            facts.add(("link_uses", l.id, h))
    for c in inst.components:
        facts.add(("type_of", c.id, c.type))
        if c.fixed:
            facts.add(("fixed", c.id))
        t = inst.ctype(c.type)
        if t.cls is ComponentClass.PROCESSING:
            facts.add(("input_format", c.id, t.input_format))
            facts.add(("output_format", c.id, t.output_format))
    return facts


def _universe(inst: ProblemInstance):
    g = inst.graph
    comps = sorted(inst.components, key=lambda c: c.id)
    pcs = [c for c in comps if inst.component_class(c) is ComponentClass.PROCESSING]
    dcs = [c for c in comps if inst.component_class(c) is ComponentClass.DATA]
    ifaces = sorted(g.interfaces, key=lambda i: i.id)
    dpis = [i for i in ifaces if i.kind is InterfaceKind.DATA_PROCESSING]
    dsis = [i for i in ifaces if i.kind is InterfaceKind.DATA_SHARING]
    links = sorted(g.links, key=lambda l: l.id)
    sites = sorted(s.id for s in g.sites)
    return comps, pcs, dcs, ifaces, dpis, dsis, links, sites


def proposition_universe_size(inst: ProblemInstance) -> int:
    """Size of the typed universe of the workflow-state predicates."""
    comps, pcs, dcs, ifaces, dpis, dsis, links, _ = _universe(inst)
    w, i = len(comps), len(ifaces)
    p, d = len(pcs) * len(dpis), len(dcs) * len(dsis)
    return 2 * w * i + len(links) * p * d * 2 + d * p + d * d


def fixed_charges(inst: ProblemInstance) -> dict[tuple[str, ResourceKind], Fraction]:
    out: dict[tuple[str, ResourceKind], Fraction] = {}
    for c in inst.components:
        if c.fixed and c.placement is not None:
            r = inst.component_class(c).work_resource
            out[(c.placement, r)] = out.get((c.placement, r), Fraction(0)) + c.demand.get(r, Fraction(0))
    return out


def ground(inst: ProblemInstance) -> GroundProblem:
    b = _Builder(inst)
    comps, pcs, dcs, ifaces, dpis, dsis, links, sites = _universe(inst)
    statics = static_facts(inst)
    types = {t.id: t for t in inst.component_types}
    site_of = {i.id: i.site for i in ifaces}
    w = inst.weight

    # state fluents
    fluents: list[tuple] = []
    for i in ifaces:
        fluents.append(("resource_available", i.id, i.resource.value))
    for l in links:
        fluents.append(("resource_available", l.id, ResourceKind.NETWORK.value))
    for c in comps:
        kind = inst.component_class(c).interface_kind
        for i in ifaces:
            if i.kind is kind:
                fluents.append(("msg_actual_rate", c.id, i.id))
    fluents.append(LATENCY)
    fid = {f: n for n, f in enumerate(fluents)}

    charges = fixed_charges(inst)
    values: list = [None] * len(fluents)
    for i in ifaces:
        r = i.resource
        values[fid[("resource_available", i.id, r.value)]] = i.available.get(r, Fraction(0)) - charges.get((i.id, r), 0)
    for l in links:
        values[fid[("resource_available", l.id, "network")]] = l.available_bw
    for c in comps:
        if c.fixed and c.placement is not None:
            values[fid[("msg_actual_rate", c.id, c.placement)]] = c.msg_max_rate
    values[fid[LATENCY]] = Fraction(0)

    init_atoms = set()
    for c in comps:
        for s in c.config_sites:
            init_atoms.add(b.atom("available_at", c.id, "config", s))
        if c.fixed and c.placement is not None:
            init_atoms.add(b.atom("scheduled_on", c.id, c.placement))
            if inst.component_class(c) is ComponentClass.DATA:
                init_atoms.add(b.atom("has_data", c.id, c.placement, c.id, c.placement))

    links_between = {}
    for sa in sites:
        for sb in sites:
            links_between[(sa, sb)] = [l for l in links if l.joins(sa, sb)]

    actions: list[GroundAction] = []
    lat_slot = fid[LATENCY]

    def emit(schema, args, static_ok, pre=(), neg=(), alts=(), num_pre=(), add=(), inc=(), assign=(),
             cost=Fraction(0), latency=Fraction(0)):
        static_ok = static_ok and all(b.groups[g] for g in alts)
        if latency:
            inc = list(inc) + [(lat_slot, latency)]
        actions.append(GroundAction(
            len(actions), schema, tuple(args), static_ok, frozenset(pre), frozenset(neg), tuple(alts),
            tuple(num_pre), frozenset(add), tuple(inc), tuple(assign), cost, latency))

    # replicate_code(WC, S_from, S_to, L)
    for c in comps:
        size = c.demand.get(ResourceKind.CONFIG, Fraction(0))
        for sf in sites:
            for st in sites:
                if sf == st:
                    continue
                for l in links_between[(sf, st)]:
                    emit("replicate_code", (c.id, sf, st, l.id), True,
                         pre=[b.atom("available_at", c.id, "config", sf)],
                         neg=[b.atom("available_at", c.id, "config", st)],
                         add=[b.atom("available_at", c.id, "config", st)],
                         cost=w(ResourceKind.CONFIG) * size / l.total_bw)

    # schedule_component(WC, R, IF, R2, S)
    for c in comps:
        if c.fixed:
            continue
        cls = inst.component_class(c)
        r = cls.work_resource
        targets = [i for i in ifaces if i.kind is cls.interface_kind]
        placed = [b.atom("scheduled_on", c.id, i.id) for i in targets]
        demand = c.demand.get(r, Fraction(0))
        for i in targets:
            slot = fid[("resource_available", i.id, r.value)]
            total = i.total.get(r, Fraction(0))
            emit("schedule_component", (c.id, r.value, i.id, i.resource.value, i.site), total > 0,
                 pre=[b.atom("available_at", c.id, "config", i.site)],
                 neg=placed,
                 num_pre=[(slot, demand)],
                 add=[b.atom("scheduled_on", c.id, i.id)],
                 inc=[(slot, -demand)],
                 assign=[(fid[("msg_actual_rate", c.id, i.id)], c.msg_max_rate)],
                 cost=w(r) * demand / total if total > 0 else Fraction(0),
                 latency=1 / c.msg_max_rate)

    def connected_atoms(pc, dpi, dc, dsi, d):
        return b.cached(("conn", pc, dpi, dc, dsi, d), lambda: tuple(
            b.atom("connected", l.id, pc, dpi, dc, dsi, d)
            for l in links_between[(site_of[dpi], site_of[dsi])]))

    def connect_common(pc, dpi, dc, dsi, d):
        fmt_pred = "input_format" if d == "input" else "output_format"
        ok = (fmt_pred, pc.id, dc.type) in statics
        bw = dc.msg_max_rate * types[dc.type].msg_size
        pre = [b.atom("scheduled_on", pc.id, dpi.id), b.atom("scheduled_on", dc.id, dsi.id)]
        neg = connected_atoms(pc.id, dpi.id, dc.id, dsi.id, d)
        return ok, bw, pre, neg

    # connect_direct_link(PC, DPI, S_p, DC, DCT, DSI, S_d, DL, DIR)
    for pc in pcs:
        for dpi in dpis:
            for dc in dcs:
                for dsi in dsis:
                    for l in links_between[(dpi.site, dsi.site)]:
                        if l.kind is not LinkKind.DIRECT:
                            continue
                        slot = fid[("resource_available", l.id, "network")]
                        for d in ("input", "output"):
                            ok, bw, pre, neg = connect_common(pc, dpi, dc, dsi, d)
                            emit("connect_direct_link",
                                 (pc.id, dpi.id, dpi.site, dc.id, dc.type, dsi.id, dsi.site, l.id, d), ok,
                                 pre=pre, neg=neg, num_pre=[(slot, bw)],
                                 add=[b.atom("connected", l.id, pc.id, dpi.id, dc.id, dsi.id, d)],
                                 inc=[(slot, -bw)],
                                 cost=w(ResourceKind.NETWORK) * bw / l.total_bw,
                                 latency=l.latency + 1 / dc.msg_max_rate)

    # connect_composite_link(PC, DPI, S_p, DC, DCT, DSI, S_d, CL, DL, DL, DIR)
    by_id = {l.id: l for l in links}
    for pc in pcs:
        for dpi in dpis:
            for dc in dcs:
                for dsi in dsis:
                    for l in links_between[(dpi.site, dsi.site)]:
                        if l.kind is not LinkKind.COMPOSITE or len(l.hops) != 2:
                            continue
                        for h1, h2 in sorted({l.hops, l.hops[::-1]}):
                            d1, d2 = by_id[h1], by_id[h2]
                            slots = [fid[("resource_available", x, "network")] for x in (h1, h2, l.id)]
                            for d in ("input", "output"):
                                ok, bw, pre, neg = connect_common(pc, dpi, dc, dsi, d)
                                emit("connect_composite_link",
                                     (pc.id, dpi.id, dpi.site, dc.id, dc.type, dsi.id, dsi.site, l.id, h1, h2, d),
                                     ok and h1 != h2,
                                     pre=pre, neg=neg, num_pre=[(s, bw) for s in slots],
                                     add=[b.atom("connected", l.id, pc.id, dpi.id, dc.id, dsi.id, d)],
                                     inc=[(s, -bw) for s in slots],
                                     cost=w(ResourceKind.NETWORK) * bw * (1 / d1.total_bw + 1 / d2.total_bw),
                                     latency=l.latency + 1 / dc.msg_max_rate)

    def conn_group(pc, dpi, dc, dsi, d):
        return b.cached(("cg", pc, dpi, dc, dsi, d), lambda: b.group(
            tuple(frozenset((a,)) for a in connected_atoms(pc, dpi, dc, dsi, d))))

    def provenance_group(pc, dpi, dcs_, dsis_):
        return b.cached(("pg", pc, dpi, dcs_, dsis_), lambda: b.group(tuple(
            frozenset((b.atom("processed_by", dc.id, dsi.id, pc, dpi),
                       b.atom("has_data", dc.id, dsi.id, dcs_, dsis_)))
            for dc in dcs for dsi in dsis)))

    # propagate_input(PC, DPI, DC, DSI, DC_src, DSI_src)
    for pc in pcs:
        for dpi in dpis:
            has_input = b.atom("has_input", pc.id, dpi.id)
            for dc in dcs:
                for dsi in dsis:
                    cg = conn_group(pc.id, dpi.id, dc.id, dsi.id, "input")
                    processed = b.atom("processed_by", dc.id, dsi.id, pc.id, dpi.id)
                    for src in dcs:
                        for src_if in dsis:
                            emit("propagate_input", (pc.id, dpi.id, dc.id, dsi.id, src.id, src_if.id), True,
                                 pre=[b.atom("has_data", dc.id, dsi.id, src.id, src_if.id)],
                                 alts=[cg], add=[has_input, processed])

    # propagate_output(PC, DPI, DC_out, DSI_out, DC_src, DSI_src)
    for pc in pcs:
        for dpi in dpis:
            has_input = b.atom("has_input", pc.id, dpi.id)
            for dc in dcs:
                for dsi in dsis:
                    cg = conn_group(pc.id, dpi.id, dc.id, dsi.id, "output")
                    for src in dcs:
                        for src_if in dsis:
                            pg = provenance_group(pc.id, dpi.id, src.id, src_if.id)
                            emit("propagate_output", (pc.id, dpi.id, dc.id, dsi.id, src.id, src_if.id), True,
                                 pre=[has_input], alts=[cg, pg],
                                 add=[b.atom("has_data", dc.id, dsi.id, src.id, src_if.id)])

    goal_groups = tuple(_goal_group(b, inst, gd, dcs, dsis) for gd in inst.goals)

    stats = GroundingStats(proposition_universe_size(inst), len(fluents), len(actions))
    return GroundProblem(
        instance=inst,
        atoms=b.atoms,
        fluents=fluents,
        groups=b.groups,
        actions=actions,
        init=State(frozenset(init_atoms), tuple(values), Fraction(0)),
        goal_groups=goal_groups,
        latency_slot=fid[LATENCY],
        stats=stats,
    )


def _goal_group(b: _Builder, inst: ProblemInstance, gd, dcs, dsis) -> int:
    src = inst.component(gd.source)
    conjs = []
    if src.placement is not None:
        for dc in dcs:
            if dc.type != gd.dest_format:
                continue
            for dsi in dsis:
                if dsi.site == gd.dest_site:
                    conjs.append(frozenset((b.atom("has_data", dc.id, dsi.id, src.id, src.placement),)))
    return b.group(tuple(conjs))


def goal_candidates(inst: ProblemInstance, gd) -> list[tuple[str, str]]:
    """(data component, interface) pairs that satisfy a goal demand."""
    out = []
    for dc in sorted(inst.components, key=lambda c: c.id):
        if dc.type != gd.dest_format:
            continue
        for i in sorted(inst.graph.interfaces, key=lambda i: i.id):
            if i.site == gd.dest_site and i.kind is InterfaceKind.DATA_SHARING:
                out.append((dc.id, i.id))
    return out


# ---------------------------------------------------------------------------
# relaxed-reachability pruning


@dataclass
class PruneResult:
    problem: GroundProblem
    stats: GroundingStats
    unsolvable: bool
    witness: tuple[str, ...] = ()


NEG_INF = None  # sentinel meaning unbounded


def relaxed_fixpoint(problem: GroundProblem) -> tuple[set[int], list[int]]:
    """Delete-free reachability with interval-widened numeric fluents.

    Returns (reachable atoms, reached action indices in discovery order).
    """
    init = problem.init
    lo = list(init.values)
    hi = list(init.values)
    unbounded_lo: set[int] = set()
    unbounded_hi: set[int] = set()

    # there are no delete effects, so an atom true initially stays true
    dead_neg = init.atoms

    n_groups = len(problem.groups)
    conj_index: dict[Conj, int] = {}
    conj_atoms: list[Conj] = []
    group_conjs: list[list[int]] = []
    for g in problem.groups:
        ids = []
        for c in g:
            j = conj_index.get(c)
            if j is None:
                j = conj_index[c] = len(conj_atoms)
                conj_atoms.append(c)
            ids.append(j)
        group_conjs.append(ids)
    conj_missing = [len(c) for c in conj_atoms]
    atom_conjs: dict[int, list[int]] = {}
    for j, c in enumerate(conj_atoms):
        for a in c:
            atom_conjs.setdefault(a, []).append(j)
    conj_groups: list[list[int]] = [[] for _ in conj_atoms]
    for gi, ids in enumerate(group_conjs):
        for j in ids:
            conj_groups[j].append(gi)
    group_sat = [False] * n_groups
    group_actions: list[list[int]] = [[] for _ in range(n_groups)]
    atom_actions: dict[int, list[int]] = {}
    missing = []
    for a in problem.actions:
        live = a.static_ok and not (a.neg & dead_neg)
        if not live:
            missing.append(-1)
            continue
        for p in a.pre:
            atom_actions.setdefault(p, []).append(a.index)
        for g in set(a.alts):
            group_actions[g].append(a.index)
        missing.append(len(a.pre) + len(set(a.alts)))

    reached_atoms: set[int] = set()
    reached: list[int] = []
    done = [False] * len(problem.actions)
    waiting: list[int] = []  # propositionally enabled, numerically blocked
    atom_queue: list[int] = list(init.atoms)
    ready: list[int] = [a.index for a in problem.actions if missing[a.index] == 0]

    def numeric_ok(a: GroundAction) -> bool:
        for f, t in a.num_pre:
            if f in unbounded_hi:
                continue
            if hi[f] is None or hi[f] < t:
                return False
        return True

    def fire(a: GroundAction) -> bool:
        widened = False
        done[a.index] = True
        reached.append(a.index)
        for p in a.add:
            if p not in reached_atoms:
                atom_queue.append(p)
        for f, d in a.inc:
            if d < 0 and f not in unbounded_lo:
                unbounded_lo.add(f)
            if d > 0 and f not in unbounded_hi:
                unbounded_hi.add(f)
                widened = True
        for f, v in a.assign:
            if lo[f] is None or v < lo[f]:
                lo[f] = v
            if hi[f] is None or v > hi[f]:
                hi[f] = v
                widened = True
        return widened

    while atom_queue or ready:
        while atom_queue:
            p = atom_queue.pop()
            if p in reached_atoms:
                continue
            reached_atoms.add(p)
            for ai in atom_actions.get(p, ()):
                missing[ai] -= 1
                if missing[ai] == 0:
                    ready.append(ai)
            for j in atom_conjs.get(p, ()):
                conj_missing[j] -= 1
                if conj_missing[j] == 0:
                    for gi in conj_groups[j]:
                        if not group_sat[gi]:
                            group_sat[gi] = True
                            for ai in group_actions[gi]:
                                missing[ai] -= 1
                                if missing[ai] == 0:
                                    ready.append(ai)
        widened = False
        while ready:
            ai = ready.pop()
            if done[ai]:
                continue
            a = problem.actions[ai]
            if numeric_ok(a):
                widened |= fire(a)
            else:
                waiting.append(ai)
        if widened and waiting:
            ready, waiting = waiting, []
    return reached_atoms, reached


def prune(problem: GroundProblem) -> PruneResult:
    """Drop every action that is unreachable under the relaxation, then reindex."""
    reach, reached = relaxed_fixpoint(problem)
    order = sorted(reached)
    keep_actions = [problem.actions[i] for i in order]

    goal_ok = [any(c <= reach for c in problem.groups[g]) for g in problem.goal_groups]
    witness = tuple(
        f"goal {gd.source} -> {gd.dest_site} as {gd.dest_format}: no candidate has_data atom is relaxed-reachable"
        for gd, ok in zip(problem.instance.goals, goal_ok) if not ok
    )

    mentioned: set[int] = set()
    live_groups: dict[int, tuple[Conj, ...]] = {}

    def live_group(g: int) -> tuple[Conj, ...]:
        if g not in live_groups:
            live_groups[g] = tuple(c for c in problem.groups[g] if c <= reach)
        return live_groups[g]

    for a in keep_actions:
        mentioned |= a.pre | a.add | (a.neg & reach)
        for g in a.alts:
            for c in live_group(g):
                mentioned |= c
    for g in problem.goal_groups:
        for c in live_group(g):
            mentioned |= c
    kept_atoms = sorted(mentioned & reach)
    amap = {old: new for new, old in enumerate(kept_atoms)}

    touched = {problem.latency_slot}
    for a in keep_actions:
        touched.update(f for f, _ in a.num_pre)
        touched.update(f for f, _ in a.inc)
        touched.update(f for f, _ in a.assign)
    kept_fluents = sorted(touched)
    fmap = {old: new for new, old in enumerate(kept_fluents)}

    groups: list[tuple[Conj, ...]] = []
    gmap: dict[int, int] = {}

    def remap_group(g: int) -> int:
        if g not in gmap:
            gmap[g] = len(groups)
            groups.append(tuple(frozenset(amap[x] for x in c) for c in live_group(g)))
        return gmap[g]

    new_actions = []
    for a in keep_actions:
        new_actions.append(replace(
            a,
            index=len(new_actions),
            pre=frozenset(amap[x] for x in a.pre),
            neg=frozenset(amap[x] for x in a.neg if x in amap),
            alts=tuple(remap_group(g) for g in a.alts),
            num_pre=tuple((fmap[f], t) for f, t in a.num_pre),
            add=frozenset(amap[x] for x in a.add),
            inc=tuple((fmap[f], d) for f, d in a.inc),
            assign=tuple((fmap[f], v) for f, v in a.assign),
        ))
    goal_groups = tuple(remap_group(g) for g in problem.goal_groups)
    init = State(frozenset(amap[x] for x in problem.init.atoms if x in amap),
                 tuple(problem.init.values[f] for f in kept_fluents), problem.init.cost)
    atoms = [problem.atoms[x] for x in kept_atoms]
    f_pruned = sum(1 for a in atoms if a[0] in WORKFLOW_PREDICATES)
    stats = replace(problem.stats, F_pruned=f_pruned, X_pruned=len(kept_fluents), A_pruned=len(new_actions))
    pruned = GroundProblem(
        instance=problem.instance,
        atoms=atoms,
        fluents=[problem.fluents[f] for f in kept_fluents],
        groups=groups,
        actions=new_actions,
        init=init,
        goal_groups=goal_groups,
        latency_slot=fmap[problem.latency_slot],
        stats=stats,
        pruned=True,
    )
    return PruneResult(pruned, stats, bool(witness), witness)

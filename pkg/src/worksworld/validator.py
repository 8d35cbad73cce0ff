"""Independent plan checker.

Replays plan steps against a symbolic state rebuilt from the problem
instance (named atoms and named fluents), re-deriving every precondition and
metric from the action formulas rather than from the compiled ground actions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .grounding import ARITY, GroundProblem, fixed_charges, goal_candidates, static_facts
from .model import ComponentClass, DagVerdict, ProblemInstance, ResourceKind, workflow_dag_check
from .planner import Plan, PlanStep


class PlanParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class StepVerdict:
    index: int
    step: str
    ok: bool
    message: str = ""


@dataclass
class PlanReport:
    valid: bool
    steps: list[StepVerdict]
    first_failure: StepVerdict | None
    cost: Fraction
    latency: Fraction
    goal_satisfied: bool
    latency_ok: bool
    metrics_match: bool | None
    placements: dict[str, str]
    workflow_edges: list[tuple[str, str, str]]  # (upstream, downstream, link)
    dag: DagVerdict
    diagnostics: list[str] = field(default_factory=list)
    provenance: dict[str, list[str]] = field(default_factory=dict)  # data component -> sources held

    def to_kv(self) -> str:
        """Structured key-value rendering (one `key: value` per line)."""
        from .pddl import decimal

        lines = [
            f"valid: {str(self.valid).lower()}",
            f"steps: {len(self.steps)}",
            f"first_failure: {self.first_failure.index if self.first_failure else 'none'}",
        ]
        if self.first_failure:
            lines.append(f"failure_step: {self.first_failure.step}")
            lines.append(f"failure_reason: {self.first_failure.message}")
        lines += [
            f"cost: {decimal(self.cost)}",
            f"cost_exact: {self.cost}",
            f"latency: {decimal(self.latency)}",
            f"latency_exact: {self.latency}",
            f"goal_satisfied: {str(self.goal_satisfied).lower()}",
            f"latency_within_bound: {str(self.latency_ok).lower()}",
            f"metrics_match: {'n/a' if self.metrics_match is None else str(self.metrics_match).lower()}",
            f"dag_ok: {str(self.dag.ok).lower()}",
        ]
        for v in self.dag.violations:
            lines.append(f"dag_violation: {v}")
        for comp, iface in sorted(self.placements.items()):
            lines.append(f"placement: {comp} {iface}")
        for u, v, l in self.workflow_edges:
            lines.append(f"edge: {u} {v} {l}")
        for d in self.diagnostics:
            lines.append(f"diagnostic: {d}")
        return "\n".join(lines) + "\n"


class SymbolicState:
    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.atoms: set[tuple] = set(static_facts(inst))
        self.fl: dict[tuple, Fraction] = {}
        fl = self.fl
        charges = fixed_charges(inst)
        for i in inst.graph.interfaces:
            for r in set(i.total) | {i.resource}:
                fl[("resource_total", i.id, r.value)] = i.total.get(r, Fraction(0))
                fl[("resource_available", i.id, r.value)] = i.available.get(r, Fraction(0)) - charges.get((i.id, r), 0)
        for l in inst.graph.links:
            fl[("resource_total", l.id, "network")] = l.total_bw
            fl[("resource_available", l.id, "network")] = l.available_bw
            fl[("network_latency", l.id)] = l.latency
        for t in inst.component_types:
            if t.cls is ComponentClass.DATA:
                fl[("msg_size", t.id)] = t.msg_size
        for c in inst.components:
            for r in ResourceKind:
                if r in c.demand:
                    fl[("work_amount", c.id, r.value)] = c.demand[r]
            fl[("msg_max_rate", c.id)] = c.msg_max_rate
            for s in c.config_sites:
                self.atoms.add(("available_at", c.id, "config", s))
            if c.fixed and c.placement:
                self.atoms.add(("scheduled_on", c.id, c.placement))
                fl[("msg_actual_rate", c.id, c.placement)] = c.msg_max_rate
                if inst.component_class(c) is ComponentClass.DATA:
                    self.atoms.add(("has_data", c.id, c.placement, c.id, c.placement))
        for r in ResourceKind:
            fl[("work-cost-weight", r.value)] = inst.weight(r)
        fl[("total-cost",)] = Fraction(0)
        fl[("absolute-latency",)] = Fraction(0)

    def has(self, *atom) -> bool:
        return tuple(atom) in self.atoms

    def get(self, *name) -> Fraction:
        return self.fl.get(tuple(name), Fraction(0))


class StepFailure(Exception):
    pass


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise StepFailure(message)


def _apply(st: SymbolicState, schema: str, args: tuple[str, ...]) -> tuple[Fraction, Fraction]:
    """Check and apply one step in place; returns (cost delta, latency delta)."""
    inst = st.inst
    updates: dict[tuple, Fraction] = {}
    adds: list[tuple] = []
    cost = lat = Fraction(0)

    def bandwidth(link: str, bw: Fraction) -> None:
        avail = st.get("resource_available", link, "network")
        _need(avail - bw >= 0, f"resource_available < 0 on {link} ({avail} - {bw})")
        updates[("resource_available", link, "network")] = avail - bw

    if schema == "replicate_code":
        wc, sf, stt, link = args
        _need(st.has("available_at", wc, "config", sf), f"precondition available_at {wc} config {sf} missing")
        _need(not st.has("available_at", wc, "config", stt), f"config of {wc} already at {stt}")
        _need(st.has("linked", link, sf, stt), f"precondition linked {link} {sf} {stt} missing")
        adds.append(("available_at", wc, "config", stt))
        cost = st.get("work-cost-weight", "config") * st.get("work_amount", wc, "config") / st.get(
            "resource_total", link, "network")

    elif schema == "schedule_component":
        wc, r, iface, r2, site = args
        _need(not any(a[0] == "scheduled_on" and a[1] == wc for a in st.atoms), f"{wc} already scheduled")
        _need(not st.has("fixed", wc), f"{wc} is fixed")
        _need(st.has("available_at", iface, r2, site), f"precondition available_at {iface} {r2} {site} missing")
        _need(st.has("available_at", wc, "config", site), f"precondition available_at {wc} config {site} missing")
        _need(r == inst.component_class(wc).work_resource.value, f"{r} is not the work resource of {wc}")
        _need(r2 == r, f"{iface} offers {r2}, {wc} needs {r}")
        demand = st.get("work_amount", wc, r)
        avail = st.get("resource_available", iface, r)
        _need(avail - demand >= 0, f"resource_available < 0 on {iface} {r} ({avail} - {demand})")
        updates[("resource_available", iface, r)] = avail - demand
        updates[("msg_actual_rate", wc, iface)] = st.get("msg_max_rate", wc)
        adds.append(("scheduled_on", wc, iface))
        cost = st.get("work-cost-weight", r) * demand / st.get("resource_total", iface, r)
        lat = 1 / st.get("msg_max_rate", wc)

    elif schema in ("connect_direct_link", "connect_composite_link"):
        pc, dpi, sp, dc, dct, dsi, sd = args[:7]
        direction = args[-1]
        _need(direction in ("input", "output"), f"bad direction {direction}")
        _need(st.has("scheduled_on", pc, dpi), f"precondition scheduled_on {pc} {dpi} missing")
        _need(st.has("scheduled_on", dc, dsi), f"precondition scheduled_on {dc} {dsi} missing")
        _need(st.has("available_at", dpi, "compute", sp), f"{dpi} is not a processing interface at {sp}")
        _need(st.has("available_at", dsi, "storage", sd), f"{dsi} is not a sharing interface at {sd}")
        _need(st.has("type_of", dc, dct), f"precondition type_of {dc} {dct} missing")
        fmt = "input_format" if direction == "input" else "output_format"
        _need(st.has(fmt, pc, dct), f"precondition {fmt} {pc} {dct} missing")
        _need(not any(a[0] == "connected" and a[2:] == (pc, dpi, dc, dsi, direction) for a in st.atoms),
              f"{pc} {dpi} and {dc} {dsi} already connected ({direction})")
        bw = st.get("msg_max_rate", dc) * st.get("msg_size", dct)
        w = st.get("work-cost-weight", "network")
        if schema == "connect_direct_link":
            link = args[7]
            _need(st.has("linked", link, sp, sd), f"precondition linked {link} {sp} {sd} missing")
            _need(not any(a[0] == "link_uses" and a[1] == link for a in st.atoms), f"{link} is not direct")
            bandwidth(link, bw)
            cost = w * bw / st.get("resource_total", link, "network")
        else:
            link, h1, h2 = args[7:10]
            _need(st.has("linked", link, sp, sd), f"precondition linked {link} {sp} {sd} missing")
            _need(h1 != h2 and st.has("link_uses", link, h1) and st.has("link_uses", link, h2),
                  f"precondition link_uses {link} {h1}/{h2} missing")
            for x in (h1, h2, link):
                bandwidth(x, bw)
            cost = w * bw / st.get("resource_total", h1, "network") + w * bw / st.get("resource_total", h2, "network")
        adds.append(("connected", args[7], pc, dpi, dc, dsi, direction))
        lat = st.get("network_latency", args[7]) + 1 / st.get("msg_max_rate", dc)

    elif schema == "propagate_input":
        pc, dpi, dc, dsi, src, src_if = args
        _need(any(a[0] == "connected" and a[2:] == (pc, dpi, dc, dsi, "input") for a in st.atoms),
              f"precondition connected {pc} {dpi} {dc} {dsi} input missing")
        _need(st.has("has_data", dc, dsi, src, src_if), f"precondition has_data {dc} {dsi} {src} {src_if} missing")
        adds += [("has_input", pc, dpi), ("processed_by", dc, dsi, pc, dpi)]

    elif schema == "propagate_output":
        pc, dpi, dc, dsi, src, src_if = args
        _need(any(a[0] == "connected" and a[2:] == (pc, dpi, dc, dsi, "output") for a in st.atoms),
              f"precondition connected {pc} {dpi} {dc} {dsi} output missing")
        _need(st.has("has_input", pc, dpi), f"precondition has_input {pc} {dpi} missing")
        _need(any(a[0] == "processed_by" and a[3:] == (pc, dpi) and st.has("has_data", a[1], a[2], src, src_if)
                  for a in st.atoms),
              f"no recorded input of {src} {src_if} through {pc} {dpi}")
        adds.append(("has_data", dc, dsi, src, src_if))
    else:
        raise StepFailure(f"unknown schema {schema}")

    st.atoms.update(adds)
    st.fl.update(updates)
    st.fl[("total-cost",)] += cost
    st.fl[("absolute-latency",)] += lat
    return cost, lat


def validate(problem: GroundProblem, plan: Plan) -> PlanReport:
    """Replay `plan` on the unpruned problem; never raises for bad plans."""
    inst = problem.instance
    st = SymbolicState(inst)
    verdicts: list[StepVerdict] = []
    first = None
    diagnostics: list[str] = []
    for i, step in enumerate(plan.steps):
        if first is not None:
            verdicts.append(StepVerdict(i, step.name, False, "not executed"))
            continue
        if problem.find(step.schema, step.args) is None:
            first = StepVerdict(i, step.name, False, "unknown ground action")
            verdicts.append(first)
            continue
        try:
            c, l = _apply(st, step.schema, step.args)
        except StepFailure as exc:
            first = StepVerdict(i, step.name, False, str(exc))
            verdicts.append(first)
            continue
        if step.cost is not None and step.cost != c:
            diagnostics.append(f"step {i}: cost delta {step.cost} != recomputed {c}")
        if step.latency is not None and step.latency != l:
            diagnostics.append(f"step {i}: latency delta {step.latency} != recomputed {l}")
        verdicts.append(StepVerdict(i, step.name, True))

    cost = st.fl[("total-cost",)]
    latency = st.fl[("absolute-latency",)]
    goal_ok = all(
        any(st.has("has_data", dc, dsi, gd.source, inst.component(gd.source).placement)
            for dc, dsi in goal_candidates(inst, gd))
        for gd in inst.goals
    )
    latency_ok = latency <= inst.latency_bound
    metrics_match = None
    if plan.cost is not None or plan.latency is not None:
        metrics_match = (plan.cost is None or plan.cost == cost) and (plan.latency is None or plan.latency == latency)
        if not metrics_match:
            diagnostics.append(f"reported totals ({plan.cost}, {plan.latency}) != recomputed ({cost}, {latency})")

    placements = {a[1]: a[2] for a in st.atoms if a[0] == "scheduled_on"}
    edges = sorted(
        ((a[4], a[2], a[1]) if a[6] == "input" else (a[2], a[4], a[1]))
        for a in st.atoms if a[0] == "connected"
    )
    classes = {c.id: inst.component_class(c) for c in inst.components}
    dag = workflow_dag_check([(u, v) for u, v, _ in edges], classes)
    provenance: dict[str, list[str]] = {}
    for a in sorted(st.atoms):
        if a[0] == "has_data":
            provenance.setdefault(a[1], []).append(a[3])
    valid = (first is None and goal_ok and latency_ok and metrics_match is not False
             and not diagnostics and dag.ok)
    return PlanReport(valid, verdicts, first, cost, latency, goal_ok, latency_ok, metrics_match,
                      placements, edges, dag, diagnostics, provenance)


# ---------------------------------------------------------------------------
# plan text

_ACTION = re.compile(r"^(?:\d+(?:\.\d+)?\s*:\s*)?\(([^()]*)\)\s*(?:\[\d+(?:\.\d+)?\])?$")
_HEADER = re.compile(r";\s*(cost|latency)\s*=\s*(\S+)")


def _number(text: str) -> Fraction:
    return Fraction(text)


def format_plan(plan: Plan) -> str:
    from .pddl import exact_text

    lines = []
    if plan.cost is not None:
        lines.append(f"; cost = {exact_text(plan.cost)}")
    if plan.latency is not None:
        lines.append(f"; latency = {exact_text(plan.latency)}")
    lines += [s.name for s in plan.steps]
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> Plan:
    """Parse our plan format or ENHSP-style `t: (action args)` lines."""
    steps: list[PlanStep] = []
    totals: dict[str, Fraction] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(";"):
            m = _HEADER.match(line)
            if m:
                try:
                    totals[m.group(1)] = _number(m.group(2))
                except (ValueError, ZeroDivisionError):
                    raise PlanParseError(n, f"bad {m.group(1)} value {m.group(2)!r}") from None
            continue
        m = _ACTION.match(line)
        if not m:
            raise PlanParseError(n, f"malformed plan line {line!r}")
        parts = m.group(1).split()
        if not parts:
            raise PlanParseError(n, "empty action")
        schema, args = parts[0].lower(), tuple(parts[1:])
        if schema not in ARITY:
            raise PlanParseError(n, f"unknown action schema {schema!r}")
        if len(args) != ARITY[schema]:
            raise PlanParseError(n, f"{schema} expects {ARITY[schema]} arguments, got {len(args)}")
        steps.append(PlanStep(schema, args))
    return Plan(steps, totals.get("cost"), totals.get("latency"), "solved")

"""Pipeline runner, DOT rendering and CSV tables."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

from .grounding import GroundingStats, GroundProblem, ground, prune
from .model import ComponentClass, ProblemInstance
from .pddl import decimal, emit_domain, emit_problem, problem_filename
from .planner import Plan, PlanStep, SearchConfig, plan
from .validator import PlanReport, format_plan, validate

STATS_HEADER = ("problem", "F", "X", "A", "F_pruned", "X_pruned", "A_pruned")
METRICS_CSV_VERSION = 1
METRICS_HEADER = ("problem", "F", "X", "A", "F'", "X'", "A'", "ground_ms", "prune_ms", "search_ms",
                  "expansions", "plan_len", "cost", "latency", "status")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_UNSOLVABLE, EXIT_BUDGET = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# DOT


def _q(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attrs(**kw) -> str:
    return "[" + ", ".join(f"{k}={_q(v)}" for k, v in kw.items()) + "]"


def _unit_amounts(m: dict) -> str:
    units = {"storage": "MB", "config": "MB", "compute": "cores", "network": "MB/s"}
    return ", ".join(f"{r.value} {decimal(v)} {units[r.value]}" for r, v in m.items())


def render_dot(inst: ProblemInstance, report: PlanReport | None = None) -> str:
    """Sites as clusters, interfaces as nodes, links as edges; a report adds the placed workflow."""
    g = inst.graph
    lines = [f"digraph {_q(inst.name)} {{", '  graph [rankdir="LR", compound="true"];',
             '  node [fontname="Helvetica"];']
    placed: dict[str, list[str]] = {}
    if report is not None:
        for comp, iface in sorted(report.placements.items()):
            placed.setdefault(iface, []).append(comp)
    for s in g.sites:
        lines.append(f"  subgraph {_q('cluster_' + s.id)} {{")
        lines.append(f"    label={_q(s.id)};")
        lines.append(f"    {_q(s.id)} {_attrs(id='site:' + s.id, shape='point', style='invis')};")
        for i in g.interfaces:
            if i.site != s.id:
                continue
            label = i.id + "\\n" + _unit_amounts(i.total)
            lines.append(f"    {_q(i.id)} {_attrs(id='if:' + i.id, shape='box', label=label)};")
            for comp in placed.get(i.id, ()):
                c = inst.component(comp)
                shape = "cylinder" if inst.component_class(c) is ComponentClass.DATA else "ellipse"
                attrs = _attrs(id="wc:" + comp, shape=shape, label=comp + "\\n" + c.type)
                lines.append(f"    {_q(comp)} {attrs};")
        lines.append("  }")
    for l in g.links:
        a, b = l.endpoints
        label = f"{l.id}\\n{decimal(l.total_bw)} MB/s, {decimal(l.latency)} s"
        style = "solid" if l.kind.value == "direct" else "dashed"
        lines.append(f"  {_q(a)} -> {_q(b)} {_attrs(id='link:' + l.id, dir='none', style=style, label=label)};")
    if report is not None:
        for comp, iface in sorted(report.placements.items()):
            lines.append(f"  {_q(comp)} -> {_q(iface)} {_attrs(id='place:' + comp, style='dotted', arrowhead='none')};")
        for u, v, link in report.workflow_edges:
            label = link
            if v in report.provenance:
                label += "\\ndata of " + " ".join(report.provenance[v])
            attrs = _attrs(id=f"flow:{u}:{v}", color="blue", label=label)
            lines.append(f"  {_q(u)} -> {_q(v)} {attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV


def stats_rows(named: list[tuple[str, GroundingStats]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for name, st in named:
        w.writerow((name, *st.row()))
    return buf.getvalue()


@dataclass
class PipelineResult:
    problem: str
    stats: GroundingStats
    ground_ms: float = 0.0
    prune_ms: float = 0.0
    search_ms: float = 0.0
    plan: Plan | None = None
    report: PlanReport | None = None
    status: str = "solved"
    witness: tuple[str, ...] = ()
    exit_code: int = EXIT_OK
    files: list[Path] = field(default_factory=list)

    def metrics_row(self, timings: bool = True) -> tuple:
        p, st = self.plan, self.stats
        solved = p is not None and p.status == "solved"
        ms = (lambda v: f"{v:.1f}") if timings else (lambda v: "0")
        return (
            self.problem, st.F, st.X, st.A, st.F_pruned, st.X_pruned, st.A_pruned,
            ms(self.ground_ms), ms(self.prune_ms), ms(self.search_ms),
            p.expansions if p else 0, len(p.steps) if solved else "",
            decimal(p.cost) if solved else "", decimal(p.latency) if solved else "", self.status,
        )


def metrics_csv(results: list[PipelineResult], timings: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for r in results:
        w.writerow(r.metrics_row(timings))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# pipeline


def write_pddl(inst: ProblemInstance, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    dom, prob = out / "domain.pddl", out / problem_filename(inst)
    dom.write_text(emit_domain())
    prob.write_text(emit_problem(inst))
    return [dom, prob]


def solve(inst: ProblemInstance, cfg: SearchConfig) -> PipelineResult:
    """Ground, prune, search and validate; no file output."""
    t0 = time.perf_counter()
    full: GroundProblem = ground(inst)
    t1 = time.perf_counter()
    pruned = prune(full)
    t2 = time.perf_counter()
    res = PipelineResult(inst.name, pruned.stats, ground_ms=(t1 - t0) * 1e3, prune_ms=(t2 - t1) * 1e3)
    if pruned.unsolvable:
        res.status, res.witness, res.exit_code = "unsolvable", pruned.witness, EXIT_UNSOLVABLE
        res.plan = Plan([], None, None, "unsolvable", reason="goal unreachable under relaxation")
        return res
    found = plan(pruned.problem, cfg)
    res.search_ms = (time.perf_counter() - t2) * 1e3
    res.plan = found
    res.status = found.status
    if found.status == "unsolvable":
        res.exit_code = EXIT_UNSOLVABLE
        return res
    if found.status == "budget-exhausted":
        res.exit_code = EXIT_BUDGET
        return res
    # re-check on the unpruned problem with the independent checker
    res.report = validate(full, Plan([PlanStep(s.schema, s.args) for s in found.steps],
                                     found.cost, found.latency, "solved"))
    if not res.report.valid:
        res.status, res.exit_code = "invalid", EXIT_INVALID
    return res


def run_pipeline(inst: ProblemInstance, cfg: SearchConfig, out: Path, dot: bool = False,
                 timings: bool = True) -> PipelineResult:
    """Run the full pipeline and write its artifacts into `out`."""
    out.mkdir(parents=True, exist_ok=True)
    res = solve(inst, cfg)
    stem = inst.name
    if res.plan is not None and res.plan.status == "solved":
        path = out / f"{stem}.plan"
        path.write_text(format_plan(res.plan))
        res.files.append(path)
    lines = [f"problem: {stem}", f"status: {res.status}"]
    if res.plan is not None and res.plan.reason:
        lines.append(f"reason: {res.plan.reason}")
    lines += [f"witness: {w}" for w in res.witness]
    text = "\n".join(lines) + "\n"
    if res.report is not None:
        text += res.report.to_kv()
    path = out / f"{stem}.report.txt"
    path.write_text(text)
    res.files.append(path)
    path = out / "metrics.csv"
    path.write_text(metrics_csv([res], timings))
    res.files.append(path)
    if dot:
        path = out / f"{stem}.initial.dot"
        path.write_text(render_dot(inst))
        res.files.append(path)
        if res.report is not None:
            path = out / f"{stem}.result.dot"
            path.write_text(render_dot(inst, res.report))
            res.files.append(path)
    return res

"""In-memory model of the resource graph, the workflow catalog and goal demands.

All quantities are exact rationals in normalized units: MB for storage and
config sizes, MB/s for bandwidth, seconds for latency, messages/s for rates,
cores for compute.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping


class ResourceKind(str, Enum):
    COMPUTE = "compute"
    STORAGE = "storage"
    NETWORK = "network"
    CONFIG = "config"


class InterfaceKind(str, Enum):
    DATA_SHARING = "data-sharing"
    DATA_PROCESSING = "data-processing"

    @property
    def resource(self) -> ResourceKind:
        return ResourceKind.STORAGE if self is InterfaceKind.DATA_SHARING else ResourceKind.COMPUTE


class LinkKind(str, Enum):
    DIRECT = "direct"
    COMPOSITE = "composite"


class ComponentClass(str, Enum):
    DATA = "data"
    PROCESSING = "processing"

    @property
    def work_resource(self) -> ResourceKind:
        return ResourceKind.STORAGE if self is ComponentClass.DATA else ResourceKind.COMPUTE

    @property
    def interface_kind(self) -> InterfaceKind:
        if self is ComponentClass.DATA:
            return InterfaceKind.DATA_SHARING
        return InterfaceKind.DATA_PROCESSING


@dataclass(frozen=True)
class Site:
    id: str
    annotations: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Interface:
    id: str
    site: str
    kind: InterfaceKind
    total: dict[ResourceKind, Fraction]
    available: dict[ResourceKind, Fraction]
    annotations: dict[str, str] = field(default_factory=dict)

    @property
    def resource(self) -> ResourceKind:
        return self.kind.resource


@dataclass(frozen=True)
class Link:
    id: str
    kind: LinkKind
    endpoints: tuple[str, str]
    total_bw: Fraction
    available_bw: Fraction
    latency: Fraction
    hops: tuple[str, ...] = ()

    def joins(self, a: str, b: str) -> bool:
        return {a, b} == set(self.endpoints) if a != b else self.endpoints == (a, a)

    @property
    def intrasite(self) -> bool:
        return self.endpoints[0] == self.endpoints[1]


@dataclass(frozen=True)
class ComponentType:
    id: str
    cls: ComponentClass
    msg_size: Fraction | None = None
    input_format: str | None = None
    output_format: str | None = None


@dataclass(frozen=True)
class WorkflowComponent:
    id: str
    type: str
    demand: dict[ResourceKind, Fraction]
    msg_max_rate: Fraction
    config_sites: frozenset[str] = frozenset()
    fixed: bool = False
    placement: str | None = None


@dataclass(frozen=True)
class GoalDemand:
    source: str
    dest_site: str
    dest_format: str


@dataclass(frozen=True)
class ResourceGraph:
    sites: tuple[Site, ...]
    interfaces: tuple[Interface, ...]
    links: tuple[Link, ...]

    def site(self, site_id: str) -> Site:
        for s in self.sites:
            if s.id == site_id:
                return s
        raise KeyError(f"unknown site {site_id!r}")

    def interface(self, if_id: str) -> Interface:
        return {i.id: i for i in self.interfaces}[if_id]

    def link(self, link_id: str) -> Link:
        return {l.id: l for l in self.links}[link_id]

    def links_between(self, a: str, b: str) -> list[Link]:
        return [l for l in self.links if l.joins(a, b)]


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    graph: ResourceGraph
    component_types: tuple[ComponentType, ...]
    components: tuple[WorkflowComponent, ...]
    goals: tuple[GoalDemand, ...]
    latency_bound: Fraction
    cost_weights: dict[ResourceKind, Fraction] = field(
        default_factory=lambda: {r: Fraction(1) for r in ResourceKind}
    )

    # lookups -------------------------------------------------------------
    def ctype(self, type_id: str) -> ComponentType:
        for t in self.component_types:
            if t.id == type_id:
                return t
        raise KeyError(f"unknown component type {type_id!r}")

    def component(self, comp_id: str) -> WorkflowComponent:
        for c in self.components:
            if c.id == comp_id:
                return c
        raise KeyError(f"unknown component {comp_id!r}")

    def component_class(self, comp: WorkflowComponent | str) -> ComponentClass:
        if isinstance(comp, str):
            comp = self.component(comp)
        return self.ctype(comp.type).cls

    def weight(self, r: ResourceKind) -> Fraction:
        return self.cost_weights.get(r, Fraction(1))

    def stream_bandwidth(self, data_component: str) -> Fraction:
        """Bandwidth a stream through this data component permanently consumes."""
        comp = self.component(data_component)
        return comp.msg_max_rate * self.ctype(comp.type).msg_size

    def edge_bandwidth_by_type(self) -> dict[tuple[str, str], Fraction]:
        """msg_max_rate x msg_size for every (data component, its data type)."""
        out = {}
        for c in self.components:
            t = self.ctype(c.type)
            if t.cls is ComponentClass.DATA:
                out[(c.id, t.id)] = c.msg_max_rate * t.msg_size
        return out


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Diagnostic:
    invariant: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.invariant}: {self.message}"


def _dupes(ids: Iterable[str]) -> list[str]:
    seen, dup = set(), []
    for i in ids:
        if i in seen:
            dup.append(i)
        seen.add(i)
    return dup


def validate_model(inst: ProblemInstance) -> list[Diagnostic]:
    """Check every structural invariant; returns diagnostics instead of raising."""
    out: list[Diagnostic] = []

    def bad(inv: str, subj: str, msg: str) -> None:
        out.append(Diagnostic(inv, subj, msg))

    try:
        g = inst.graph
        site_ids = {s.id for s in g.sites}
        for d in _dupes([s.id for s in g.sites]):
            bad("unique-id", d, "duplicate site id")
        for d in _dupes([i.id for i in g.interfaces] + [l.id for l in g.links]):
            bad("unique-id", d, "duplicate interface/link id")
        for d in _dupes([c.id for c in inst.components] + [t.id for t in inst.component_types]):
            bad("unique-id", d, "duplicate component/type id")

        for i in g.interfaces:
            if i.site not in site_ids:
                bad("interface-site", i.id, f"unknown site {i.site!r}")
            if i.total.get(i.resource, 0) <= 0:
                bad("interface-capacity", i.id, f"{i.kind.value} interface needs positive {i.resource.value}")
            for r in set(i.total) | set(i.available):
                tot, av = i.total.get(r, Fraction(0)), i.available.get(r, Fraction(0))
                if not (0 <= av <= tot):
                    bad("available-within-total", i.id, f"{r.value}: available {av} not in [0, {tot}]")

        links = {l.id: l for l in g.links}
        for l in g.links:
            for s in l.endpoints:
                if s not in site_ids:
                    bad("link-endpoint", l.id, f"unknown site {s!r}")
            if not (0 <= l.available_bw <= l.total_bw):
                bad("available-within-total", l.id, f"bandwidth {l.available_bw} not in [0, {l.total_bw}]")
            if l.total_bw <= 0:
                bad("link-capacity", l.id, "total bandwidth must be positive")
            if l.latency < 0:
                bad("link-latency", l.id, "negative latency")
            if l.kind is LinkKind.DIRECT and l.hops:
                bad("link-hops", l.id, "direct link must not have hops")
            if l.kind is LinkKind.COMPOSITE:
                if len(l.hops) != 2:
                    bad("link-hops", l.id, f"composite link needs exactly 2 hops, got {len(l.hops)}")
                elif not all(h in links and links[h].kind is LinkKind.DIRECT for h in l.hops):
                    bad("link-hops", l.id, "hops must be existing direct links")
                elif not _hops_chain(links[l.hops[0]], links[l.hops[1]], l.endpoints):
                    bad("link-hops", l.id, "hops do not connect the endpoints through one intermediate site")

        types = {t.id: t for t in inst.component_types}
        for t in inst.component_types:
            if t.cls is ComponentClass.DATA:
                if t.msg_size is None or t.msg_size <= 0:
                    bad("msg-size", t.id, "data type needs msg_size > 0")
            else:
                for fmt in (t.input_format, t.output_format):
                    if fmt not in types or types[fmt].cls is not ComponentClass.DATA:
                        bad("format-ref", t.id, f"format {fmt!r} is not a data type")

        ifaces = {i.id: i for i in g.interfaces}
        for c in inst.components:
            t = types.get(c.type)
            if t is None:
                bad("type-ref", c.id, f"unknown type {c.type!r}")
                continue
            if c.msg_max_rate <= 0:
                bad("msg-rate", c.id, "msg_max_rate must be positive")
            for r, v in c.demand.items():
                if v < 0:
                    bad("demand", c.id, f"negative {r.value} demand")
            if t.cls is ComponentClass.DATA and c.demand.get(ResourceKind.COMPUTE, 0) > 0:
                bad("demand-class", c.id, "data component with compute demand")
            if t.cls is ComponentClass.PROCESSING and c.demand.get(ResourceKind.STORAGE, 0) > 0:
                bad("demand-class", c.id, "processing component with storage demand")
            for s in c.config_sites:
                if s not in site_ids:
                    bad("config-site", c.id, f"unknown site {s!r}")
            if c.fixed and c.placement is None:
                bad("fixed-placement", c.id, "fixed component needs a placement")
            if c.placement is not None:
                if not c.fixed:
                    bad("fixed-placement", c.id, "only fixed components carry a placement")
                iface = ifaces.get(c.placement)
                if iface is None:
                    bad("fixed-placement", c.id, f"unknown interface {c.placement!r}")
                elif iface.kind is not t.cls.interface_kind:
                    bad("fixed-placement", c.id, "placement interface has the wrong kind")

        # fixed placements are charged against the initial availability
        charge: dict[tuple[str, ResourceKind], Fraction] = {}
        for c in inst.components:
            if c.fixed and c.placement in ifaces and c.type in types:
                r = types[c.type].cls.work_resource
                charge[(c.placement, r)] = charge.get((c.placement, r), 0) + c.demand.get(r, 0)
        for (if_id, r), amount in charge.items():
            if ifaces[if_id].available.get(r, 0) < amount:
                bad("fixed-placement", if_id, f"fixed components exceed available {r.value}")

        comps = {c.id: c for c in inst.components}
        for gd in inst.goals:
            src = comps.get(gd.source)
            if src is None or not src.fixed or src.type not in types or types[src.type].cls is not ComponentClass.DATA:
                bad("goal-source", gd.source, "goal source must be a fixed data component")
            if gd.dest_site not in site_ids:
                bad("goal-site", gd.source, f"unknown destination site {gd.dest_site!r}")
            if gd.dest_format not in types or types[gd.dest_format].cls is not ComponentClass.DATA:
                bad("goal-format", gd.source, f"{gd.dest_format!r} is not a data type")
        if inst.latency_bound <= 0:
            bad("latency-bound", inst.name, "latency bound must be positive")
        for r, w in inst.cost_weights.items():
            if w < 0:
                bad("cost-weight", r.value, "negative cost weight")
    except Exception as exc:  # malformed but well-typed input must not abort
        bad("well-formed", inst.name, f"{type(exc).__name__}: {exc}")
    return out


def _hops_chain(h1: Link, h2: Link, endpoints: tuple[str, str]) -> bool:
    a, b = endpoints
    for x, y in ((h1, h2), (h2, h1)):
        for mid in set(x.endpoints) & set(y.endpoints):
            if mid in (a, b):
                continue
            if x.joins(a, mid) and y.joins(mid, b):
                return True
    return False


def peers(inst: ProblemInstance, site: str) -> set[str]:
    """Sites reachable from `site` over one logical (direct or composite) link."""
    inst.graph.site(site)
    out = set()
    for l in inst.graph.links:
        a, b = l.endpoints
        if a == site:
            out.add(b)
        if b == site:
            out.add(a)
    return out


# ---------------------------------------------------------------------------
# workflow DAG check

@dataclass(frozen=True)
class DagVerdict:
    ok: bool
    violations: tuple[str, ...] = ()


def workflow_dag_check(
    edges: Iterable[tuple[str, str]], classes: Mapping[str, ComponentClass]
) -> DagVerdict:
    """Check alternation, acyclicity and data endpoints of a built workflow.

    `edges` are directed (upstream, downstream) node pairs; `classes` maps each
    node to its component class.
    """
    edges = sorted(set(edges))
    problems: list[str] = []
    for u, v in edges:
        if classes[u] is classes[v]:
            problems.append(f"class alternation: {u} -> {v}")
    nodes = sorted({n for e in edges for n in e})
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    indeg = {n: 0 for n in nodes}
    outdeg = {n: 0 for n in nodes}
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
        outdeg[u] += 1
    # Kahn
    queue = [n for n in nodes if indeg[n] == 0]
    remaining = dict(indeg)
    seen = 0
    while queue:
        n = queue.pop()
        seen += 1
        for m in succ[n]:
            remaining[m] -= 1
            if remaining[m] == 0:
                queue.append(m)
    if seen != len(nodes):
        problems.append("cycle in workflow graph")
    for n in nodes:
        if classes[n] is ComponentClass.PROCESSING:
            if indeg[n] == 0:
                problems.append(f"must start with data component: {n}")
            if outdeg[n] == 0:
                problems.append(f"must end with data component: {n}")
    return DagVerdict(not problems, tuple(problems))

"""PDDL 2.1 (level 2) domain/problem emission and a reader for the emitted subset."""
from __future__ import annotations

import re
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

from .grounding import GroundProblem, fixed_charges, goal_candidates, ground
from .model import (
    ComponentClass,
    ComponentType,
    GoalDemand,
    Interface,
    InterfaceKind,
    Link,
    LinkKind,
    ProblemInstance,
    ResourceGraph,
    ResourceKind,
    Site,
    WorkflowComponent,
)

DOMAIN_NAME = "worksworld"
PREDICATES = ("available_at", "scheduled_on", "type_of", "fixed", "linked", "link_uses", "connected",
              "has_input", "input_format", "output_format", "processed_by", "has_data")
FUNCTIONS = ("resource_total", "resource_available", "work_amount", "msg_max_rate", "msg_actual_rate",
             "msg_size", "network_latency", "work-cost-weight", "total-cost", "absolute-latency")
ACTIONS = ("replicate_code", "schedule_component", "connect_direct_link", "connect_composite_link",
           "propagate_input", "propagate_output")
TYPES = ("Instance", "Site", "Resource", "Descriptor", "Link", "Interface", "WC", "DL", "CL", "DSI", "DPI",
         "DC", "PC", "WCT", "DIR", "DCT", "PCT")


class PddlError(ValueError):
    pass


def decimal(q: Fraction) -> str:
    """At most six fractional digits, trailing zeros trimmed."""
    d = (Decimal(q.numerator) / Decimal(q.denominator)).quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def exact_text(q: Fraction) -> str:
    """Exact decimal when the rational terminates, otherwise p/q."""
    den = q.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    text = format(Decimal(q.numerator) / Decimal(q.denominator), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


BW = "(* (msg_max_rate ?dc) (msg_size ?dct))"

DOMAIN = f"""(define (domain {DOMAIN_NAME})
  (:requirements :typing :negative-preconditions :disjunctive-preconditions :equality
                 :existential-preconditions :universal-preconditions :numeric-fluents)
  (:types
    Instance Site Resource Descriptor - object
    Link Interface WC - Instance
    DL CL - Link
    DSI DPI - Interface
    DC PC - WC
    WCT DIR - Descriptor
    DCT PCT - WCT)
  (:constants
    storage compute network config - Resource
    input output - DIR)
  (:predicates
    (available_at ?i - Instance ?r - Resource ?s - Site)
    (scheduled_on ?wc - WC ?if - Interface)
    (type_of ?wc - WC ?t - WCT)
    (fixed ?wc - WC)
    (linked ?l - Link ?a - Site ?b - Site)
    (link_uses ?cl - CL ?dl - DL)
    (connected ?l - Link ?pc - PC ?dpi - DPI ?dc - DC ?dsi - DSI ?dir - DIR)
    (has_input ?wc - WC ?if - Interface)
    (input_format ?pc - PC ?t - DCT)
    (output_format ?pc - PC ?t - DCT)
    (processed_by ?dc - DC ?dsi - DSI ?pc - PC ?dpi - DPI)
    (has_data ?a - DC ?b - DSI ?c - DC ?d - DSI))
  (:functions
    (resource_total ?i - Instance ?r - Resource)
    (resource_available ?i - Instance ?r - Resource)
    (work_amount ?wc - WC ?r - Resource)
    (msg_max_rate ?wc - WC)
    (msg_actual_rate ?wc - WC ?if - Interface)
    (msg_size ?t - DCT)
    (network_latency ?l - Link)
    (work-cost-weight ?r - Resource)
    (total-cost)
    (absolute-latency))

  (:action replicate_code
    :parameters (?wc - WC ?from - Site ?to - Site ?l - Link)
    :precondition (and (available_at ?wc config ?from)
                       (not (available_at ?wc config ?to))
                       (linked ?l ?from ?to)
                       (not (= ?from ?to)))
    :effect (and (available_at ?wc config ?to)
                 (increase (total-cost)
                           (/ (* (work-cost-weight config) (work_amount ?wc config))
                              (resource_total ?l network)))))

  (:action schedule_component
    :parameters (?wc - WC ?r - Resource ?if - Interface ?r2 - Resource ?s - Site)
    :precondition (and (not (fixed ?wc))
                       (forall (?i - Interface) (not (scheduled_on ?wc ?i)))
                       (available_at ?if ?r2 ?s)
                       (available_at ?wc config ?s)
                       (or (and (= ?r compute) (= ?r2 compute) (exists (?t - PCT) (type_of ?wc ?t)))
                           (and (= ?r storage) (= ?r2 storage) (exists (?t - DCT) (type_of ?wc ?t))))
                       (>= (resource_available ?if ?r) (work_amount ?wc ?r)))
    :effect (and (scheduled_on ?wc ?if)
                 (decrease (resource_available ?if ?r) (work_amount ?wc ?r))
                 (assign (msg_actual_rate ?wc ?if) (msg_max_rate ?wc))
                 (increase (total-cost)
                           (/ (* (work-cost-weight ?r) (work_amount ?wc ?r)) (resource_total ?if ?r)))
                 (increase (absolute-latency) (/ 1 (msg_max_rate ?wc)))))

  (:action connect_direct_link
    :parameters (?pc - PC ?dpi - DPI ?sp - Site ?dc - DC ?dct - DCT ?dsi - DSI ?sd - Site ?dl - DL ?dir - DIR)
    :precondition (and (scheduled_on ?pc ?dpi)
                       (scheduled_on ?dc ?dsi)
                       (available_at ?dpi compute ?sp)
                       (available_at ?dsi storage ?sd)
                       (type_of ?dc ?dct)
                       (linked ?dl ?sp ?sd)
                       (or (and (= ?dir input) (input_format ?pc ?dct))
                           (and (= ?dir output) (output_format ?pc ?dct)))
                       (forall (?l - Link) (not (connected ?l ?pc ?dpi ?dc ?dsi ?dir)))
                       (>= (resource_available ?dl network) {BW}))
    :effect (and (connected ?dl ?pc ?dpi ?dc ?dsi ?dir)
                 (decrease (resource_available ?dl network) {BW})
                 (increase (total-cost)
                           (/ (* (work-cost-weight network) {BW}) (resource_total ?dl network)))
                 (increase (absolute-latency) (+ (network_latency ?dl) (/ 1 (msg_max_rate ?dc))))))

  (:action connect_composite_link
    :parameters (?pc - PC ?dpi - DPI ?sp - Site ?dc - DC ?dct - DCT ?dsi - DSI ?sd - Site
                 ?cl - CL ?dl1 - DL ?dl2 - DL ?dir - DIR)
    :precondition (and (scheduled_on ?pc ?dpi)
                       (scheduled_on ?dc ?dsi)
                       (available_at ?dpi compute ?sp)
                       (available_at ?dsi storage ?sd)
                       (type_of ?dc ?dct)
                       (linked ?cl ?sp ?sd)
                       (link_uses ?cl ?dl1)
                       (link_uses ?cl ?dl2)
                       (not (= ?dl1 ?dl2))
                       (or (and (= ?dir input) (input_format ?pc ?dct))
                           (and (= ?dir output) (output_format ?pc ?dct)))
                       (forall (?l - Link) (not (connected ?l ?pc ?dpi ?dc ?dsi ?dir)))
                       (>= (resource_available ?dl1 network) {BW})
                       (>= (resource_available ?dl2 network) {BW})
                       (>= (resource_available ?cl network) {BW}))
    :effect (and (connected ?cl ?pc ?dpi ?dc ?dsi ?dir)
                 (decrease (resource_available ?dl1 network) {BW})
                 (decrease (resource_available ?dl2 network) {BW})
                 (decrease (resource_available ?cl network) {BW})
                 (increase (total-cost)
                           (+ (/ (* (work-cost-weight network) {BW}) (resource_total ?dl1 network))
                              (/ (* (work-cost-weight network) {BW}) (resource_total ?dl2 network))))
                 (increase (absolute-latency) (+ (network_latency ?cl) (/ 1 (msg_max_rate ?dc))))))

  (:action propagate_input
    :parameters (?pc - PC ?dpi - DPI ?dc - DC ?dsi - DSI ?src - DC ?srcif - DSI)
    :precondition (and (exists (?l - Link) (connected ?l ?pc ?dpi ?dc ?dsi input))
                       (has_data ?dc ?dsi ?src ?srcif))
    :effect (and (has_input ?pc ?dpi)
                 (processed_by ?dc ?dsi ?pc ?dpi)))

  (:action propagate_output
    :parameters (?pc - PC ?dpi - DPI ?dc - DC ?dsi - DSI ?src - DC ?srcif - DSI)
    :precondition (and (exists (?l - Link) (connected ?l ?pc ?dpi ?dc ?dsi output))
                       (has_input ?pc ?dpi)
                       (exists (?in - DC ?inif - DSI)
                               (and (processed_by ?in ?inif ?pc ?dpi) (has_data ?in ?inif ?src ?srcif))))
    :effect (has_data ?dc ?dsi ?src ?srcif))
)
"""


def emit_domain() -> str:
    return DOMAIN


# ---------------------------------------------------------------------------
# problem


def _sexpr(*parts: str) -> str:
    return "(" + " ".join(parts) + ")"


def problem_init(inst: ProblemInstance) -> tuple[list[str], list[str]]:
    """Initial atoms and fluent assignments, in emission order."""
    atoms: list[str] = []
    fluents: list[str] = []

    def fl(name: str, args: tuple[str, ...], value: Fraction) -> None:
        fluents.append(f"(= {_sexpr(name, *args)} {decimal(value)})")

    charges = fixed_charges(inst)
    for i in inst.graph.interfaces:
        atoms.append(_sexpr("available_at", i.id, i.resource.value, i.site))
        for r in ResourceKind:
            if r in i.total or r is i.resource:
                fl("resource_total", (i.id, r.value), i.total.get(r, Fraction(0)))
                fl("resource_available", (i.id, r.value), i.available.get(r, Fraction(0)) - charges.get((i.id, r), 0))
    for l in inst.graph.links:
        a, b = l.endpoints
        atoms.append(_sexpr("linked", l.id, a, b))
        if a != b:
            atoms.append(_sexpr("linked", l.id, b, a))
        for h in l.hops:
            atoms.append(_sexpr("link_uses", l.id, h))
        fl("resource_total", (l.id, "network"), l.total_bw)
        fl("resource_available", (l.id, "network"), l.available_bw)
        fl("network_latency", (l.id,), l.latency)
    for t in inst.component_types:
        if t.cls is ComponentClass.DATA:
            fl("msg_size", (t.id,), t.msg_size)
    for c in inst.components:
        t = inst.ctype(c.type)
        atoms.append(_sexpr("type_of", c.id, c.type))
        if c.fixed:
            atoms.append(_sexpr("fixed", c.id))
        for s in sorted(c.config_sites):
            atoms.append(_sexpr("available_at", c.id, "config", s))
        if t.cls is ComponentClass.PROCESSING:
            atoms.append(_sexpr("input_format", c.id, t.input_format))
            atoms.append(_sexpr("output_format", c.id, t.output_format))
        work = t.cls.work_resource
        fl("work_amount", (c.id, work.value), c.demand.get(work, Fraction(0)))
        fl("work_amount", (c.id, "config"), c.demand.get(ResourceKind.CONFIG, Fraction(0)))
        fl("msg_max_rate", (c.id,), c.msg_max_rate)
        if c.fixed and c.placement is not None:
            atoms.append(_sexpr("scheduled_on", c.id, c.placement))
            fl("msg_actual_rate", (c.id, c.placement), c.msg_max_rate)
            if t.cls is ComponentClass.DATA:
                atoms.append(_sexpr("has_data", c.id, c.placement, c.id, c.placement))
    for r in ResourceKind:
        fl("work-cost-weight", (r.value,), inst.weight(r))
    fl("total-cost", (), Fraction(0))
    fl("absolute-latency", (), Fraction(0))
    return atoms, fluents


def declared_counts(inst: ProblemInstance) -> tuple[int, int]:
    """(initial atoms, initial fluent assignments) an instance declares."""
    atoms, fluents = problem_init(inst)
    return len(set(atoms)), len(fluents)


def emit_problem(inst: ProblemInstance) -> str:
    g = inst.graph
    by_type: dict[str, list[str]] = {t: [] for t in ("Site", "DSI", "DPI", "DL", "CL", "DC", "PC", "DCT", "PCT")}
    by_type["Site"] = [s.id for s in g.sites]
    for i in g.interfaces:
        by_type["DSI" if i.kind is InterfaceKind.DATA_SHARING else "DPI"].append(i.id)
    for l in g.links:
        by_type["DL" if l.kind is LinkKind.DIRECT else "CL"].append(l.id)
    for c in inst.components:
        by_type["DC" if inst.component_class(c) is ComponentClass.DATA else "PC"].append(c.id)
    for t in inst.component_types:
        by_type["DCT" if t.cls is ComponentClass.DATA else "PCT"].append(t.id)

    out = [f"(define (problem {inst.name})", f"  (:domain {DOMAIN_NAME})"]
    for t in inst.component_types:
        if t.cls is ComponentClass.PROCESSING:
            out.append(f"  ;; processing-type {t.id} {t.input_format} {t.output_format}")
    out.append("  (:objects")
    for t, ids in by_type.items():
        if ids:
            out.append(f"    {' '.join(ids)} - {t}")
    out.append("  )")
    atoms, fluents = problem_init(inst)
    out.append("  (:init")
    out += [f"    {a}" for a in atoms]
    out += [f"    {f}" for f in fluents]
    out.append("  )")
    out.append("  (:goal (and")
    for gd in inst.goals:
        out.append(f"    ;; goal {gd.source} {gd.dest_site} {gd.dest_format}")
        src_if = inst.component(gd.source).placement
        disj = [_sexpr("has_data", dc, dsi, gd.source, src_if or "?") for dc, dsi in goal_candidates(inst, gd)]
        out.append("    (or" + "".join(" " + d for d in disj) + ")")
    out.append(f"    (<= (absolute-latency) {decimal(inst.latency_bound)})))")
    out.append("  (:metric minimize (total-cost))")
    out.append(")")
    return "\n".join(out) + "\n"


def problem_filename(inst: ProblemInstance) -> str:
    return f"{inst.name}.problem.pddl"


# ---------------------------------------------------------------------------
# reader

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_UNSUPPORTED = {
    ":durative-action": "durative action",
    ":derived": "derived predicate",
    ":constraints": "constraints",
    "when": "conditional effect",
    "preference": "preference",
    ":process": "process",
    ":event": "event",
}


def _strip_comments(text: str) -> tuple[str, list[str]]:
    notes, lines = [], []
    for line in text.splitlines():
        if ";" in line:
            head, _, tail = line.partition(";")
            if tail.startswith(";"):
                notes.append(tail[1:].strip())
            line = head
        lines.append(line)
    return "\n".join(lines), notes


def parse_sexpr(text: str):
    tokens = _TOKEN.findall(text)
    stack: list[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise PddlError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok.lower() if tok.startswith(":") else tok)
    if len(stack) != 1 or len(stack[0]) != 1:
        raise PddlError("unbalanced parentheses or trailing content")
    return stack[0][0]


def _walk(tree):
    yield tree
    if isinstance(tree, list):
        for x in tree:
            yield from _walk(x)


def _check_supported(tree) -> None:
    for node in _walk(tree):
        if isinstance(node, str) and node.lower() in _UNSUPPORTED:
            raise PddlError(f"unsupported construct: {_UNSUPPORTED[node.lower()]}")


def _section(tree, key: str):
    for part in tree[2:]:
        if isinstance(part, list) and part and part[0] == key:
            return part
    return None


def read_domain(text: str) -> dict[str, set[str]]:
    """Parse a domain and check it is the workflow domain; returns its name sets."""
    body, _ = _strip_comments(text)
    tree = parse_sexpr(body)
    _check_supported(tree)
    if not (isinstance(tree, list) and tree[0].lower() == "define" and tree[1][0].lower() == "domain"):
        raise PddlError("not a domain definition")
    if tree[1][1].lower() != DOMAIN_NAME:
        raise PddlError(f"unexpected domain {tree[1][1]!r}")
    preds = {p[0].lower() for p in (_section(tree, ":predicates") or [])[1:]}
    funcs = {f[0].lower() for f in (_section(tree, ":functions") or [])[1:] if isinstance(f, list)}
    actions = {p[1].lower() for p in tree[2:] if isinstance(p, list) and p and p[0] == ":action"}
    names = {"predicates": preds, "functions": funcs, "actions": actions}
    expected = {"predicates": set(PREDICATES), "functions": set(FUNCTIONS), "actions": set(ACTIONS)}
    for k in names:
        if names[k] != expected[k]:
            raise PddlError(f"domain {k} differ: {sorted(names[k] ^ expected[k])}")
    return names


def _typed_list(items: list[str]) -> list[tuple[str, str]]:
    out, pending = [], []
    it = iter(items)
    for tok in it:
        if tok == "-":
            t = next(it)
            out += [(x, t) for x in pending]
            pending = []
        else:
            pending.append(tok)
    out += [(x, "object") for x in pending]
    return out


def read_problem(text: str) -> ProblemInstance:
    body, notes = _strip_comments(text)
    tree = parse_sexpr(body)
    _check_supported(tree)
    if not (isinstance(tree, list) and tree[0].lower() == "define" and tree[1][0].lower() == "problem"):
        raise PddlError("not a problem definition")
    name = tree[1][1]
    objects = _typed_list((_section(tree, ":objects") or [":objects"])[1:])
    kinds: dict[str, list[str]] = {}
    for obj, t in objects:
        kinds.setdefault(t.upper() if t.lower() != "site" else "Site", []).append(obj)

    atoms: list[list[str]] = []
    values: dict[tuple, Fraction] = {}
    for item in (_section(tree, ":init") or [":init"])[1:]:
        if item[0] == "=":
            head = item[1]
            values[tuple(head)] = Fraction(item[2])
        else:
            atoms.append(item)

    def num(*key, default=None):
        v = values.get(tuple(key))
        if v is None:
            if default is None:
                raise PddlError(f"missing fluent ({' '.join(key)})")
            return default
        return v

    def atoms_of(pred: str):
        return [a[1:] for a in atoms if a[0].lower() == pred]

    site_of = {a[0]: a[2] for a in atoms_of("available_at") if a[1] in ("storage", "compute")}
    fixed = {a[0] for a in atoms_of("fixed")}
    placement = {a[0]: a[1] for a in atoms_of("scheduled_on")}
    type_of = {a[0]: a[1] for a in atoms_of("type_of")}
    config_sites: dict[str, set[str]] = {}
    for a in atoms_of("available_at"):
        if a[1] == "config":
            config_sites.setdefault(a[0], set()).add(a[2])
    formats = {a[0]: a[1] for a in atoms_of("input_format")}, {a[0]: a[1] for a in atoms_of("output_format")}
    weights = {r: num("work-cost-weight", r.value, default=Fraction(1)) for r in ResourceKind}

    charges_by_if: dict[tuple[str, str], Fraction] = {}
    for c in fixed:
        if c in placement:
            res = "storage" if c in kinds.get("DC", []) else "compute"
            charges_by_if[(placement[c], res)] = charges_by_if.get((placement[c], res), 0) + num(
                "work_amount", c, res, default=Fraction(0))

    sites = tuple(Site(s) for s in kinds.get("Site", []))
    interfaces = []
    for t, kind in (("DSI", InterfaceKind.DATA_SHARING), ("DPI", InterfaceKind.DATA_PROCESSING)):
        for i in kinds.get(t, []):
            total, avail = {}, {}
            for r in ResourceKind:
                if ("resource_total", i, r.value) in values:
                    total[r] = values[("resource_total", i, r.value)]
                    avail[r] = values[("resource_available", i, r.value)] + charges_by_if.get((i, r.value), 0)
            interfaces.append(Interface(i, site_of[i], kind, total, avail))
    interfaces.sort(key=lambda x: [a[0] for a in atoms_of("available_at")].index(x.id))

    link_order = []
    endpoints: dict[str, tuple[str, str]] = {}
    for l, a, b in atoms_of("linked"):
        if l not in endpoints:
            endpoints[l] = (a, b)
            link_order.append(l)
    hops: dict[str, list[str]] = {}
    for cl, dl in atoms_of("link_uses"):
        hops.setdefault(cl, []).append(dl)
    composite = set(kinds.get("CL", []))
    links = tuple(
        Link(l, LinkKind.COMPOSITE if l in composite else LinkKind.DIRECT, endpoints[l],
             num("resource_total", l, "network"), num("resource_available", l, "network"),
             num("network_latency", l), tuple(hops.get(l, ())))
        for l in link_order
    )

    types = []
    proc_types = {}
    for note in notes:
        parts = note.split()
        if parts and parts[0] == "processing-type":
            proc_types[parts[1]] = (parts[2], parts[3])
    for t in kinds.get("DCT", []):
        types.append(ComponentType(t, ComponentClass.DATA, msg_size=num("msg_size", t)))
    for t in kinds.get("PCT", []):
        if t not in proc_types:
            users = [c for c, tt in type_of.items() if tt == t]
            if not users:
                raise PddlError(f"cannot recover formats of processing type {t}")
            proc_types[t] = (formats[0][users[0]], formats[1][users[0]])
        types.append(ComponentType(t, ComponentClass.PROCESSING, input_format=proc_types[t][0],
                                   output_format=proc_types[t][1]))

    comp_order = [a[0] for a in atoms_of("type_of")]
    comps = []
    for c in comp_order:
        is_data = c in kinds.get("DC", [])
        work = ResourceKind.STORAGE if is_data else ResourceKind.COMPUTE
        demand = {work: num("work_amount", c, work.value, default=Fraction(0)),
                  ResourceKind.CONFIG: num("work_amount", c, "config", default=Fraction(0))}
        comps.append(WorkflowComponent(c, type_of[c], demand, num("msg_max_rate", c),
                                       frozenset(config_sites.get(c, ())), c in fixed,
                                       placement.get(c) if c in fixed else None))

    goals = []
    for note in notes:
        parts = note.split()
        if parts and parts[0] == "goal":
            goals.append(GoalDemand(parts[1], parts[2], parts[3]))
    bound = None
    goal = _section(tree, ":goal")
    for node in _walk(goal):
        if isinstance(node, list) and len(node) == 3 and node[0] == "<=" and node[1] == ["absolute-latency"]:
            bound = Fraction(node[2])
    if bound is None:
        raise PddlError("goal lacks an absolute-latency bound")

    return ProblemInstance(
        name=name,
        graph=ResourceGraph(sites, tuple(interfaces), links),
        component_types=tuple(types),
        components=tuple(comps),
        goals=tuple(goals),
        latency_bound=bound,
        cost_weights=weights,
    )


def read_pddl(domain_text: str, problem_text: str) -> GroundProblem:
    read_domain(domain_text)
    return ground(read_problem(problem_text))

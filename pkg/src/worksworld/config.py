"""Human-facing YAML configuration: parsing, unit normalisation, lowering and serialisation.

Base units: MB (storage, config, message size), cores (compute), MB/s
(bandwidth), s (latency), msg/s (message rate).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

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
    validate_model,
)
from .pddl import exact_text

SCHEMA_VERSION = 1
TOP_KEYS = ("schema", "name", "units", "sites", "interfaces", "links", "component_types", "components",
            "goals", "latency_bound", "cost_weights")
ENTITY_KEYS = {
    "sites": {"id", "annotations"},
    "interfaces": {"id", "site", "kind", "total", "available", "annotations"},
    "links": {"id", "kind", "endpoints", "bandwidth", "available", "latency", "hops"},
    "component_types": {"id", "class", "msg_size", "input", "output"},
    "components": {"id", "type", "demand", "msg_max_rate", "config_sites", "fixed", "placement"},
    "goals": {"source", "site", "format"},
}
REQUIRED_KEYS = {
    "sites": {"id"},
    "interfaces": {"id", "site", "kind", "total"},
    "links": {"id", "kind", "endpoints"},
    "component_types": {"id", "class"},
    "components": {"id", "type", "msg_max_rate"},
    "goals": {"source", "site", "format"},
}
DIMENSIONS = ("memory", "compute", "bandwidth", "time", "rate")
UNITS: dict[str, dict[str, Fraction]] = {
    "memory": {"KB": Fraction(1, 1024), "MB": Fraction(1), "GB": Fraction(1024), "TB": Fraction(1024 ** 2)},
    "compute": {"cores": Fraction(1), "core": Fraction(1)},
    "bandwidth": {"KB/s": Fraction(1, 1024), "MB/s": Fraction(1), "GB/s": Fraction(1024)},
    "time": {"us": Fraction(1, 10 ** 6), "ms": Fraction(1, 1000), "s": Fraction(1), "min": Fraction(60)},
    "rate": {"msg/s": Fraction(1), "msg/min": Fraction(1, 60)},
}
BASE_UNIT = {"memory": "MB", "compute": "cores", "bandwidth": "MB/s", "time": "s", "rate": "msg/s"}
RESOURCE_DIMENSION = {ResourceKind.STORAGE: "memory", ResourceKind.CONFIG: "memory",
                      ResourceKind.COMPUTE: "compute", ResourceKind.NETWORK: "bandwidth"}
DEFAULT_LATENCY_BOUND = Fraction(10 ** 9)  # only used when there are no goals
_QUANTITY = re.compile(r"^\s*([0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?(?:/[0-9]+)?)\s*([A-Za-z/]+)?\s*$")


class ConfigError(ValueError):
    def __init__(self, message: str, file: str = "<config>", line: int = 1, col: int = 1):
        super().__init__(message)
        self.message, self.file, self.line, self.col = message, file, line, col

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.message}"


@dataclass
class ConfigDocument:
    """Parsed document tree; scalars keep their declared units as text."""

    data: dict
    source: str = "<config>"
    marks: dict[tuple, tuple[int, int]] = field(default_factory=dict, repr=False, compare=False)

    def error(self, path: tuple, message: str) -> ConfigError:
        while path and path not in self.marks:
            path = path[:-1]
        line, col = self.marks.get(path, (1, 1))
        return ConfigError(message, self.source, line, col)

    def section(self, key: str) -> list:
        return self.data.get(key) or []


# ---------------------------------------------------------------------------
# parsing


def _mark(node) -> tuple[int, int]:
    return node.start_mark.line + 1, node.start_mark.column + 1


def _scalar(node: yaml.ScalarNode):
    tag = node.tag.rsplit(":", 1)[-1]
    if tag == "null":
        return None
    if tag == "bool":
        return node.value.lower() in ("true", "yes", "on")
    if tag in ("int", "float"):
        try:
            return Fraction(node.value.replace("_", ""))
        except ValueError:
            return node.value
    return node.value


def _to_tree(node, path: tuple, marks: dict, source: str):
    marks[path] = _mark(node)
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            if not isinstance(k, yaml.ScalarNode):
                raise ConfigError("mapping keys must be scalars", source, *_mark(k))
            key = str(k.value)
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", source, *_mark(k))
            out[key] = _to_tree(v, path + (key,), marks, source)
            marks[path + (key,)] = _mark(k)  # point diagnostics at the key
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_tree(v, path + (i,), marks, source) for i, v in enumerate(node.value)]
    return _scalar(node)


def parse_config(text: str, source: str = "<config>") -> ConfigDocument:
    try:
        for ev in yaml.parse(text):
            if isinstance(ev, yaml.AliasEvent) or getattr(ev, "anchor", None):
                raise ConfigError("anchors and aliases are not supported", source, *_mark(ev))
        node = yaml.compose(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (1, 1)
        raise ConfigError(f"syntax error: {e.problem or e.context}", source, line, col) from None
    except yaml.YAMLError as e:
        raise ConfigError(f"syntax error: {e}", source) from None
    if node is None:
        raise ConfigError("empty document", source)
    marks: dict[tuple, tuple[int, int]] = {}
    data = _to_tree(node, (), marks, source)
    doc = ConfigDocument(data if isinstance(data, dict) else {}, source, marks)
    if not isinstance(data, dict):
        raise doc.error((), "top level must be a mapping")
    check_document(doc)
    return doc


def _show(v) -> str:
    return exact_text(v) if isinstance(v, Fraction) else repr(v)


def check_document(doc: ConfigDocument) -> None:
    """Structural checks: schema version, known keys, unique ids, resolvable references."""
    data = doc.data
    for key in data:
        if key not in TOP_KEYS:
            raise doc.error((key,), f"unknown key {key!r}")
    if "schema" not in data:
        raise doc.error((), "missing 'schema' key")
    if data["schema"] != SCHEMA_VERSION:
        raise doc.error(("schema",), f"unsupported schema version {_show(data['schema'])}; expected {SCHEMA_VERSION}")
    for key in ("units", "cost_weights"):
        if key in data and not isinstance(data[key], dict):
            raise doc.error((key,), f"'{key}' must be a mapping")
    for dim in data.get("units") or {}:
        if dim not in DIMENSIONS:
            raise doc.error(("units", dim), f"unknown unit dimension {dim!r}")
        if data["units"][dim] not in UNITS[dim]:
            raise doc.error(("units", dim), f"unknown {dim} unit {data['units'][dim]!r}")
    for r in data.get("cost_weights") or {}:
        if r not in {k.value for k in ResourceKind}:
            raise doc.error(("cost_weights", r), f"unknown resource kind {r!r}")

    seen: dict[str, tuple] = {}
    for section, allowed in ENTITY_KEYS.items():
        items = data.get(section) or []
        if not isinstance(items, list):
            raise doc.error((section,), f"'{section}' must be a list")
        for n, item in enumerate(items):
            path = (section, n)
            if not isinstance(item, dict):
                raise doc.error(path, f"{section} entries must be mappings")
            for key in item:
                if key not in allowed:
                    raise doc.error(path + (key,), f"unknown key {key!r} in {section}")
            for key in sorted(REQUIRED_KEYS[section] - set(item)):
                raise doc.error(path, f"missing key {key!r} in {section}")
            if "id" in item:
                ident = str(item["id"])
                if ident in seen:
                    line = doc.marks.get(seen[ident], (1, 1))[0]
                    raise doc.error(path + ("id",), f"duplicate id {ident!r} (first defined on line {line})")
                seen[ident] = path + ("id",)
    _check_refs(doc)


def _ids(doc: ConfigDocument, section: str) -> set[str]:
    return {str(x["id"]) for x in doc.section(section)}


def _check_refs(doc: ConfigDocument) -> None:
    sites, ifaces, links = _ids(doc, "sites"), _ids(doc, "interfaces"), _ids(doc, "links")
    types, comps = _ids(doc, "component_types"), _ids(doc, "components")

    def need(path, value, pool, what):
        if str(value) not in pool:
            raise doc.error(path, f"unresolved reference to {what} {value!r}")

    for n, i in enumerate(doc.section("interfaces")):
        need(("interfaces", n, "site"), i["site"], sites, "site")
    for n, l in enumerate(doc.section("links")):
        ends = l["endpoints"]
        if not isinstance(ends, list) or len(ends) != 2:
            raise doc.error(("links", n, "endpoints"), "endpoints must list exactly two sites")
        for k, s in enumerate(ends):
            need(("links", n, "endpoints", k), s, sites, "site")
        for k, h in enumerate(l.get("hops") or []):
            need(("links", n, "hops", k), h, links, "link")
    for n, t in enumerate(doc.section("component_types")):
        for key in ("input", "output"):
            if key in t:
                need(("component_types", n, key), t[key], types, "component type")
    for n, c in enumerate(doc.section("components")):
        need(("components", n, "type"), c["type"], types, "component type")
        for k, s in enumerate(c.get("config_sites") or []):
            need(("components", n, "config_sites", k), s, sites, "site")
        if c.get("placement") is not None:
            need(("components", n, "placement"), c["placement"], ifaces, "interface")
    for n, g in enumerate(doc.section("goals")):
        need(("goals", n, "source"), g["source"], comps, "component")
        need(("goals", n, "site"), g["site"], sites, "site")
        need(("goals", n, "format"), g["format"], types, "component type")


# ---------------------------------------------------------------------------
# lowering


def quantity(value, dimension: str, default_unit: str | None = None) -> Fraction:
    """Convert a number or '<number> <unit>' string to the base unit of `dimension`."""
    if isinstance(value, bool) or value is None:
        raise ValueError(f"expected a {dimension} quantity, got {value!r}")
    if isinstance(value, (int, Fraction)):
        number, unit = Fraction(value), None
    else:
        m = _QUANTITY.match(str(value))
        if not m:
            raise ValueError(f"cannot read {dimension} quantity {value!r}")
        number, unit = Fraction(m.group(1)), m.group(2)
    unit = unit or default_unit or BASE_UNIT[dimension]
    table = UNITS[dimension]
    if unit not in table:
        raise ValueError(f"unknown {dimension} unit {unit!r}; expected one of {sorted(table)}")
    return number * table[unit]


def lower_config(doc: ConfigDocument) -> ProblemInstance:
    check_document(doc)
    data = doc.data
    units = data.get("units") or {}

    def q(path: tuple, value, dim: str, positive: bool = False, what: str = "") -> Fraction:
        try:
            v = quantity(value, dim, units.get(dim))
        except ValueError as e:
            raise doc.error(path, str(e)) from None
        if positive and v <= 0:
            raise doc.error(path, f"{what or path[-1]} must be positive, got {_show(value)}")
        if v < 0:
            raise doc.error(path, f"{what or path[-1]} must not be negative, got {_show(value)}")
        return v

    def resource_map(path: tuple, raw, positive: bool) -> dict[ResourceKind, Fraction]:
        if not isinstance(raw, dict):
            raise doc.error(path, "expected a mapping of resource kind to amount")
        out = {}
        for key, v in raw.items():
            try:
                r = ResourceKind(key)
            except ValueError:
                raise doc.error(path + (key,), f"unknown resource kind {key!r}") from None
            out[r] = q(path + (key,), v, RESOURCE_DIMENSION[r], positive, f"{key} capacity" if positive else key)
        return out

    sites = tuple(Site(str(s["id"]), dict(s.get("annotations") or {})) for s in doc.section("sites"))

    interfaces = []
    for n, i in enumerate(doc.section("interfaces")):
        path = ("interfaces", n)
        try:
            kind = InterfaceKind(i["kind"])
        except ValueError:
            raise doc.error(path + ("kind",), f"unknown interface kind {i['kind']!r}") from None
        total = resource_map(path + ("total",), i["total"], positive=True)
        avail = resource_map(path + ("available",), i["available"], False) if "available" in i else dict(total)
        interfaces.append(Interface(str(i["id"]), str(i["site"]), kind, total, avail,
                                    dict(i.get("annotations") or {})))

    raw_links = {str(l["id"]): (n, l) for n, l in enumerate(doc.section("links"))}
    links: dict[str, Link] = {}

    def lower_link(lid: str, stack: tuple = ()) -> Link:
        if lid in links:
            return links[lid]
        n, l = raw_links[lid]
        path = ("links", n)
        if lid in stack:
            raise doc.error(path, f"link {lid!r} refers to itself through its hops")
        try:
            kind = LinkKind(l["kind"])
        except ValueError:
            raise doc.error(path + ("kind",), f"unknown link kind {l['kind']!r}") from None
        hops = tuple(str(h) for h in l.get("hops") or ())
        hop_links = [lower_link(h, stack + (lid,)) for h in hops]
        if "bandwidth" in l:
            bw = q(path + ("bandwidth",), l["bandwidth"], "bandwidth", True, "bandwidth")
        elif hop_links:
            bw = min(h.total_bw for h in hop_links)
        else:
            raise doc.error(path, "missing key 'bandwidth' in links")
        if "latency" in l:
            lat = q(path + ("latency",), l["latency"], "time")
        elif hop_links:
            lat = sum((h.latency for h in hop_links), Fraction(0))
        else:
            raise doc.error(path, "missing key 'latency' in links")
        avail = q(path + ("available",), l["available"], "bandwidth") if "available" in l else bw
        a, b = (str(x) for x in l["endpoints"])
        links[lid] = Link(lid, kind, (a, b), bw, avail, lat, hops)
        return links[lid]

    for lid in raw_links:
        lower_link(lid)

    types = []
    for n, t in enumerate(doc.section("component_types")):
        path = ("component_types", n)
        try:
            cls = ComponentClass(t["class"])
        except ValueError:
            raise doc.error(path + ("class",), f"unknown component class {t['class']!r}") from None
        if cls is ComponentClass.DATA:
            if "msg_size" not in t:
                raise doc.error(path, "data component types need 'msg_size'")
            types.append(ComponentType(str(t["id"]), cls,
                                       msg_size=q(path + ("msg_size",), t["msg_size"], "memory", True, "msg_size")))
        else:
            for key in ("input", "output"):
                if key not in t:
                    raise doc.error(path, f"processing component types need '{key}'")
            types.append(ComponentType(str(t["id"]), cls, input_format=str(t["input"]), output_format=str(t["output"])))

    comps = []
    for n, c in enumerate(doc.section("components")):
        path = ("components", n)
        demand = resource_map(path + ("demand",), c.get("demand") or {}, positive=False)
        rate = q(path + ("msg_max_rate",), c["msg_max_rate"], "rate", True, "msg_max_rate")
        comps.append(WorkflowComponent(
            str(c["id"]), str(c["type"]), demand, rate,
            frozenset(str(s) for s in c.get("config_sites") or ()),
            bool(c.get("fixed", False)),
            None if c.get("placement") is None else str(c["placement"]),
        ))

    goals = tuple(GoalDemand(str(g["source"]), str(g["site"]), str(g["format"])) for g in doc.section("goals"))
    if "latency_bound" in data:
        bound = q(("latency_bound",), data["latency_bound"], "time", True, "latency_bound")
    elif goals:
        raise doc.error((), "latency_bound is required when goals are given")
    else:
        bound = DEFAULT_LATENCY_BOUND

    weights = {r: Fraction(1) for r in ResourceKind}
    for key, v in (data.get("cost_weights") or {}).items():
        try:
            weights[ResourceKind(key)] = Fraction(v)
        except (TypeError, ValueError):
            raise doc.error(("cost_weights", key), f"cost weight must be a number, got {v!r}") from None

    inst = ProblemInstance(
        name=str(data.get("name") or Path(doc.source).stem.split(".")[0] or "problem"),
        graph=ResourceGraph(sites, tuple(interfaces), tuple(links[l] for l in raw_links)),
        component_types=tuple(types),
        components=tuple(comps),
        goals=goals,
        latency_bound=bound,
        cost_weights=weights,
    )
    problems = validate_model(inst)
    if problems:
        d = problems[0]
        raise _locate(doc, d.subject, f"{d.invariant}: {d.message}")
    return inst


def _locate(doc: ConfigDocument, subject: str, message: str) -> ConfigError:
    for section in ENTITY_KEYS:
        for n, item in enumerate(doc.section(section)):
            if str(item.get("id", "")) == subject:
                return doc.error((section, n), message)
    return doc.error((), message)


def load_config(path: str | Path) -> ProblemInstance:
    path = Path(path)
    return lower_config(parse_config(path.read_text(), str(path)))


# ---------------------------------------------------------------------------
# serialisation


def _amount(v: Fraction, dim: str) -> str:
    return f"{exact_text(v)} {BASE_UNIT[dim]}"


def instance_to_config(inst: ProblemInstance) -> dict:
    """Canonical document tree (base units, explicit defaults) for an instance."""

    def resources(m: dict[ResourceKind, Fraction]) -> dict:
        return {r.value: _amount(m[r], RESOURCE_DIMENSION[r]) for r in ResourceKind if r in m}

    doc: dict = {"schema": SCHEMA_VERSION, "name": inst.name}
    doc["sites"] = [dict(id=s.id, **({"annotations": dict(s.annotations)} if s.annotations else {}))
                    for s in inst.graph.sites]
    doc["interfaces"] = []
    for i in inst.graph.interfaces:
        entry = {"id": i.id, "site": i.site, "kind": i.kind.value, "total": resources(i.total),
                 "available": resources(i.available)}
        if i.annotations:
            entry["annotations"] = dict(i.annotations)
        doc["interfaces"].append(entry)
    doc["links"] = []
    for l in inst.graph.links:
        entry = {"id": l.id, "kind": l.kind.value, "endpoints": list(l.endpoints),
                 "bandwidth": _amount(l.total_bw, "bandwidth"), "available": _amount(l.available_bw, "bandwidth"),
                 "latency": _amount(l.latency, "time")}
        if l.hops:
            entry["hops"] = list(l.hops)
        doc["links"].append(entry)
    doc["component_types"] = []
    for t in inst.component_types:
        if t.cls is ComponentClass.DATA:
            doc["component_types"].append({"id": t.id, "class": t.cls.value, "msg_size": _amount(t.msg_size, "memory")})
        else:
            doc["component_types"].append({"id": t.id, "class": t.cls.value, "input": t.input_format,
                                           "output": t.output_format})
    doc["components"] = []
    for c in inst.components:
        entry = {"id": c.id, "type": c.type, "demand": resources(c.demand),
                 "msg_max_rate": _amount(c.msg_max_rate, "rate"), "config_sites": sorted(c.config_sites),
                 "fixed": c.fixed}
        if c.placement is not None:
            entry["placement"] = c.placement
        doc["components"].append(entry)
    doc["goals"] = [{"source": g.source, "site": g.dest_site, "format": g.dest_format} for g in inst.goals]
    doc["latency_bound"] = _amount(inst.latency_bound, "time")
    doc["cost_weights"] = {r.value: _weight(inst.weight(r)) for r in ResourceKind}
    return doc


def _weight(w: Fraction):
    return int(w) if w.denominator == 1 else exact_text(w)


def dump_config(tree: dict) -> str:
    return yaml.safe_dump(tree, sort_keys=False, default_flow_style=None, width=100)


def canonicalize(text: str, source: str = "<config>") -> str:
    return dump_config(instance_to_config(lower_config(parse_config(text, source))))

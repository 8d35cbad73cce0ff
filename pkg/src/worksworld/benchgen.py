"""Seed-deterministic generators for the experiment families and calibration grids."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

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

DPI_COMPUTE = Fraction(16)
DSI_STORAGE = Fraction(10240)
LINK_BW = Fraction(1000)
LATENCY_INTER = Fraction(5, 1000)
LATENCY_INTRA = Fraction(5, 10000)
MSG_SIZE = Fraction(1)
MSG_RATE = Fraction(10)
PC_CORES = Fraction(1)
DC_STORAGE = Fraction(100)
CONFIG_SIZE = Fraction(100)
LATENCY_BOUND = Fraction(10)

VARY_KINDS = ("wfc", "interfaces", "direct-links", "sites")


def _interface(if_id: str, site: str, kind: InterfaceKind, scale: Fraction = Fraction(1)) -> Interface:
    r = kind.resource
    total = DSI_STORAGE if kind is InterfaceKind.DATA_SHARING else DPI_COMPUTE
    return Interface(if_id, site, kind, {r: total}, {r: total * scale})


def _direct(link_id: str, a: str, b: str, scale: Fraction = Fraction(1)) -> Link:
    lat = LATENCY_INTRA if a == b else LATENCY_INTER
    return Link(link_id, LinkKind.DIRECT, (a, b), LINK_BW, LINK_BW * scale, lat)


def _composite(link_id: str, h1: Link, h2: Link, scale: Fraction = Fraction(1)) -> Link:
    mid = (set(h1.endpoints) & set(h2.endpoints)).pop()
    a = h1.endpoints[0] if h1.endpoints[1] == mid else h1.endpoints[1]
    b = h2.endpoints[0] if h2.endpoints[1] == mid else h2.endpoints[1]
    bw = min(h1.total_bw, h2.total_bw)
    return Link(link_id, LinkKind.COMPOSITE, (a, b), bw, bw * scale, h1.latency + h2.latency, (h1.id, h2.id))


def chain_workflow(
    length: int, source_site: str, source_if: str, config_sites: frozenset[str]
) -> tuple[tuple[ComponentType, ...], tuple[WorkflowComponent, ...], str]:
    """Linear DC -> PC -> DC ... chain of `length` movable components after a fixed source.

    Returns (types, components, final data type id). Component ids are wc0
    (the fixed source), wc1, wc2, ... in chain order.
    """
    if length < 0 or length % 2:
        raise ValueError("chain length must be even and non-negative")
    k = length // 2
    types = [ComponentType(f"dct{i}", ComponentClass.DATA, msg_size=MSG_SIZE) for i in range(k + 1)]
    types += [
        ComponentType(f"pct{i}", ComponentClass.PROCESSING, input_format=f"dct{i - 1}", output_format=f"dct{i}")
        for i in range(1, k + 1)
    ]
    dc_demand = {ResourceKind.STORAGE: DC_STORAGE, ResourceKind.CONFIG: CONFIG_SIZE}
    pc_demand = {ResourceKind.COMPUTE: PC_CORES, ResourceKind.CONFIG: CONFIG_SIZE}
    comps = [
        WorkflowComponent("wc0", "dct0", dict(dc_demand), MSG_RATE, frozenset({source_site}), True, source_if)
    ]
    for i in range(1, k + 1):
        comps.append(WorkflowComponent(f"wc{2 * i - 1}", f"pct{i}", dict(pc_demand), MSG_RATE, config_sites))
        comps.append(WorkflowComponent(f"wc{2 * i}", f"dct{i}", dict(dc_demand), MSG_RATE, config_sites))
    return tuple(types), tuple(comps), f"dct{k}"


def _instance(name, sites, interfaces, links, length, dest_site) -> ProblemInstance:
    hub = sites[0].id
    types, comps, fmt = chain_workflow(length, hub, f"dsi_{hub}", frozenset({hub}))
    return ProblemInstance(
        name=name,
        graph=ResourceGraph(tuple(sites), tuple(interfaces), tuple(links)),
        component_types=types,
        components=comps,
        goals=(GoalDemand("wc0", dest_site, fmt),),
        latency_bound=LATENCY_BOUND,
        cost_weights={r: Fraction(1) for r in ResourceKind},
    )


def _hub_spoke(n_sites: int, scale=lambda: Fraction(1)):
    """Sites s1..sn, s1 the hub; returns spoke links and the unordered spoke pairs."""
    sites = [Site(f"s{i}") for i in range(1, n_sites + 1)]
    interfaces, links = [], []
    for s in sites:
        interfaces.append(_interface(f"dsi_{s.id}", s.id, InterfaceKind.DATA_SHARING, scale()))
        interfaces.append(_interface(f"dpi_{s.id}", s.id, InterfaceKind.DATA_PROCESSING, scale()))
    for s in sites:
        links.append(_direct(f"dl_{s.id}_{s.id}", s.id, s.id, scale()))
    spokes = {}
    for s in sites[1:]:
        spokes[s.id] = _direct(f"dl_s1_{s.id}", "s1", s.id, scale())
        links.append(spokes[s.id])
    pairs = list(itertools.combinations(sorted(spokes, key=lambda x: int(x[1:])), 2))
    return sites, interfaces, links, spokes, pairs


def gen_calibration(wfc: int, n_sites: int) -> ProblemInstance:
    """Grounding-calibration grid: hub-spoke plus a composite link per spoke pair."""
    sites, interfaces, links, spokes, pairs = _hub_spoke(n_sites)
    for a, b in pairs:
        links.append(_composite(f"cl_{a}_{b}", spokes[a], spokes[b]))
    return _instance(f"calibration-{wfc}wfc-{n_sites}s", sites, interfaces, links, wfc, sites[-1].id)


def gen_vary(kind: str, n: int, seed: int = 0) -> ProblemInstance:
    """Scale one dimension of the one-site baseline (1 DSI, 1 DPI, 1 intrasite link, 2WFC)."""
    if kind not in VARY_KINDS:
        raise ValueError(f"unknown vary kind {kind!r}; expected one of {VARY_KINDS}")
    name = f"vary-{kind}-{n}"
    if kind == "sites":
        if n < 1:
            raise ValueError("sites needs n >= 1")
        sites, interfaces, links, _, _ = _hub_spoke(n)
        return _instance(name, sites, interfaces, links, 2, sites[-1].id)

    sites = [Site("s1")]
    wfc, n_if, n_links = 2, 2, 1
    if kind == "wfc":
        if n < 2 or n % 2:
            raise ValueError("wfc needs an even n >= 2")
        wfc = n
    elif kind == "interfaces":
        if n < 2:
            raise ValueError("interfaces needs n >= 2")
        n_if = n
    else:
        if n < 1:
            raise ValueError("direct-links needs n >= 1")
        n_links = n
    interfaces = [_interface("dsi_s1", "s1", InterfaceKind.DATA_SHARING),
                  _interface("dpi_s1", "s1", InterfaceKind.DATA_PROCESSING)]
    for i in range(2, n_if):
        kind_i = InterfaceKind.DATA_SHARING if i % 2 == 0 else InterfaceKind.DATA_PROCESSING
        prefix = "dsi" if kind_i is InterfaceKind.DATA_SHARING else "dpi"
        interfaces.append(_interface(f"{prefix}_s1_{i // 2 + 1}", "s1", kind_i))
    links = [_direct("dl_s1_s1" if i == 0 else f"dl_s1_s1_{i + 1}", "s1", "s1") for i in range(n_links)]
    return _instance(name, sites, interfaces, links, wfc, "s1")


def gen_complex(chain_len: int, seed: int = 0) -> ProblemInstance:
    """Eight-site hub-spoke graph (8S, 16IF, 15DL, 14CL) with randomized availability."""
    if chain_len < 2 or chain_len > 16 or chain_len % 2:
        raise ValueError("chain_len must be even and within [2, 16]")
    rng = random.Random(seed)

    def scale() -> Fraction:
        return Fraction(rng.randint(500, 1000), 1000)

    sites, interfaces, links, spokes, pairs = _hub_spoke(8, scale)
    chosen = sorted(rng.sample(range(len(pairs)), 14))
    for i in chosen:
        a, b = pairs[i]
        links.append(_composite(f"cl_{a}_{b}", spokes[a], spokes[b], scale()))
    return _instance(f"complex-{chain_len}-seed{seed}", sites, interfaces, links, chain_len, sites[-1].id)


def calibration_instances() -> dict[str, ProblemInstance]:
    return {
        "2WFC,1S": gen_calibration(2, 1),
        "2WFC,2S": gen_calibration(2, 2),
        "2WFC,3S": gen_calibration(2, 3),
        "4WFC,3S": gen_calibration(4, 3),
    }


def gen_random(seed: int, max_sites: int = 2, max_chain: int = 4) -> ProblemInstance:
    """Small randomized instance with tight capacities, for property tests.

    Capacities are drawn low enough that placements and links compete for
    resources; goals and latency bounds are sometimes unreachable.
    """
    rng = random.Random(seed)
    n_sites = rng.randint(1, max_sites)
    sites = [Site(f"s{i}") for i in range(1, n_sites + 1)]
    interfaces, links = [], []
    for s in sites:
        for k in range(rng.randint(1, 2)):
            suffix = "" if k == 0 else f"_{k + 1}"
            interfaces.append(Interface(f"dsi_{s.id}{suffix}", s.id, InterfaceKind.DATA_SHARING,
                                        {ResourceKind.STORAGE: Fraction(rng.choice((200, 300, 400)))},
                                        {ResourceKind.STORAGE: Fraction(rng.choice((200, 300, 400)))}))
        for k in range(rng.randint(1, 2)):
            suffix = "" if k == 0 else f"_{k + 1}"
            cores = Fraction(rng.randint(1, 3))
            interfaces.append(Interface(f"dpi_{s.id}{suffix}", s.id, InterfaceKind.DATA_PROCESSING,
                                        {ResourceKind.COMPUTE: cores}, {ResourceKind.COMPUTE: cores}))
    # available <= total
    interfaces = [
        Interface(i.id, i.site, i.kind, i.total, {r: min(v, i.total[r]) for r, v in i.available.items()})
        for i in interfaces
    ]

    def link(lid, a, b):
        bw = Fraction(rng.choice((10, 20, 40)))
        lat = Fraction(rng.randint(1, 20), 1000)
        return Link(lid, LinkKind.DIRECT, (a, b), bw, bw, lat)

    spokes = {}
    for s in sites:
        if rng.random() < 0.8 or n_sites == 1:
            links.append(link(f"dl_{s.id}_{s.id}", s.id, s.id))
    for s in sites[1:]:
        spokes[s.id] = link(f"dl_s1_{s.id}", "s1", s.id)
        links.append(spokes[s.id])
    for a, b in itertools.combinations(sorted(spokes), 2):
        if rng.random() < 0.5:
            links.append(_composite(f"cl_{a}_{b}", spokes[a], spokes[b]))

    length = rng.choice(range(0, max_chain + 1, 2))
    k = length // 2
    types = [ComponentType(f"dct{i}", ComponentClass.DATA, msg_size=Fraction(rng.randint(1, 2)))
             for i in range(k + 1)]
    types += [ComponentType(f"pct{i}", ComponentClass.PROCESSING, input_format=f"dct{i - 1}",
                            output_format=f"dct{i}") for i in range(1, k + 1)]
    src_site = sites[0].id
    src_if = next(i.id for i in interfaces if i.site == src_site and i.kind is InterfaceKind.DATA_SHARING)
    comps = [WorkflowComponent("wc0", "dct0", {ResourceKind.STORAGE: DC_STORAGE, ResourceKind.CONFIG: CONFIG_SIZE},
                               Fraction(rng.randint(5, 10)), frozenset({src_site}), True, src_if)]
    site_ids = [s.id for s in sites]
    for i in range(1, length + 1):
        is_pc = i % 2 == 1
        t = f"pct{(i + 1) // 2}" if is_pc else f"dct{i // 2}"
        work = ResourceKind.COMPUTE if is_pc else ResourceKind.STORAGE
        amount = Fraction(rng.randint(1, 2)) if is_pc else DC_STORAGE
        cfg = frozenset(rng.sample(site_ids, rng.randint(1, len(site_ids))))
        comps.append(WorkflowComponent(f"wc{i}", t, {work: amount, ResourceKind.CONFIG: CONFIG_SIZE},
                                       Fraction(rng.randint(5, 10)), cfg))
    fmt = f"dct{k}" if rng.random() < 0.9 else f"dct{rng.randint(0, k)}"
    return ProblemInstance(
        name=f"random-{seed}",
        graph=ResourceGraph(tuple(sites), tuple(interfaces), tuple(links)),
        component_types=tuple(types),
        components=tuple(comps),
        goals=(GoalDemand("wc0", rng.choice(site_ids), fmt),),
        latency_bound=Fraction(rng.choice((2, 5, 10))) if rng.random() < 0.9 else Fraction(1, 5),
        cost_weights={r: Fraction(rng.choice((1, 1, 2))) for r in ResourceKind},
    )

from __future__ import annotations

import dataclasses
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from worksworld.benchgen import gen_random, gen_calibration, gen_vary  # noqa: E402
from worksworld.model import (  # noqa: E402
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

ROOT = Path(__file__).resolve().parents[1]
CONFIG_2WFC_1S = ROOT / "configs" / "2wfc_1s.yaml"
F = Fraction


def fanout_instance() -> ProblemInstance:
    """Source, one PC and two sinks of the same format on two sites: four components."""
    base = gen_calibration(2, 2)
    sink2 = WorkflowComponent("wc3", "dct1", {ResourceKind.STORAGE: F(100), ResourceKind.CONFIG: F(100)},
                              F(10), frozenset({"s1"}))
    return dataclasses.replace(
        base,
        name="fanout-2s",
        components=base.components + (sink2,),
        goals=(GoalDemand("wc0", "s1", "dct1"), GoalDemand("wc0", "s2", "dct1")),
    )


def micro_instance(pc_demand=F(2), dpi_total=F(8), rate=F(10), msg=F(2), bw=F(100), latency=F(1, 100),
                   weights=None) -> ProblemInstance:
    """One site; a PC that needs `pc_demand` cores, a fixed source DC streaming `msg` MB messages."""
    sites = (Site("s1"),)
    ifs = (
        Interface("dsi1", "s1", InterfaceKind.DATA_SHARING, {ResourceKind.STORAGE: F(1000)},
                  {ResourceKind.STORAGE: F(1000)}),
        Interface("dpi1", "s1", InterfaceKind.DATA_PROCESSING, {ResourceKind.COMPUTE: dpi_total},
                  {ResourceKind.COMPUTE: dpi_total}),
    )
    links = (Link("dl1", LinkKind.DIRECT, ("s1", "s1"), bw, bw, latency),)
    types = (
        ComponentType("raw", ComponentClass.DATA, msg_size=msg),
        ComponentType("clean", ComponentClass.DATA, msg_size=msg),
        ComponentType("cleaner", ComponentClass.PROCESSING, input_format="raw", output_format="clean"),
    )
    comps = (
        WorkflowComponent("src", "raw", {ResourceKind.STORAGE: F(10), ResourceKind.CONFIG: F(10)}, rate,
                          frozenset({"s1"}), True, "dsi1"),
        WorkflowComponent("wc3", "cleaner", {ResourceKind.COMPUTE: pc_demand, ResourceKind.CONFIG: F(10)}, rate,
                          frozenset({"s1"})),
        WorkflowComponent("sink", "clean", {ResourceKind.STORAGE: F(10), ResourceKind.CONFIG: F(10)}, rate,
                          frozenset({"s1"})),
    )
    return ProblemInstance("micro", ResourceGraph(sites, ifs, links), types, comps,
                           (GoalDemand("src", "s1", "clean"),), F(10),
                           weights or {r: F(1) for r in ResourceKind})


def small_corpus() -> list[ProblemInstance]:
    """Instances with at most four components and two sites."""
    out = [
        gen_calibration(2, 1),
        gen_calibration(2, 2),
        gen_vary("sites", 2),
        gen_vary("interfaces", 3),
        gen_vary("direct-links", 2),
        fanout_instance(),
        micro_instance(),
    ]
    randoms = (gen_random(seed, max_sites=2, max_chain=2) for seed in range(200))
    out += [inst for inst in randoms if len(inst.components) == 3][:12]
    return out


@pytest.fixture
def chain_1s() -> ProblemInstance:
    return gen_calibration(2, 1)


@pytest.fixture
def micro() -> ProblemInstance:
    return micro_instance()

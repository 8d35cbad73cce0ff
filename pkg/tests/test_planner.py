import dataclasses
from fractions import Fraction

import pytest
from conftest import fanout_instance, small_corpus
from oracles import bfs_min_length, dijkstra_min_cost, fold_metrics

from worksworld.benchgen import gen_complex, gen_calibration
from worksworld.grounding import ground, prune
from worksworld.model import GoalDemand
from worksworld.planner import SearchConfig, plan
from worksworld.validator import format_plan, validate


def test_minimal_chain_plan_shape():
    g = ground(gen_calibration(2, 1))
    p = plan(g, SearchConfig())
    assert p.status == "solved"
    assert sorted(s.schema for s in p.steps) == sorted([
        "schedule_component", "schedule_component", "connect_direct_link", "connect_direct_link",
        "propagate_input", "propagate_output"])
    assert bfs_min_length(g) == 6 == len(p.steps)


def test_already_satisfied_goal_gives_empty_plan():
    inst = dataclasses.replace(gen_calibration(2, 1), goals=(GoalDemand("wc0", "s1", "dct0"),))
    p = plan(ground(inst), SearchConfig())
    assert p.status == "solved" and p.steps == [] and p.cost == 0


def test_complex_two_solves_and_validates():
    inst = gen_complex(2, seed=1)
    full = ground(inst)
    p = plan(prune(full).problem, SearchConfig(time_budget=60))
    assert p.status == "solved"
    assert validate(full, p).valid
    assert p.latency <= inst.latency_bound


@pytest.mark.parametrize("inst", small_corpus(), ids=lambda i: i.name)
def test_astar_length_matches_bfs(inst):
    g = ground(inst)
    expected = bfs_min_length(g)
    p = plan(g, SearchConfig(strategy="weighted-astar", heuristic="hmax", objective="length"))
    if expected is None:
        assert p.status == "unsolvable"
    else:
        assert p.status == "solved" and len(p.steps) == expected


@pytest.mark.parametrize("inst", small_corpus(), ids=lambda i: i.name)
def test_astar_cost_matches_uniform_cost_oracle(inst):
    g = ground(inst)
    expected = dijkstra_min_cost(g)
    p = plan(g, SearchConfig(strategy="weighted-astar", heuristic="blind", objective="cost"))
    if expected is None:
        assert p.status == "unsolvable"
    else:
        assert p.cost == expected
        assert fold_metrics(inst, p.steps) == (p.cost, p.latency)


def test_unsolvable_latency_bound():
    inst = dataclasses.replace(gen_calibration(2, 1), latency_bound=Fraction(1, 10))
    p = plan(ground(inst), SearchConfig())
    assert p.status == "unsolvable"


def test_expansion_budget_reported_as_budget_exhausted():
    g = ground(fanout_instance())
    p = plan(g, SearchConfig(heuristic="blind", strategy="weighted-astar", max_expansions=3))
    assert p.status == "budget-exhausted"
    assert p.reason == "expansion limit"


def test_time_budget_reported_as_budget_exhausted():
    g = prune(ground(gen_complex(6, seed=1))).problem
    p = plan(g, SearchConfig(heuristic="blind", strategy="weighted-astar", time_budget=1e-6))
    assert p.status == "budget-exhausted"


def test_memory_budget_reported_as_budget_exhausted():
    g = prune(ground(gen_complex(6, seed=1))).problem
    p = plan(g, SearchConfig(heuristic="blind", strategy="weighted-astar", memory_budget=1.0))
    assert p.status == "budget-exhausted" and p.reason == "memory budget"


def test_plan_bytes_are_deterministic():
    g = prune(ground(gen_complex(4, seed=3))).problem
    for cfg in (SearchConfig(), SearchConfig(seed=5), SearchConfig(strategy="weighted-astar", weight=2)):
        assert format_plan(plan(g, cfg)) == format_plan(plan(g, cfg))


def test_reported_totals_are_fold_of_deltas():
    inst = gen_complex(4, seed=2)
    p = plan(prune(ground(inst)).problem, SearchConfig())
    assert p.cost == sum(s.cost for s in p.steps)
    assert p.latency == sum(s.latency for s in p.steps)


class TestSearchConfig:
    def test_parse_strategy(self):
        assert SearchConfig.parse_strategy("gbfs").strategy == "greedy-best-first"
        cfg = SearchConfig.parse_strategy("weighted-astar(2.5)")
        assert cfg.strategy == "weighted-astar" and cfg.weight == 2.5
        assert SearchConfig.parse_strategy("wastar:3").weight == 3

    @pytest.mark.parametrize("kw", [dict(weight=0.5), dict(time_budget=0), dict(memory_budget=-1),
                                    dict(strategy="dfs"), dict(objective="speed")])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SearchConfig(**kw)

    def test_rejects_unknown_strategy_text(self):
        with pytest.raises(ValueError):
            SearchConfig.parse_strategy("beam")

"""State heuristics built on a delete-free compilation of a ground problem.

Disjunctive precondition groups become auxiliary facts reached by zero-cost
axioms, so the relaxation is plain STRIPS. Negative and numeric conditions are
evaluated against the state itself: no action deletes atoms and no action
raises a resource pool, so a condition that fails now fails forever.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .grounding import GroundProblem, State

HEURISTICS = ("relaxed-plan-length", "relaxed-goal-count", "hmax", "blind")
INF = math.inf


def _csr(rows: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(rows) + 1, dtype=np.int32)
    for i, r in enumerate(rows):
        ptr[i + 1] = ptr[i] + len(r)
    idx = np.fromiter((x for r in rows for x in r), dtype=np.int32, count=int(ptr[-1]))
    return ptr, idx


class RelaxedTask:
    def __init__(self, problem: GroundProblem, backend: str | None = None):
        self.problem = problem
        self.k = kernels.get(backend)
        self.python = self.k is kernels._kernels_py
        n_atoms = len(problem.atoms)
        self.n_atoms = n_atoms
        self.n_facts = n_atoms + len(problem.groups)
        acts = problem.actions
        self.n_real = len(acts)

        pre_rows, add_rows, cost = [], [], []
        for a in acts:
            pre_rows.append(sorted(set(a.pre) | {n_atoms + g for g in a.alts}))
            add_rows.append(sorted(a.add))
            cost.append(1)
        for g, conjs in enumerate(problem.groups):
            for c in conjs:
                pre_rows.append(sorted(c))
                add_rows.append([n_atoms + g])
                cost.append(0)
        self.n_ops = len(pre_rows)
        self.pre_rows = pre_rows
        fact_ops: list[list[int]] = [[] for _ in range(self.n_facts)]
        for op, row in enumerate(pre_rows):
            for f in row:
                fact_ops[f].append(op)
        self.pre_ptr, self.pre_idx = _csr(pre_rows)
        self.add_ptr, self.add_idx = _csr(add_rows)
        self.fo_ptr, self.fo_idx = _csr(fact_ops)
        self.op_cost = np.asarray(cost, dtype=np.int64)
        self.static_ok = np.asarray([1 if a.static_ok else 0 for a in acts], dtype=np.uint8)
        self.neg_ptr, self.neg_idx = _csr([sorted(a.neg) for a in acts])
        self.num_ptr, self.num_slot = _csr([[f for f, _ in a.num_pre] for a in acts])
        self.num_thr = np.asarray([float(t) for a in acts for _, t in a.num_pre], dtype=np.float64)
        self.goal_facts = [n_atoms + g for g in problem.goal_groups]
        if self.python:
            # plain lists index much faster than numpy scalars in interpreted loops
            for name in ("pre_ptr", "pre_idx", "add_ptr", "add_idx", "fo_ptr", "fo_idx", "op_cost",
                         "static_ok", "neg_ptr", "neg_idx", "num_ptr", "num_slot", "num_thr"):
                setattr(self, name, getattr(self, name).tolist())

    def explore(self, state: State, use_max: bool = False):
        mask = np.zeros(self.n_facts, dtype=np.uint8)
        if state.atoms:
            mask[np.fromiter(state.atoms, dtype=np.int64)] = 1
        values = np.asarray([math.nan if v is None else float(v) for v in state.values], dtype=np.float64)
        init = np.fromiter(sorted(state.atoms), dtype=np.int32)
        if self.python:
            mask, values, init = mask.tolist(), values.tolist(), init.tolist()
        enabled = self.k.enabled_mask(self.n_real, self.static_ok, mask, values, self.neg_ptr, self.neg_idx,
                                      self.num_ptr, self.num_slot, self.num_thr)
        return self.k.explore(self.n_facts, self.n_ops, self.n_real, self.pre_ptr, self.pre_idx,
                              self.add_ptr, self.add_idx, self.fo_ptr, self.fo_idx, self.op_cost,
                              enabled, init, use_max)

    def relaxed_plan(self, state: State) -> list[int] | None:
        """Real operators of an FF-style relaxed plan, or None if the goal is relaxed-unreachable."""
        cost, supporter = self.explore(state)
        if any(cost[g] >= kernels.INF for g in self.goal_facts):
            return None
        chosen: set[int] = set()
        seen: set[int] = set()
        stack = list(self.goal_facts)
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            op = int(supporter[f])
            if op < 0:
                continue
            if op < self.n_real:
                chosen.add(op)
            stack.extend(self.pre_rows[op])
        return sorted(chosen)

    def hmax(self, state: State) -> float:
        cost, _ = self.explore(state, use_max=True)
        worst = max((int(cost[g]) for g in self.goal_facts), default=0)
        return INF if worst >= kernels.INF else float(worst)


class Heuristic:
    def __init__(self, problem: GroundProblem, name: str = "relaxed-plan-length", backend: str | None = None):
        if name not in HEURISTICS:
            raise ValueError(f"unknown heuristic {name!r}; expected one of {HEURISTICS}")
        self.problem = problem
        self.name = name
        self.task = RelaxedTask(problem, backend) if name in ("relaxed-plan-length", "hmax") else None
        self.evaluations = 0

    def __call__(self, state: State) -> float:
        self.evaluations += 1
        p = self.problem
        if state.values[p.latency_slot] > p.latency_bound:
            return INF  # latency only grows
        if self.name == "blind":
            return 0.0
        if self.name == "relaxed-goal-count":
            return float(sum(1 for g in p.goal_groups if not p.holds(g, state.atoms)))
        if self.name == "hmax":
            return self.task.hmax(state)
        plan = self.task.relaxed_plan(state)
        return INF if plan is None else float(len(plan))


def heuristic_value(state: State, problem: GroundProblem, name: str = "relaxed-plan-length") -> float:
    return Heuristic(problem, name)(state)

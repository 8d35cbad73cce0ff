"""Pure-Python delete-relaxation exploration (reference for the compiled kernel)."""
import heapq

INF = 1 << 40


def enabled_mask(n_real, static_ok, state_mask, values, neg_ptr, neg_idx, num_ptr, num_slot, num_thr):
    """1 for operators whose negative and numeric conditions hold in the state."""
    out = bytearray(n_real)
    for op in range(n_real):
        if not static_ok[op]:
            continue
        ok = True
        for k in range(neg_ptr[op], neg_ptr[op + 1]):
            if state_mask[neg_idx[k]]:
                ok = False
                break
        if ok:
            for k in range(num_ptr[op], num_ptr[op + 1]):
                t = num_thr[k]
                v = values[num_slot[k]]
                # NaN (unassigned) compares false; tolerance keeps the test conservative
                if not v >= t - 1e-9 * max(1.0, abs(t)):
                    ok = False
                    break
        if ok:
            out[op] = 1
    return out


def explore(n_facts, n_ops, n_real, pre_ptr, pre_idx, add_ptr, add_idx, fact_ops_ptr, fact_ops_idx,
            op_cost, enabled, init_facts, use_max):
    """Generalized Dijkstra computing h_add (or h_max) fact costs and best supporters.

    Operators >= n_real are axioms and always enabled.
    """
    cost = [INF] * n_facts
    supporter = [-1] * n_facts
    closed = bytearray(n_facts)
    unsat = [pre_ptr[op + 1] - pre_ptr[op] for op in range(n_ops)]
    acc = [0] * n_ops
    heap = []
    for f in init_facts:
        if cost[f] != 0:
            cost[f] = 0
            heap.append((0, f))
    heapq.heapify(heap)

    def fire(op, base):
        total = base + op_cost[op]
        for k in range(add_ptr[op], add_ptr[op + 1]):
            q = add_idx[k]
            if total < cost[q]:
                cost[q] = total
                supporter[q] = op
                heapq.heappush(heap, (total, q))

    for op in range(n_ops):
        if unsat[op] == 0 and (op >= n_real or enabled[op]):
            fire(op, 0)
    while heap:
        c, f = heapq.heappop(heap)
        if closed[f] or c > cost[f]:
            continue
        closed[f] = 1
        for k in range(fact_ops_ptr[f], fact_ops_ptr[f + 1]):
            op = fact_ops_idx[k]
            if op < n_real and not enabled[op]:
                continue
            unsat[op] -= 1
            if use_max:
                if c > acc[op]:
                    acc[op] = c
            else:
                acc[op] += c
            if unsat[op] == 0:
                fire(op, acc[op])
    return cost, supporter

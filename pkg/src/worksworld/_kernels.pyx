# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled delete-relaxation exploration; same contract as _kernels_py."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport fabs

cdef long long INF = 1LL << 40
INF_PY = INF


def enabled_mask(int n_real, const unsigned char[:] static_ok, const unsigned char[:] state_mask,
                 const double[:] values, const int[:] neg_ptr, const int[:] neg_idx,
                 const int[:] num_ptr, const int[:] num_slot, const double[:] num_thr):
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(n_real, dtype=np.uint8)
    cdef int op, k
    cdef bint ok
    cdef double t, v, tol
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
                tol = 1e-9 * (fabs(t) if fabs(t) > 1.0 else 1.0)
                if not (v >= t - tol):
                    ok = False
                    break
        if ok:
            out[op] = 1
    return out


cdef struct Entry:
    long long cost
    int fact


cdef inline void heap_push(Entry* heap, int* size, long long c, int f) nogil:
    cdef int i = size[0]
    cdef int parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent].cost < c or (heap[parent].cost == c and heap[parent].fact <= f):
            break
        heap[i] = heap[parent]
        i = parent
    heap[i].cost = c
    heap[i].fact = f


cdef inline Entry heap_pop(Entry* heap, int* size) nogil:
    cdef Entry top = heap[0]
    cdef Entry last
    cdef int i = 0, child
    size[0] -= 1
    last = heap[size[0]]
    while True:
        child = 2 * i + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and (heap[child + 1].cost < heap[child].cost or
                                    (heap[child + 1].cost == heap[child].cost and heap[child + 1].fact < heap[child].fact)):
            child += 1
        if last.cost < heap[child].cost or (last.cost == heap[child].cost and last.fact <= heap[child].fact):
            break
        heap[i] = heap[child]
        i = child
    heap[i] = last
    return top


def explore(int n_facts, int n_ops, int n_real, const int[:] pre_ptr, const int[:] pre_idx,
            const int[:] add_ptr, const int[:] add_idx, const int[:] fact_ops_ptr, const int[:] fact_ops_idx,
            const long long[:] op_cost, const unsigned char[:] enabled, const int[:] init_facts, bint use_max):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cost_arr = np.full(n_facts, INF, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] sup_arr = np.full(n_facts, -1, dtype=np.int32)
    cdef long long[:] cost = cost_arr
    cdef int[:] supporter = sup_arr
    cdef int cap = n_facts + add_ptr[n_ops] + 1
    cdef Entry* heap = <Entry*> malloc(cap * sizeof(Entry))
    cdef int* unsat = <int*> malloc((n_ops + 1) * sizeof(int))
    cdef long long* acc = <long long*> malloc((n_ops + 1) * sizeof(long long))
    cdef unsigned char* closed = <unsigned char*> malloc(n_facts + 1)
    cdef int size = 0
    cdef int i, op, k, f, q
    cdef long long c, total
    cdef Entry e
    if heap == NULL or unsat == NULL or acc == NULL or closed == NULL:
        free(heap); free(unsat); free(acc); free(closed)
        raise MemoryError()
    try:
        for i in range(n_facts):
            closed[i] = 0
        for op in range(n_ops):
            unsat[op] = pre_ptr[op + 1] - pre_ptr[op]
            acc[op] = 0
        for i in range(init_facts.shape[0]):
            f = init_facts[i]
            if cost[f] != 0:
                cost[f] = 0
                heap_push(heap, &size, 0, f)
        for op in range(n_ops):
            if unsat[op] == 0 and (op >= n_real or enabled[op]):
                total = op_cost[op]
                for k in range(add_ptr[op], add_ptr[op + 1]):
                    q = add_idx[k]
                    if total < cost[q]:
                        cost[q] = total
                        supporter[q] = op
                        heap_push(heap, &size, total, q)
        while size > 0:
            e = heap_pop(heap, &size)
            c = e.cost
            f = e.fact
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
                    total = acc[op] + op_cost[op]
                    for i in range(add_ptr[op], add_ptr[op + 1]):
                        q = add_idx[i]
                        if total < cost[q]:
                            cost[q] = total
                            supporter[q] = op
                            if size >= cap:
                                raise MemoryError("relaxation heap overflow")
                            heap_push(heap, &size, total, q)
    finally:
        free(heap)
        free(unsat)
        free(acc)
        free(closed)
    return cost_arr, sup_arr

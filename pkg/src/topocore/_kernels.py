"""Jitted inner loops: heap-based searches, biconnected components, DFS.

Everything here works on plain numpy arrays so the hot paths compile
with numba.  Node-local search arrays (dist, parent, heap position)
are generation-stamped: an entry is only meaningful when its stamp in
``gen`` equals the current generation id, which makes per-query reset
O(1).  Objective values use int64 with INF64 marking forbidden arcs
and unreached nodes; finite path values stay far below the sentinel
for in-contract inputs (components < 2^31, weights <= 2^32-1).
"""

from __future__ import annotations

import numba as nb
import numpy as np

INF64 = np.int64(np.iinfo(np.int64).max)

STRATEGY_ALT = 0
STRATEGY_MK = 1
STRATEGY_MQ = 2

ROLE_ADD = 0
ROLE_MIN = 1
ROLE_AND = 2


@nb.njit(inline="always")
def _arc_value(costs, a, role, param):
    """Scalarize one arc under the query objective; INF64 when forbidden."""
    total = np.int64(0)
    for i in range(role.shape[0]):
        c = np.int64(costs[a, i])
        p = np.int64(param[i])
        r = role[i]
        if r == ROLE_ADD:
            total += p * c
        elif r == ROLE_MIN:
            if c < p:
                return INF64
        else:
            if (c & p) != p:
                return INF64
    return total


# 4-ary min-heap over node ids, keyed by dist[node]; pos[node] tracks
# the slot for decrease-key, -2 marks settled.


@nb.njit(inline="always")
def _sift_up(heap, pos, dist, i):
    node = heap[i]
    key = dist[node]
    while i > 0:
        p = (i - 1) >> 2
        pn = heap[p]
        if dist[pn] <= key:
            break
        heap[i] = pn
        pos[pn] = i
        i = p
    heap[i] = node
    pos[node] = i


@nb.njit(inline="always")
def _sift_down(heap, size, pos, dist, i):
    node = heap[i]
    key = dist[node]
    while True:
        c = 4 * i + 1
        if c >= size:
            break
        end = c + 4
        if end > size:
            end = size
        best = c
        best_key = dist[heap[c]]
        for j in range(c + 1, end):
            kj = dist[heap[j]]
            if kj < best_key:
                best = j
                best_key = kj
        if best_key >= key:
            break
        bn = heap[best]
        heap[i] = bn
        pos[bn] = i
        i = best
    heap[i] = node
    pos[node] = i


@nb.njit(inline="always")
def _heap_push(heap, size, pos, dist, node):
    heap[size] = node
    pos[node] = size
    _sift_up(heap, pos, dist, size)
    return size + 1


@nb.njit(inline="always")
def _heap_pop(heap, size, pos, dist):
    top = heap[0]
    pos[top] = -2
    size -= 1
    if size > 0:
        last = heap[size]
        heap[0] = last
        pos[last] = 0
        _sift_down(heap, size, pos, dist, 0)
    return top, size


@nb.njit(cache=True, nogil=True)
def dijkstra_uni_kernel(
    first_out, head, costs, role, param, s, t,
    dist, parent_arc, parent_node, pos, gen, gen_id, heap,
):
    """Plain Dijkstra from s; stops once t is settled.

    Returns (dist_t, pops, relaxed).  Forbidden arcs are skipped at
    relaxation time, so the per-query objective never touches the
    graph representation.
    """
    size = 0
    gen[s] = gen_id
    dist[s] = 0
    parent_arc[s] = -1
    parent_node[s] = -1
    size = _heap_push(heap, size, pos, dist, s)
    pops = np.int64(0)
    relaxed = np.int64(0)
    dist_t = INF64
    while size > 0:
        u, size = _heap_pop(heap, size, pos, dist)
        pops += 1
        if u == t:
            dist_t = dist[u]
            break
        du = dist[u]
        for a in range(np.int64(first_out[u]), np.int64(first_out[u + 1])):
            w = _arc_value(costs, a, role, param)
            if w == INF64:
                continue
            relaxed += 1
            v = np.int64(head[a])
            nd = du + w
            if gen[v] != gen_id:
                gen[v] = gen_id
                dist[v] = nd
                parent_arc[v] = a
                parent_node[v] = u
                size = _heap_push(heap, size, pos, dist, v)
            elif pos[v] >= 0 and nd < dist[v]:
                dist[v] = nd
                parent_arc[v] = a
                parent_node[v] = u
                _sift_up(heap, pos, dist, pos[v])
    return dist_t, pops, relaxed


@nb.njit(cache=True, nogil=True)
def bidij_kernel(
    fo_f, head_f, costs_f, fo_b, head_b, costs_b, role, param,
    s, t, strategy, core_count,
    dist_f, parc_f, pnode_f, pos_f, gen_f, gid_f, heap_f,
    dist_b, parc_b, pnode_b, pos_b, gen_b, gid_b, heap_b,
):
    """Bidirectional Dijkstra on a forward and a backward search graph.

    A tentative meeting value mu is updated whenever a node is stamped
    or improved on one side while already stamped on the other.  The
    search stops when both heap minima sum to at least mu and neither
    queue holds a node with id >= core_count; passing core_count ==
    node count therefore gives plain bidirectional search.  A side
    with an exhausted queue contributes no further meeting candidates,
    so the sum test collapses to the remaining side.

    Returns (mu, meet, pops_f, pops_b, relaxed).
    """
    size_f = 0
    size_b = 0
    noncore_f = 0
    noncore_b = 0
    mu = INF64
    meet = np.int64(-1)

    gen_f[s] = gid_f
    dist_f[s] = 0
    parc_f[s] = -1
    pnode_f[s] = -1
    size_f = _heap_push(heap_f, size_f, pos_f, dist_f, s)
    if s >= core_count:
        noncore_f += 1

    gen_b[t] = gid_b
    dist_b[t] = 0
    parc_b[t] = -1
    pnode_b[t] = -1
    size_b = _heap_push(heap_b, size_b, pos_b, dist_b, t)
    if t >= core_count:
        noncore_b += 1

    if s == t:
        mu = np.int64(0)
        meet = np.int64(s)

    pops_f = np.int64(0)
    pops_b = np.int64(0)
    relaxed = np.int64(0)
    step = 0
    while True:
        empty_f = size_f == 0
        empty_b = size_b == 0
        if empty_f and empty_b:
            break
        if noncore_f == 0 and noncore_b == 0:
            if empty_f or empty_b:
                break
            if mu != INF64 and dist_f[heap_f[0]] + dist_b[heap_b[0]] >= mu:
                break
        if empty_f:
            forward = False
        elif empty_b:
            forward = True
        elif strategy == STRATEGY_ALT:
            forward = (step & 1) == 0
        elif strategy == STRATEGY_MK:
            forward = dist_f[heap_f[0]] <= dist_b[heap_b[0]]
        else:
            forward = size_b >= size_f
        step += 1
        if forward:
            u, size_f = _heap_pop(heap_f, size_f, pos_f, dist_f)
            pops_f += 1
            if u >= core_count:
                noncore_f -= 1
            du = dist_f[u]
            for a in range(np.int64(fo_f[u]), np.int64(fo_f[u + 1])):
                w = _arc_value(costs_f, a, role, param)
                if w == INF64:
                    continue
                relaxed += 1
                v = np.int64(head_f[a])
                nd = du + w
                if gen_f[v] != gid_f:
                    gen_f[v] = gid_f
                    dist_f[v] = nd
                    parc_f[v] = a
                    pnode_f[v] = u
                    size_f = _heap_push(heap_f, size_f, pos_f, dist_f, v)
                    if v >= core_count:
                        noncore_f += 1
                elif pos_f[v] >= 0 and nd < dist_f[v]:
                    dist_f[v] = nd
                    parc_f[v] = a
                    pnode_f[v] = u
                    _sift_up(heap_f, pos_f, dist_f, pos_f[v])
                else:
                    continue
                if gen_b[v] == gid_b:
                    cand = nd + dist_b[v]
                    if cand < mu:
                        mu = cand
                        meet = v
        else:
            u, size_b = _heap_pop(heap_b, size_b, pos_b, dist_b)
            pops_b += 1
            if u >= core_count:
                noncore_b -= 1
            du = dist_b[u]
            for a in range(np.int64(fo_b[u]), np.int64(fo_b[u + 1])):
                w = _arc_value(costs_b, a, role, param)
                if w == INF64:
                    continue
                relaxed += 1
                v = np.int64(head_b[a])
                nd = du + w
                if gen_b[v] != gid_b:
                    gen_b[v] = gid_b
                    dist_b[v] = nd
                    parc_b[v] = a
                    pnode_b[v] = u
                    size_b = _heap_push(heap_b, size_b, pos_b, dist_b, v)
                    if v >= core_count:
                        noncore_b += 1
                elif pos_b[v] >= 0 and nd < dist_b[v]:
                    dist_b[v] = nd
                    parc_b[v] = a
                    pnode_b[v] = u
                    _sift_up(heap_b, pos_b, dist_b, pos_b[v])
                else:
                    continue
                if gen_f[v] == gid_f:
                    cand = dist_f[v] + nd
                    if cand < mu:
                        mu = cand
                        meet = v
    return mu, meet, pops_f, pops_b, relaxed


@nb.njit(cache=True, nogil=True)
def bcc_kernel(first, nbr, eid, n, edge_count, edge_comp):
    """Label each undirected edge with its biconnected component.

    Iterative lowpoint computation with an explicit edge stack; the
    adjacency must be a simple undirected view (no self-loops, one
    edge id per unordered pair, both half-edges sharing the id).
    Returns the number of components.
    """
    NIL = np.int64(-1)
    disc = np.full(n, NIL, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    parent_edge = np.full(n, NIL, dtype=np.int64)
    it = first[:-1].copy()
    dfs_stack = np.empty(n, dtype=np.int64)
    edge_stack = np.empty(edge_count, dtype=np.int64)
    ncomp = 0
    time = 0
    for root in range(n):
        if disc[root] != NIL:
            continue
        top = 0
        dfs_stack[top] = root
        top += 1
        disc[root] = time
        low[root] = time
        time += 1
        etop = 0
        while top > 0:
            v = dfs_stack[top - 1]
            if it[v] < first[v + 1]:
                i = it[v]
                it[v] += 1
                w = np.int64(nbr[i])
                e = eid[i]
                if e == parent_edge[v]:
                    continue
                if disc[w] == NIL:
                    edge_stack[etop] = e
                    etop += 1
                    parent_edge[w] = e
                    disc[w] = time
                    low[w] = time
                    time += 1
                    dfs_stack[top] = w
                    top += 1
                elif disc[w] < disc[v]:
                    # back edge to an ancestor; descendant edges were
                    # already stacked when first explored
                    edge_stack[etop] = e
                    etop += 1
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            else:
                top -= 1
                if top > 0:
                    u = dfs_stack[top - 1]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if low[v] >= disc[u]:
                        pe = parent_edge[v]
                        while etop > 0:
                            e = edge_stack[etop - 1]
                            etop -= 1
                            edge_comp[e] = ncomp
                            if e == pe:
                                break
                        ncomp += 1
    return ncomp


@nb.njit(cache=True, nogil=True)
def dfs_preorder_kernel(first, nbr, root, new_id):
    """Fill new_id with DFS pre-order numbers; new_id must start at -1."""
    n = new_id.shape[0]
    stack = np.empty(first[n] + n, dtype=np.int64)
    counter = 0
    for r in range(-1, n):
        start = root if r == -1 else r
        if new_id[start] >= 0:
            continue
        top = 0
        stack[top] = start
        top += 1
        while top > 0:
            top -= 1
            v = stack[top]
            if new_id[v] >= 0:
                continue
            new_id[v] = counter
            counter += 1
            lo = first[v]
            hi = first[v + 1]
            for i in range(hi - 1, lo - 1, -1):
                w = np.int64(nbr[i])
                if new_id[w] < 0:
                    stack[top] = w
                    top += 1
    return counter

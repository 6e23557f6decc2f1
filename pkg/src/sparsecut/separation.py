"""Exact and heuristic separation of cycle inequalities.

Exact separation searches a two-copy auxiliary graph: copy arcs carry weight
x(e), crossing arcs 1 - x(e). A path from a vertex to its twin of length < 1
corresponds to a violated cycle inequality; its crossing arcs form the odd
set F. Found closed walks are split into simple cycles and decomposed along
chords into chordless violated cuts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import VIOLATION_TOL, CycleCut

EPS_SKIP = 1e-6        # aux arcs with weight >= 1 - EPS_SKIP are never built
SEP_GATE = 1e-6        # pursue twin paths shorter than 1 - SEP_GATE
EMIT_TOL = 1e-9        # emitted cuts must have slack-form value < 1 - EMIT_TOL
TRIANGLE_BUDGET = 50_000
DEGREE_CAP = 512


@dataclass
class ClosedWalk:
    """Projection of an aux-graph twin path: a closed walk in the base graph.

    ``verts[i]`` and ``verts[i+1]`` are joined by edge ``edge_ids[i]``;
    ``in_f[i]`` marks crossing (swap) arcs. ``verts[0] == verts[-1]``.
    """

    verts: list[int]
    edge_ids: list[int]
    in_f: list[bool]

    def length(self, x):
        total = 0.0
        for e, flag in zip(self.edge_ids, self.in_f):
            total += (1.0 - x[e]) if flag else x[e]
        return total


class AuxGraph:
    """Static CSR over 2|V| vertices; twin of v is v + |V|."""

    def __init__(self, n, arcs):
        # arcs: list of (tail, head, weight, edge_id); both directions included
        self.n = n
        self.num_vertices = 2 * n
        deg = np.zeros(self.num_vertices + 1, dtype=np.int64)
        for tail, _, _, _ in arcs:
            deg[tail + 1] += 1
        self.offsets = np.cumsum(deg)
        self.heads = np.empty(len(arcs), dtype=np.int64)
        self.weights = np.empty(len(arcs), dtype=np.float64)
        self.edge_ids = np.empty(len(arcs), dtype=np.int64)
        cursor = self.offsets[:-1].copy()
        for tail, head, weight, eid in arcs:
            pos = cursor[tail]
            self.heads[pos] = head
            self.weights[pos] = weight
            self.edge_ids[pos] = eid
            cursor[tail] += 1

    def twin(self, v):
        return v + self.n if v < self.n else v - self.n


def build_aux_graph(g, x, eps_skip=EPS_SKIP) -> AuxGraph:
    """Two-copy auxiliary graph; arcs of weight >= 1 - eps_skip are omitted."""
    n = g.n
    arcs = []
    for e in range(g.m):
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        xe = float(x[e])
        if xe < 1.0 - eps_skip:
            arcs.append((u, v, xe, e))
            arcs.append((v, u, xe, e))
            arcs.append((u + n, v + n, xe, e))
            arcs.append((v + n, u + n, xe, e))
        cross = 1.0 - xe
        if cross < 1.0 - eps_skip:
            arcs.append((u, v + n, cross, e))
            arcs.append((v + n, u, cross, e))
            arcs.append((v, u + n, cross, e))
            arcs.append((u + n, v, cross, e))
    return AuxGraph(n, arcs)


class _PositionalHeap:
    """Binary min-heap keyed by distance with a positions array for decrease-key."""

    def __init__(self, size):
        self.keys = np.empty(size, dtype=np.float64)
        self.items: list[int] = []
        self.pos = np.full(size, -1, dtype=np.int64)

    def __len__(self):
        return len(self.items)

    def push_or_decrease(self, v, key):
        if self.pos[v] < 0:
            self.keys[v] = key
            self.items.append(v)
            self.pos[v] = len(self.items) - 1
            self._sift_up(len(self.items) - 1)
        elif key < self.keys[v]:
            self.keys[v] = key
            self._sift_up(self.pos[v])

    def pop_min(self):
        items = self.items
        top = items[0]
        last = items.pop()
        self.pos[top] = -1
        if items:
            items[0] = last
            self.pos[last] = 0
            self._sift_down(0)
        return top, self.keys[top]

    def _sift_up(self, i):
        items, keys, pos = self.items, self.keys, self.pos
        v = items[i]
        key = keys[v]
        while i > 0:
            parent = (i - 1) >> 1
            p = items[parent]
            if keys[p] <= key:
                break
            items[i] = p
            pos[p] = i
            i = parent
        items[i] = v
        pos[v] = i

    def _sift_down(self, i):
        items, keys, pos = self.items, self.keys, self.pos
        size = len(items)
        v = items[i]
        key = keys[v]
        while True:
            child = 2 * i + 1
            if child >= size:
                break
            if child + 1 < size and keys[items[child + 1]] < keys[items[child]]:
                child += 1
            c = items[child]
            if key <= keys[c]:
                break
            items[i] = c
            pos[c] = i
            i = child
        items[i] = v
        pos[v] = i


@dataclass
class DijkstraResult:
    dist: np.ndarray
    parent: np.ndarray      # predecessor aux vertex, -1 if none
    parent_edge: np.ndarray  # base-graph edge id of the incoming arc
    scanned: np.ndarray
    hit_twin: bool


def dijkstra_mod(aux: AuxGraph, source) -> DijkstraResult:
    """Dijkstra from ``source`` with the stop-at-1 and twin pruning rules."""
    size = aux.num_vertices
    dist = np.full(size, np.inf)
    parent = np.full(size, -1, dtype=np.int64)
    parent_edge = np.full(size, -1, dtype=np.int64)
    scanned = np.zeros(size, dtype=bool)
    target = aux.twin(source)

    heap = _PositionalHeap(size)
    dist[source] = 0.0
    heap.push_or_decrease(source, 0.0)
    hit_twin = False
    while len(heap):
        v, dv = heap.pop_min()
        if dv >= 1.0:
            break
        scanned[v] = True
        if v == target:
            hit_twin = True
            break
        tw = aux.twin(v)
        if scanned[tw] and dv + dist[tw] >= 1.0:
            continue
        for pos in range(aux.offsets[v], aux.offsets[v + 1]):
            w = int(aux.heads[pos])
            if scanned[w]:
                continue
            cand = dv + aux.weights[pos]
            if cand < dist[w]:
                dist[w] = cand
                parent[w] = v
                parent_edge[w] = aux.edge_ids[pos]
                heap.push_or_decrease(w, cand)
    return DijkstraResult(dist, parent, parent_edge, scanned, hit_twin)


def _aux_path(result: DijkstraResult, target):
    """Aux-vertex sequence and arc edge ids from the search source to target."""
    verts = [int(target)]
    eids = []
    v = int(target)
    while result.parent[v] >= 0:
        eids.append(int(result.parent_edge[v]))
        v = int(result.parent[v])
        verts.append(v)
    verts.reverse()
    eids.reverse()
    return verts, eids


def _project_walk(aux: AuxGraph, verts, eids) -> ClosedWalk:
    n = aux.n
    base = [v % n for v in verts]
    in_f = [
        (verts[i] < n) != (verts[i + 1] < n) for i in range(len(verts) - 1)
    ]
    return ClosedWalk(base, list(eids), in_f)


def _split_walk(walk: ClosedWalk):
    """All simple cycles of a closed walk (stack splitting at vertex repeats)."""
    cycles = []
    stack_v = [walk.verts[0]]
    stack_e: list[tuple[int, bool]] = []
    pos = {walk.verts[0]: 0}
    for i, (eid, flag) in enumerate(zip(walk.edge_ids, walk.in_f)):
        v = walk.verts[i + 1]
        stack_e.append((eid, flag))
        if v in pos:
            k = pos[v]
            cyc_v = stack_v[k:]
            cyc_e = stack_e[k:]
            for u in stack_v[k + 1 :]:
                del pos[u]
            del stack_v[k + 1 :]
            del stack_e[k:]
            cycles.append((cyc_v, [e for e, _ in cyc_e], [f for _, f in cyc_e]))
        else:
            stack_v.append(v)
            pos[v] = len(stack_v) - 1
    return cycles


def extract_simple_cycles(walk: ClosedWalk):
    """Simple cycles of the walk that can carry a cycle inequality.

    Degenerate two-edge cycles and cycles with an even number of crossing
    edges are discarded (no odd F can be formed from them).
    """
    out = []
    for verts, eids, in_f in _split_walk(walk):
        if len(eids) < 3:
            continue
        if sum(in_f) % 2 == 0:
            continue
        out.append((verts, eids, in_f))
    return out


def _cycle_lhs(eids, in_f, x):
    return sum((1.0 - x[e]) if f else x[e] for e, f in zip(eids, in_f))


def chordless_decompose(verts, eids, in_f, x, g, queue_tol=EMIT_TOL):
    """Split a violated simple cycle along chords into chordless violated cuts.

    Uses prefix sums of the F-count and of the slack-form value for O(1)
    violation checks per chord; violated sub-cycles are selected greedily by
    size with index marking and re-decomposed until chordless. Returns the
    original cut when no chord yields a violated sub-cycle (then the cycle is
    necessarily chordless, as any chord splits the violation).
    """
    k = len(eids)
    total_lhs = _cycle_lhs(eids, in_f, x)
    if total_lhs >= 1.0 - queue_tol:
        return []

    # prefix data over the cycle's edges
    q = [0.0] * (k + 1)
    f = [0] * (k + 1)
    for t in range(k):
        contrib = (1.0 - x[eids[t]]) if in_f[t] else x[eids[t]]
        q[t + 1] = q[t] + contrib
        f[t + 1] = f[t] + (1 if in_f[t] else 0)
    f_total = f[k]

    pos = {v: i for i, v in enumerate(verts)}
    candidates = []
    for b in range(k):
        vb = verts[b]
        for nb, ceid, _ in zip(*g.incident(vb)):
            a = pos.get(int(nb))
            if a is None or a >= b:
                continue
            if b - a == 1 or (a == 0 and b == k - 1):
                continue  # cycle edge, not a chord
            xc = float(x[ceid])
            qd = q[b] - q[a]
            fd = f[b] - f[a]
            chord_in_inner = fd % 2 == 0
            lhs_in = qd + (1.0 - xc if chord_in_inner else xc)
            lhs_out = (total_lhs - qd) + (xc if chord_in_inner else 1.0 - xc)
            if lhs_in < 1.0 - queue_tol:
                candidates.append((b - a + 1, a, b, "inner", int(ceid), chord_in_inner))
            if lhs_out < 1.0 - queue_tol:
                candidates.append(
                    (k - (b - a) + 1, a, b, "outer", int(ceid), not chord_in_inner)
                )

    if not candidates:
        return [CycleCut(tuple(eids), tuple(in_f))]

    candidates.sort(key=lambda c: (c[0], c[1], c[2], c[3]))
    marked = [False] * k
    cuts = []
    for _, a, b, which, ceid, chord_in in candidates:
        if marked[a] or marked[b]:
            continue
        if which == "inner":
            sub_v = verts[a : b + 1]
            sub_e = eids[a:b] + [ceid]
            sub_f = in_f[a:b] + [chord_in]
            for t in range(a + 1, b):
                marked[t] = True
        else:
            sub_v = verts[b:] + verts[: a + 1]
            sub_e = eids[b:] + eids[:a] + [ceid]
            sub_f = in_f[b:] + in_f[:a] + [chord_in]
            for t in range(b + 1, k):
                marked[t] = True
            for t in range(a):
                marked[t] = True
        cuts.extend(chordless_decompose(sub_v, sub_e, sub_f, x, g, queue_tol))
    return cuts


def symmetric_extra_paths(aux: AuxGraph, result: DijkstraResult, source, path_verts):
    """Extra twin walks from finalized twin pairs off the emitted path.

    A twin pair (u, u+n) with both labels finalized and d(u) + d(u+n) < 1
    yields a source-to-twin walk of that length by reflecting the second path.
    """
    on_path = set(path_verts)
    walks = []
    n = aux.n
    for u in range(n):
        if u == source % n:
            continue
        ut = u + n
        if u in on_path or ut in on_path:
            continue
        if not (result.scanned[u] and result.scanned[ut]):
            continue
        if result.dist[u] + result.dist[ut] >= 1.0 - SEP_GATE:
            continue
        verts1, eids1 = _aux_path(result, u)
        verts2, eids2 = _aux_path(result, ut)
        # reflect the source->u+n path into a twin path and reverse it: u -> twin(source)
        verts2 = [aux.twin(v) for v in reversed(verts2)]
        eids2 = list(reversed(eids2))
        walks.append(_project_walk(aux, verts1 + verts2[1:], eids1 + eids2))
    return walks


def _walk_cuts(walk: ClosedWalk, x, g, seen, out):
    for verts, eids, in_f in extract_simple_cycles(walk):
        if _cycle_lhs(eids, in_f, x) >= 1.0 - EMIT_TOL:
            continue
        for cut in chordless_decompose(verts, eids, in_f, x, g):
            key = cut.key()
            if key not in seen:
                seen.add(key)
                out.append(cut)


def separate_exact(g, x, eps_skip=EPS_SKIP, use_symmetry=True,
                   contract_zeros=False):
    """All-sources exact separation; empty iff no cycle inequality is violated
    beyond tolerance. Returned cuts are deduplicated and chordless.

    With ``contract_zeros`` the search runs on the auxiliary graph with
    zero-weight arcs contracted into supernodes (walks are expanded back
    through the contracted arcs); symmetric extra paths are skipped then.
    """
    if g.m == 0:
        return []
    if contract_zeros:
        return _separate_exact_contracted(g, x, eps_skip)
    aux = build_aux_graph(g, x, eps_skip)
    seen = set()
    cuts: list[CycleCut] = []
    for v in range(g.n):
        if g.degree(v) == 0:
            continue
        result = dijkstra_mod(aux, v)
        target = aux.twin(v)
        path_verts: list[int] = []
        if result.dist[target] < 1.0 - SEP_GATE:
            path_verts, path_eids = _aux_path(result, target)
            _walk_cuts(_project_walk(aux, path_verts, path_eids), x, g, seen, cuts)
        if use_symmetry:
            for walk in symmetric_extra_paths(aux, result, v, path_verts):
                _walk_cuts(walk, x, g, seen, cuts)
    return cuts


ZERO_ARC_EPS = 1e-9


def _raw_arcs(g, x, eps_skip):
    n = g.n
    arcs = []
    for e in range(g.m):
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        xe = float(x[e])
        if xe < 1.0 - eps_skip:
            arcs += [(u, v, xe, e), (v, u, xe, e),
                     (u + n, v + n, xe, e), (v + n, u + n, xe, e)]
        cross = 1.0 - xe
        if cross < 1.0 - eps_skip:
            arcs += [(u, v + n, cross, e), (v + n, u, cross, e),
                     (v, u + n, cross, e), (u + n, v, cross, e)]
    return arcs


def _separate_exact_contracted(g, x, eps_skip):
    """Exact separation on the aux graph with zero-weight arcs contracted.

    Zero arcs come in bidirectional pairs, so the supernodes they induce
    preserve all shortest-path distances; found supernode paths are expanded
    back through the contracted arcs before the usual cycle splitting.
    """
    import heapq

    n = g.n
    size = 2 * n
    arcs = _raw_arcs(g, x, eps_skip)

    parent = list(range(size))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    zero_adj: list[list[tuple[int, int]]] = [[] for _ in range(size)]
    for t, h, w, e in arcs:
        if w <= ZERO_ARC_EPS:
            zero_adj[t].append((h, e))
            rt, rh = find(t), find(h)
            if rt != rh:
                parent[rt] = rh
    comp = [find(v) for v in range(size)]
    labels = sorted(set(comp))
    relabel = {r: i for i, r in enumerate(labels)}
    comp = [relabel[c] for c in comp]
    ns = len(labels)

    # supernode arcs keep their original aux endpoints for path expansion
    sadj: list[list[tuple[int, float, int, int, int]]] = [[] for _ in range(ns)]
    for t, h, w, e in arcs:
        if w > ZERO_ARC_EPS and comp[t] != comp[h]:
            sadj[comp[t]].append((comp[h], w, e, t, h))

    def expand(entry, goal):
        """Aux-level path entry -> goal through zero arcs of one supernode."""
        if entry == goal:
            return [entry], []
        prev = {entry: (-1, -1)}
        queue = [entry]
        while queue:
            v = queue.pop(0)
            if v == goal:
                break
            for h, e in zero_adj[v]:
                if h not in prev:
                    prev[h] = (v, e)
                    queue.append(h)
        verts, eids = [goal], []
        v = goal
        while prev[v][0] >= 0:
            pv, e = prev[v]
            eids.append(e)
            verts.append(pv)
            v = pv
        verts.reverse()
        eids.reverse()
        return verts, eids

    seen: set = set()
    cuts: list[CycleCut] = []
    aux_shim = AuxGraph(n, [])  # only used for twin()/projection bookkeeping
    for src in range(n):
        if g.degree(src) == 0:
            continue
        s0, st = comp[src], comp[src + n]
        dist = [float("inf")] * ns
        pred: list[tuple | None] = [None] * ns  # (prev supernode, eid, tail, head)
        dist[s0] = 0.0
        heap = [(0.0, s0)]
        done = [False] * ns
        while heap:
            dv, v = heapq.heappop(heap)
            if done[v] or dv > dist[v]:
                continue
            if dv >= 1.0:
                break
            done[v] = True
            if v == st:
                break
            for h, w, e, at, ah in sadj[v]:
                cand = dv + w
                if cand < dist[h]:
                    dist[h] = cand
                    pred[h] = (v, e, at, ah)
                    heapq.heappush(heap, (cand, h))
        if dist[st] >= 1.0 - SEP_GATE:
            continue
        # walk the supernode path back, then expand zero segments forward
        hops = []
        v = st
        while pred[v] is not None:
            pv, e, at, ah = pred[v]
            hops.append((e, at, ah))
            v = pv
        hops.reverse()
        verts = [src]
        eids: list[int] = []
        cur = src
        for e, at, ah in hops:
            seg_v, seg_e = expand(cur, at)
            verts += seg_v[1:]
            eids += seg_e
            verts.append(ah)
            eids.append(e)
            cur = ah
        seg_v, seg_e = expand(cur, src + n)
        verts += seg_v[1:]
        eids += seg_e
        _walk_cuts(_project_walk(aux_shim, verts, eids), x, g, seen, cuts)
    return cuts


def separate_triangles(g, x, budget=TRIANGLE_BUDGET, viol_tol=VIOLATION_TOL):
    """Violated cycle inequalities on enumerated triangles (all four odd F)."""
    cuts = []
    seen = set()
    count = 0
    for e in range(g.m):
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        if g.degree(u) > DEGREE_CAP or g.degree(v) > DEGREE_CAP:
            continue
        nu = g.neighbors(u)
        nv = g.neighbors(v)
        common = np.intersect1d(nu, nv, assume_unique=True)
        for z in common:
            z = int(z)
            if z <= v:
                continue  # enumerate each triangle once, from its lowest edge
            count += 1
            if count > budget:
                return cuts
            e_uz = g.find_edge(u, z)
            e_vz = g.find_edge(v, z)
            tri = (e, e_uz, e_vz)
            xs = [float(x[t]) for t in tri]
            for mask in ((True, False, False), (False, True, False),
                         (False, False, True), (True, True, True)):
                lhs = sum((1.0 - xs[i]) if mask[i] else xs[i] for i in range(3))
                if lhs < 1.0 - viol_tol:
                    cut = CycleCut(tri, mask)
                    key = cut.key()
                    if key not in seen:
                        seen.add(key)
                        cuts.append(cut)
    return cuts

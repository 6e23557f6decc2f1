"""Primal heuristics: rank-2 angular local search, Kernighan-Lin improvement
and spanning-tree rounding of LP points."""

from __future__ import annotations

import math

import numpy as np

from .graph import CutSolution, cut_weight

GRAD_TOL = 1e-4
MAX_SWEEPS = 300
PERTURBATION = math.pi / 10
DEFAULT_RESTARTS = 8


def angular_energy(g, theta):
    """sum over edges of w * cos(theta_u - theta_v); low energy = heavy cut."""
    if g.m == 0:
        return 0.0
    return float(np.sum(g.edge_w * np.cos(theta[g.edge_u] - theta[g.edge_v])))


def _local_minimize(g, theta):
    """Coordinate-wise angle updates to a local minimum of the angular energy."""
    for _ in range(MAX_SWEEPS):
        max_move = 0.0
        for v in range(g.n):
            heads, _, weights = g.incident(v)
            if len(heads) == 0:
                continue
            # optimal angle against the complex field of the neighbors
            field = np.sum(weights * np.exp(1j * theta[heads]))
            if abs(field) < 1e-15:
                continue
            new = (math.pi + np.angle(field)) % (2 * math.pi)
            move = abs(new - theta[v])
            move = min(move, 2 * math.pi - move)
            theta[v] = new
            max_move = max(max_move, move)
        if max_move < GRAD_TOL:
            break
    return theta


def _best_diameter_cut(g, theta):
    """Best bipartition over the |V| diameters through sorted vertex angles.

    Sweeping the diameter angle flips one vertex per event; the cut weight is
    maintained incrementally.
    """
    order = np.argsort(theta, kind="stable")
    # initial diameter just below the smallest angle: side = angle in [a, a+pi)
    alpha = theta[order[0]] - 1e-12
    rel = (theta - alpha) % (2 * math.pi)
    y = (rel < math.pi).astype(np.int8)
    weight = cut_weight(g, y)
    best_w, best_y = weight, y.copy()

    # events: passing a vertex angle flips that vertex out of the arc,
    # passing angle+pi flips it in; process in increasing angle order
    events = []
    for v in range(g.n):
        events.append(((theta[v] - alpha) % (2 * math.pi), v))
        events.append(((theta[v] + math.pi - alpha) % (2 * math.pi), v))
    events.sort()
    for _, v in events:
        heads, _, weights = g.incident(v)
        same = weights[y[heads] == y[v]].sum()
        diff = weights[y[heads] != y[v]].sum()
        weight += same - diff
        y[v] ^= 1
        if weight > best_w + 1e-12:
            best_w, best_y = weight, y.copy()
    return CutSolution.from_assignment(g, best_y)


def kernighan_lin(g, solution: CutSolution) -> CutSolution:
    """Best-gain single-flip passes with locking; keeps the best pass prefix.

    Never returns a worse cut than its input.
    """
    y = solution.y.copy()
    best_total = solution.weight
    n = g.n
    while True:
        gains = np.zeros(n)
        for v in range(n):
            heads, _, weights = g.incident(v)
            if len(heads) == 0:
                gains[v] = -np.inf  # isolated vertices never help
                continue
            same = weights[y[heads] == y[v]].sum()
            diff = weights[y[heads] != y[v]].sum()
            gains[v] = same - diff
        locked = np.zeros(n, dtype=bool)
        locked[gains == -np.inf] = True
        trial = y.copy()
        running = best_total
        best_prefix_gain = 0.0
        best_prefix = 0
        flips = []
        while not locked.all():
            v = int(np.argmax(np.where(locked, -np.inf, gains)))
            if not np.isfinite(gains[v]):
                break
            running += gains[v]
            flips.append(v)
            locked[v] = True
            heads, _, weights = g.incident(v)
            trial_side = trial[v] ^ 1
            trial[v] = trial_side
            for u, w in zip(heads, weights):
                if locked[u]:
                    continue
                if trial[u] == trial_side:
                    gains[u] += 2 * w
                else:
                    gains[u] -= 2 * w
            gains[v] = -gains[v]
            if running - best_total > best_prefix_gain + 1e-12:
                best_prefix_gain = running - best_total
                best_prefix = len(flips)
        if best_prefix == 0:
            break
        for v in flips[:best_prefix]:
            y[v] ^= 1
        best_total += best_prefix_gain
    return CutSolution.from_assignment(g, y)


def burer_rank2(g, seed=0, init: CutSolution | None = None,
                restarts=DEFAULT_RESTARTS) -> CutSolution:
    """Angular rank-2 local search with diameter cut extraction and KL polish.

    A warm-start solution is mapped to angles 0 / pi and never worsened.
    """
    rng = np.random.default_rng(seed)
    if init is not None:
        theta = np.where(init.y == 0, 0.0, math.pi).astype(float)
        best = kernighan_lin(g, init)
    else:
        theta = rng.uniform(0.0, 2 * math.pi, size=g.n)
        best = None

    base = theta.copy()
    for attempt in range(max(1, restarts)):
        theta = base.copy()
        if attempt > 0:
            theta = (theta + rng.uniform(-PERTURBATION, PERTURBATION, size=g.n)) % (
                2 * math.pi
            )
        theta = _local_minimize(g, theta)
        cand = kernighan_lin(g, _best_diameter_cut(g, theta))
        if best is None or cand.weight > best.weight:
            best = cand
            base = np.where(cand.y == 0, 0.0, math.pi).astype(float)
    return best


def spanning_tree_rounding(g, x) -> CutSolution:
    """Round an LP point along a max-confidence spanning forest, then KL.

    Edge confidence is |x(e) - 1/2|; tree edges propagate the rounded value
    from the root, so integral LP points reproduce their cut exactly.
    """
    order = sorted(range(g.m), key=lambda e: (-abs(x[e] - 0.5), e))
    parent = list(range(g.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree_adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    for e in order:
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        parent[ru] = rv
        tree_adj[u].append((v, e))
        tree_adj[v].append((u, e))

    y = np.zeros(g.n, dtype=np.int8)
    seen = np.zeros(g.n, dtype=bool)
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [root]
        while stack:
            v = stack.pop()
            for u, e in tree_adj[v]:
                if seen[u]:
                    continue
                seen[u] = True
                y[u] = y[v] ^ (1 if x[e] >= 0.5 else 0)
                stack.append(u)
    return kernighan_lin(g, CutSolution.from_assignment(g, y))

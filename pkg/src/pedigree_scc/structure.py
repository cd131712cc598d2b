"""Strongly connected components and exploration statistics on a `Digraph`."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph_core import Digraph, GraphError

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class SccReport:
    """SCC partition with ids ordered by size, largest first.

    Ties in size are broken by the smallest vertex the component contains,
    so id 0 is always the giant component.
    """

    labels: np.ndarray
    sizes: np.ndarray
    n: int

    @property
    def giant_mask(self) -> np.ndarray:
        return self.labels == 0

    @property
    def giant_size(self) -> int:
        return int(self.sizes[0]) if len(self.sizes) else 0

    @property
    def giant_fraction(self) -> float:
        return self.giant_size / self.n if self.n else 0.0

    @property
    def second_size(self) -> int:
        return int(self.sizes[1]) if len(self.sizes) > 1 else 0

    @property
    def count(self) -> int:
        return len(self.sizes)


def _tarjan(n: int, offsets, targets) -> tuple[list[int], int]:
    """Iterative Tarjan; returns raw labels in emission order (sinks first)."""
    offsets = offsets.tolist() if isinstance(offsets, np.ndarray) else offsets
    targets = targets.tolist() if isinstance(targets, np.ndarray) else targets
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    ptr = offsets[:-1]
    comp = [-1] * n
    stack = []
    ncomp = 0
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [root]
        while work:
            v = work[-1]
            i = ptr[v]
            if i < offsets[v + 1]:
                ptr[v] = i + 1
                w = targets[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append(w)
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comp, ncomp


def scc_decompose(g: Digraph) -> SccReport:
    raw, ncomp = _tarjan(g.n, g.out_offsets, g.out_targets)
    raw = np.asarray(raw, dtype=np.int64)
    sizes = np.bincount(raw, minlength=ncomp)
    min_vertex = np.full(ncomp, g.n, dtype=np.int64)
    np.minimum.at(min_vertex, raw, np.arange(g.n))
    order = np.lexsort((min_vertex, -sizes))
    rank = np.empty(ncomp, dtype=np.int64)
    rank[order] = np.arange(ncomp)
    return SccReport(labels=rank[raw], sizes=sizes[order], n=g.n)


@dataclass(frozen=True)
class FanReport:
    root: int
    direction: str
    vertex_count: int
    edge_count: int
    revisit_steps: int
    vertices: np.ndarray


def _adjacency(g: Digraph, direction: str):
    if direction == FORWARD:
        return g.out_offsets, g.out_targets
    if direction == BACKWARD:
        return g.in_offsets, g.in_sources
    raise ValueError(f"direction must be {FORWARD!r} or {BACKWARD!r}, got {direction!r}")


def fan(g: Digraph, v: int, direction: str = FORWARD, max_steps: int | None = None) -> FanReport:
    """Breadth-first fan-out (``forward``) or fan-in (``backward``) of ``v``.

    Every edge examined is one exploration step; a step that lands on an
    already discovered vertex counts as a revisit. With ``max_steps`` the
    exploration stops after that many steps.
    """
    if not 0 <= v < g.n:
        raise GraphError(f"vertex {v} out of range for n={g.n}")
    offsets, nbrs = _adjacency(g, direction)
    seen = {v}
    queue = deque([v])
    steps = revisits = 0
    limit = float("inf") if max_steps is None else max_steps
    while queue and steps < limit:
        u = queue.popleft()
        for w in nbrs[offsets[u] : offsets[u + 1]].tolist():
            if steps >= limit:
                break
            steps += 1
            if w in seen:
                revisits += 1
            else:
                seen.add(w)
                queue.append(w)
    return FanReport(v, direction, len(seen), steps, revisits, np.array(sorted(seen), dtype=np.int64))


def distance_to_set(g: Digraph, v: int, target_mask) -> int | None:
    """Fewest edges on a directed path from ``v`` into the mask; None if unreachable."""
    target_mask = np.asarray(target_mask, dtype=bool)
    if target_mask[v]:
        return 0
    offsets, nbrs = g.out_offsets, g.out_targets
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in nbrs[offsets[u] : offsets[u + 1]].tolist():
            if w in dist:
                continue
            if target_mask[w]:
                return dist[u] + 1
            dist[w] = dist[u] + 1
            queue.append(w)
    return None


def _gather(offsets, nbrs, vertices):
    starts = offsets[vertices]
    lengths = offsets[vertices + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    shift = np.repeat(starts - np.concatenate(([0], np.cumsum(lengths)[:-1])), lengths)
    return nbrs[shift + np.arange(total)]


def distances_to_set(g: Digraph, target_mask) -> np.ndarray:
    """Distance from every vertex into the mask (-1 when unreachable), by reverse BFS."""
    target_mask = np.asarray(target_mask, dtype=bool)
    dist = np.full(g.n, -1, dtype=np.int64)
    frontier = np.flatnonzero(target_mask)
    dist[frontier] = 0
    offsets, nbrs = g.in_offsets, g.in_sources
    d = 0
    while frontier.size:
        d += 1
        cand = np.unique(_gather(offsets, nbrs, frontier))
        cand = cand[dist[cand] == -1]
        dist[cand] = d
        frontier = cand
    return dist


def reachable_avoiding(g: Digraph, v: int, forbidden_mask) -> int:
    """Number of vertices reachable from ``v`` without entering the forbidden set."""
    forbidden_mask = np.asarray(forbidden_mask, dtype=bool)
    if forbidden_mask[v]:
        raise GraphError(f"start vertex {v} is forbidden")
    return len(_closure_avoiding(g, v, forbidden_mask))


def _closure_avoiding(g, v, forbidden):
    offsets, nbrs = g.out_offsets, g.out_targets
    seen = {v}
    queue = [v]
    while queue:
        u = queue.pop()
        for w in nbrs[offsets[u] : offsets[u + 1]].tolist():
            if w not in seen and not forbidden[w]:
                seen.add(w)
                queue.append(w)
    return seen


def max_reachable_avoiding(g: Digraph, mask) -> int:
    """Largest `reachable_avoiding` count over all vertices outside ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    forbidden = mask.tolist()
    best = 0
    for v in np.flatnonzero(~mask).tolist():
        best = max(best, len(_closure_avoiding(g, v, forbidden)))
    return best


def edges_leaving_set(g: Digraph, mask) -> int:
    mask = np.asarray(mask, dtype=bool)
    return int(np.count_nonzero(mask[g.sources] & ~mask[g.targets]))


def edges_entering_set(g: Digraph, mask) -> int:
    mask = np.asarray(mask, dtype=bool)
    return int(np.count_nonzero(~mask[g.sources] & mask[g.targets]))


@dataclass(frozen=True)
class FanDichotomy:
    threshold: float
    edge_counts: np.ndarray
    small_fraction: float
    large_fraction: float
    large_mean_over_n: float
    gap_violations: int


def backward_fan_sizes(g: Digraph) -> tuple[np.ndarray, np.ndarray]:
    """Vertex and edge counts of every vertex's fan-in, computed once per SCC.

    Fan-ins are propagated along the condensation in topological order as
    integer bitsets, so memory grows like N^2/8 bytes in the worst case.
    """
    n = g.n
    raw, ncomp = _tarjan(n, g.out_offsets, g.out_targets)
    in_deg = np.diff(g.in_offsets)
    deg_masks = {}
    for k in np.unique(in_deg).tolist():
        if k:
            deg_masks[k] = int.from_bytes(np.packbits(in_deg == k, bitorder="little").tobytes(), "little")
    members = [[] for _ in range(ncomp)]
    for u, c in enumerate(raw):
        members[c].append(u)
    in_offsets = g.in_offsets.tolist()
    in_sources = g.in_sources.tolist()
    bits = [0] * ncomp
    counts = [0] * ncomp
    sizes = [0] * ncomp
    # Tarjan emits sinks first, so predecessors come later in emission order
    for c in range(ncomp - 1, -1, -1):
        acc = 0
        for u in members[c]:
            acc |= 1 << u
            for i in range(in_offsets[u], in_offsets[u + 1]):
                d = raw[in_sources[i]]
                if d != c:
                    acc |= bits[d]
        bits[c] = acc
        counts[c] = sum(k * (acc & m).bit_count() for k, m in deg_masks.items())
        sizes[c] = acc.bit_count()
    return (
        np.asarray([sizes[c] for c in raw], dtype=np.int64),
        np.asarray([counts[c] for c in raw], dtype=np.int64),
    )


def fan_dichotomy_histogram(g: Digraph, threshold: float | None = None) -> FanDichotomy:
    """Split fan-in edge counts into small (< threshold) and large.

    The default threshold is ``N^(2/3)``. ``gap_violations`` counts fans with
    edge count in ``[threshold, N/2]``.
    """
    n = g.n
    if threshold is None:
        threshold = n ** (2 / 3)
    _, counts = backward_fan_sizes(g)
    small = counts < threshold
    large = ~small
    gap = np.count_nonzero((counts >= threshold) & (counts <= n / 2))
    return FanDichotomy(
        threshold=float(threshold),
        edge_counts=counts,
        small_fraction=float(small.mean()) if n else 0.0,
        large_fraction=float(large.mean()) if n else 0.0,
        large_mean_over_n=float(counts[large].mean() / n) if large.any() else 0.0,
        gap_violations=int(gap),
    )

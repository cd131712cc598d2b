"""Directed multigraph storage for pedigree digraphs.

Graphs are kept as an edge list in slot order (vertex 0 slot 1, vertex 0
slot 2, vertex 1 slot 1, ...). Loops and parallel edges are allowed. The
in-adjacency is built on first use and cached.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Raised when a graph violates a construction or operation contract."""


@dataclass(frozen=True)
class DegreeSequence:
    in_deg: np.ndarray
    out_deg: np.ndarray

    def __post_init__(self):
        in_deg = np.asarray(self.in_deg, dtype=np.int64)
        out_deg = np.asarray(self.out_deg, dtype=np.int64)
        if in_deg.shape != out_deg.shape or in_deg.ndim != 1:
            raise GraphError("in_deg and out_deg must be 1-d vectors of equal length")
        if (in_deg < 0).any() or (out_deg < 0).any():
            raise GraphError("degrees must be nonnegative")
        object.__setattr__(self, "in_deg", in_deg)
        object.__setattr__(self, "out_deg", out_deg)

    @property
    def n(self) -> int:
        return len(self.in_deg)

    @property
    def total_in(self) -> int:
        return int(self.in_deg.sum())

    @property
    def total_out(self) -> int:
        return int(self.out_deg.sum())


class Digraph:
    """Immutable directed multigraph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    sources, targets : array_like of int
        Edge endpoints, one entry per edge, in slot order.

    Notes
    -----
    ``out_offsets``/``out_targets`` form a CSR view of the out-slots with
    slot order preserved within each vertex. ``in_offsets``/``in_sources``
    form the reverse index and are computed once, under a lock.
    """

    __slots__ = (
        "n",
        "sources",
        "targets",
        "out_offsets",
        "out_targets",
        "_in_offsets",
        "_in_sources",
        "_lock",
    )

    def __init__(self, n, sources, targets):
        sources = np.ascontiguousarray(sources, dtype=np.int64)
        targets = np.ascontiguousarray(targets, dtype=np.int64)
        if sources.shape != targets.shape or sources.ndim != 1:
            raise GraphError("sources and targets must be 1-d arrays of equal length")
        if n < 0:
            raise GraphError(f"vertex count must be nonnegative, got {n}")
        bad = (sources < 0) | (sources >= n) | (targets < 0) | (targets >= n)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise GraphError(
                f"endpoint out of range at edge {i}: "
                f"({int(sources[i])}, {int(targets[i])}) with n={n}"
            )
        sources.setflags(write=False)
        targets.setflags(write=False)
        self.n = int(n)
        self.sources = sources
        self.targets = targets
        # stable sort keeps slot order inside each vertex
        order = np.argsort(sources, kind="stable")
        counts = np.bincount(sources, minlength=self.n)
        self.out_offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.out_targets = targets[order]
        self.out_offsets.setflags(write=False)
        self.out_targets.setflags(write=False)
        self._in_offsets = None
        self._in_sources = None
        self._lock = threading.Lock()

    @property
    def m(self) -> int:
        return len(self.sources)

    def __repr__(self):
        return f"Digraph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.targets, other.targets)
        )

    __hash__ = None

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.sources.tolist(), self.targets.tolist()))

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.out_targets[self.out_offsets[v] : self.out_offsets[v + 1]]

    def _build_reverse(self):
        with self._lock:
            if self._in_offsets is not None:
                return
            order = np.argsort(self.targets, kind="stable")
            counts = np.bincount(self.targets, minlength=self.n)
            offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
            in_sources = self.sources[order]
            offsets.setflags(write=False)
            in_sources.setflags(write=False)
            self._in_sources = in_sources
            self._in_offsets = offsets

    @property
    def in_offsets(self) -> np.ndarray:
        if self._in_offsets is None:
            self._build_reverse()
        return self._in_offsets

    @property
    def in_sources(self) -> np.ndarray:
        if self._in_sources is None:
            self._build_reverse()
        return self._in_sources

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.in_sources[self.in_offsets[v] : self.in_offsets[v + 1]]

    def two_out_slots(self) -> np.ndarray:
        """Return an ``(n, 2)`` array of out-slot targets.

        Raises `GraphError` unless every vertex has out-degree exactly 2.
        """
        require_two_out(self)
        return self.out_targets.reshape(self.n, 2)


def build_digraph(n: int, edges) -> Digraph:
    """Build a `Digraph` from an iterable of ``(source, target)`` pairs."""
    arr = np.asarray(list(edges), dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError("edges must be (source, target) pairs")
    return Digraph(n, arr[:, 0], arr[:, 1])


def degree_sequence(g: Digraph) -> DegreeSequence:
    return DegreeSequence(
        in_deg=np.bincount(g.targets, minlength=g.n),
        out_deg=np.bincount(g.sources, minlength=g.n),
    )


def require_two_out(g: Digraph) -> None:
    out_deg = np.diff(g.out_offsets)
    if g.n == 0 or (out_deg != 2).any():
        bad = np.flatnonzero(out_deg != 2)
        where = f" (vertex {int(bad[0])} has out-degree {int(out_deg[bad[0]])})" if bad.size else ""
        raise GraphError(f"operation requires every out-degree to be 2{where}")


def double_edge_vertex_count(g: Digraph) -> int:
    """Count vertices whose two out-slots point at the same vertex."""
    slots = g.two_out_slots()
    return int(np.count_nonzero(slots[:, 0] == slots[:, 1]))


def write_edge_list(g: Digraph, path) -> None:
    """Write ``g`` as ``N M`` followed by one ``u v`` line per edge."""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in zip(g.sources.tolist(), g.targets.tolist()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_edge_list(path) -> Digraph:
    text = Path(path).read_text(encoding="ascii")
    rows = text.split("\n")
    header = rows[0].split()
    if len(header) != 2:
        raise GraphError(f"{path}: header must be 'N M', got {rows[0]!r}")
    n, m = int(header[0]), int(header[1])
    body = [r for r in rows[1:] if r.strip()]
    if len(body) != m:
        raise GraphError(f"{path}: header declares {m} edges but file has {len(body)}")
    if m == 0:
        return Digraph(n, [], [])
    arr = np.array([r.split() for r in body], dtype=np.int64)
    if arr.shape != (m, 2):
        raise GraphError(f"{path}: every edge line must hold two integers")
    return Digraph(n, arr[:, 0], arr[:, 1])

"""Random pedigree digraphs: the cyclical model and the directed configuration model.

Every sampler takes an `RngSpec`. The generator for a spec is seeded from
``numpy.random.SeedSequence([seed, replicate, tag_word])`` where ``tag_word``
is the first 8 bytes (big-endian) of ``sha256(purpose_tag)``. Any other
implementation can rebuild the same stream from those three numbers.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, product

import numpy as np

from .graph_core import DegreeSequence, Digraph, GraphError, double_edge_vertex_count


@dataclass(frozen=True)
class RngSpec:
    seed: int
    replicate: int = 0
    purpose_tag: str = "graph"

    def seed_sequence(self) -> np.random.SeedSequence:
        tag_word = int.from_bytes(hashlib.sha256(self.purpose_tag.encode()).digest()[:8], "big")
        return np.random.SeedSequence([self.seed & (2**64 - 1), self.replicate, tag_word])

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def derive(self, purpose_tag: str) -> "RngSpec":
        return RngSpec(self.seed, self.replicate, purpose_tag)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngSpec or numpy Generator, got {type(rng).__name__}")


def _check_n(n):
    if n < 1:
        raise GraphError(f"population size must be at least 1, got {n}")


def sample_wcm(n: int, rng) -> Digraph:
    """Sample the cyclical-model digraph: every vertex draws two uniform parents."""
    _check_n(n)
    gen = _as_generator(rng)
    parents = gen.integers(0, n, size=(n, 2))
    return Digraph(n, np.repeat(np.arange(n), 2), parents.ravel())


def sample_multinomial_indegrees(n: int, rng) -> np.ndarray:
    """Draw ``(Y_1, ..., Y_n) ~ Mult(2n; 1/n, ..., 1/n)``."""
    _check_n(n)
    gen = _as_generator(rng)
    return gen.multinomial(2 * n, np.full(n, 1.0 / n))


def sample_dcm(degrees: DegreeSequence, rng) -> Digraph:
    """Uniformly match out-half-edges to in-half-edges.

    The in-half-edge list (vertex ``j`` repeated ``in_deg[j]`` times) is
    shuffled and paired positionally with the out-half-edges in slot order.
    """
    if degrees.total_in != degrees.total_out:
        raise GraphError(
            f"degree sums differ: sum(in)={degrees.total_in}, sum(out)={degrees.total_out}"
        )
    gen = _as_generator(rng)
    n = degrees.n
    out_half = np.repeat(np.arange(n), degrees.out_deg)
    in_half = np.repeat(np.arange(n), degrees.in_deg)
    return Digraph(n, out_half, gen.permutation(in_half))


def sample_dcm_multinomial(n: int, rng) -> Digraph:
    """Two-stage sampler: multinomial in-degrees, then a uniform matching."""
    gen = _as_generator(rng)
    in_deg = sample_multinomial_indegrees(n, gen)
    return sample_dcm(DegreeSequence(in_deg, np.full(n, 2)), gen)


@dataclass(frozen=True)
class GraphProbability:
    log: float
    value: float | None


def graph_probability(g: Digraph) -> GraphProbability:
    """Exact probability of ``g`` under the cyclical model, ``2^(N - n(G)) N^(-2N)``.

    ``value`` is None when the probability is below the smallest normal float.
    """
    doubled = double_edge_vertex_count(g)
    n = g.n
    log_p = (n - doubled) * math.log(2.0) - 2 * n * math.log(n)
    value = math.exp(log_p)
    if value < np.finfo(float).tiny:
        value = None
    return GraphProbability(log_p, value)


# -- small-N helpers for distributional tests --------------------------------


def sample_wcm_targets(n: int, size: int, rng) -> np.ndarray:
    """Batch of ``size`` cyclical-model graphs as an ``(size, 2n)`` target array."""
    _check_n(n)
    gen = _as_generator(rng)
    return gen.integers(0, n, size=(size, 2 * n))


def sample_dcm_multinomial_targets(n: int, size: int, rng) -> np.ndarray:
    """Batch version of `sample_dcm_multinomial`, same layout as `sample_wcm_targets`."""
    _check_n(n)
    gen = _as_generator(rng)
    s = 2 * n
    in_deg = gen.multinomial(s, np.full(n, 1.0 / n), size=size)
    # sorted in-half-edge labels: position p belongs to the first j with cumsum[j] > p
    cum = np.cumsum(in_deg, axis=1)
    pos = np.arange(s)
    labels = (pos[None, :, None] >= cum[:, None, :]).sum(axis=2)
    perm = np.argsort(gen.random((size, s)), axis=1)
    return np.take_along_axis(labels, perm, axis=1)


def canonical_codes(targets: np.ndarray, n: int) -> np.ndarray:
    """Encode 2-out graphs ignoring slot order within each vertex.

    Each vertex's sorted target pair is mapped to a pair index, and the
    per-vertex indices are read as digits of a base ``n*n`` integer.
    """
    t = np.asarray(targets).reshape(-1, n, 2)
    lo = np.minimum(t[..., 0], t[..., 1])
    hi = np.maximum(t[..., 0], t[..., 1])
    digit = lo * n + hi
    weights = (n * n) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (digit * weights).sum(axis=-1)


def enumerate_two_out_graphs(n: int):
    """Yield every 2-out multigraph on ``n`` vertices up to slot order."""
    _check_n(n)
    pairs = list(combinations_with_replacement(range(n), 2))
    for choice in product(pairs, repeat=n):
        targets = [t for pair in choice for t in pair]
        yield Digraph(n, np.repeat(np.arange(n), 2), targets)

"""Coalescing lineage pairs on a fixed or freshly drawn pedigree.

Two meeting rules are supported for co-located lineages:

``bernoulli_half``
    Lineages that land on the same individual coalesce with probability
    1/2. If they do not, the next step they leave along the two distinct
    parent slots (which may still point to one parent when the edge is
    doubled, in which case they meet again).
``independent_edges``
    Co-located lineages pick parent slots independently and coalesce
    exactly when they pick the same slot.

In ``cyclical`` mode the parents come from a fixed 2-out `Digraph`. In
``independent`` mode every individual in every generation draws a fresh
uniform parent pair, shared only by lineages sitting in that individual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .generate import RngSpec
from .graph_core import Digraph, GraphError

CYCLICAL = "cyclical"
INDEPENDENT = "independent"
BERNOULLI_HALF = "bernoulli_half"
INDEPENDENT_EDGES = "independent_edges"


@dataclass(frozen=True)
class WalkConfig:
    mode: str = CYCLICAL
    pairs: int = 1000
    t_max: int = 100
    meeting_rule: str = BERNOULLI_HALF
    rng: RngSpec = field(default_factory=lambda: RngSpec(0, 0, "walk"))
    distinct_start: bool = False

    def __post_init__(self):
        if self.pairs < 1 or self.t_max < 1:
            raise ValueError("pairs and t_max must both be at least 1")
        if self.mode not in (CYCLICAL, INDEPENDENT):
            raise ValueError(f"unknown walk mode {self.mode!r}")
        if self.meeting_rule not in (BERNOULLI_HALF, INDEPENDENT_EDGES):
            raise ValueError(f"unknown meeting rule {self.meeting_rule!r}")


@dataclass(frozen=True)
class CoalescenceRecords:
    """Per-pair outcome of one simulation run.

    ``generation[i]`` is the 1-based generation in which pair ``i``
    coalesced, or -1 if it was still separate after ``t_max`` generations.
    ``start`` holds the two starting individuals of each pair.
    """

    generation: np.ndarray
    t_max: int
    replicate: int = 0
    start: np.ndarray | None = None

    @property
    def censored(self) -> np.ndarray:
        return self.generation < 0

    @property
    def pairs(self) -> int:
        return len(self.generation)


def simulate_pairs(g: Digraph | None, n: int, cfg: WalkConfig) -> CoalescenceRecords:
    if cfg.mode == CYCLICAL:
        if g is None:
            raise GraphError("cyclical mode needs a pedigree digraph")
        if g.n != n:
            raise GraphError(f"digraph has {g.n} vertices, expected {n}")
        slots = g.two_out_slots()
    else:
        slots = None
        if n < 1:
            raise GraphError(f"population size must be at least 1, got {n}")
    if cfg.distinct_start and n < 2:
        raise GraphError("distinct starts need at least two individuals")

    gen = cfg.rng.generator()
    p = cfg.pairs
    a = gen.integers(0, n, p)
    b = gen.integers(0, n, p)
    if cfg.distinct_start:
        clash = np.flatnonzero(a == b)
        while clash.size:
            b[clash] = gen.integers(0, n, clash.size)
            clash = clash[a[clash] == b[clash]]
    start = np.stack([a, b], axis=1)
    coloc = a == b
    result = np.full(p, -1, dtype=np.int64)
    alive = np.arange(p)

    for t in range(1, cfg.t_max + 1):
        if alive.size == 0:
            break
        m = alive.size
        pa, pb, together = a[alive], b[alive], coloc[alive]
        if slots is not None:
            slots_a, slots_b = slots[pa], slots[pb]
        else:
            slots_a = gen.integers(0, n, (m, 2))
            slots_b = np.where(together[:, None], slots_a, gen.integers(0, n, (m, 2)))
        ra = gen.integers(0, 2, m)
        rb = gen.integers(0, 2, m)
        rows = np.arange(m)
        if cfg.meeting_rule == BERNOULLI_HALF:
            rb = np.where(together, 1 - ra, rb)
            na, nb = slots_a[rows, ra], slots_b[rows, rb]
            same = na == nb
            merged = same & (gen.random(m) < 0.5)
            together = same & ~merged
        else:
            na, nb = slots_a[rows, ra], slots_b[rows, rb]
            merged = together & (ra == rb)
            together = (na == nb) & ~merged
        result[alive[merged]] = t
        a[alive], b[alive], coloc[alive] = na, nb, together
        alive = alive[~merged]

    return CoalescenceRecords(result, cfg.t_max, cfg.rng.replicate, start)


@dataclass(frozen=True)
class HazardCurve:
    k: np.ndarray
    survivors: np.ndarray
    absorbed: np.ndarray
    hazard: np.ndarray
    stderr: np.ndarray
    per_replicate: np.ndarray

    def mean_over(self, k_lo: int, k_hi: int) -> float:
        """Average of the pooled hazard over generations ``k_lo..k_hi`` inclusive."""
        sel = (self.k >= k_lo) & (self.k <= k_hi)
        vals = self.hazard[sel]
        vals = vals[~np.isnan(vals)]
        return float(vals.mean()) if vals.size else math.nan

    def rows(self) -> list[dict]:
        out = []
        for k, s, a, h, e in zip(self.k, self.survivors, self.absorbed, self.hazard, self.stderr):
            out.append({
                "k": int(k),
                "survivors": int(s),
                "absorbed": int(a),
                "hazard": None if math.isnan(h) else float(h),
                "stderr": None if math.isnan(e) else float(e),
            })
        return out


def _counts(records: CoalescenceRecords, t_max: int):
    gen = records.generation
    absorbed = np.bincount(gen[gen > 0], minlength=t_max + 1)[1 : t_max + 1]
    # at risk in generation k: not absorbed before k
    absorbed_before = np.concatenate(([0], np.cumsum(absorbed)[:-1]))
    return records.pairs - absorbed_before, absorbed


def hazard_curve(records, t_max: int) -> HazardCurve:
    """Pooled hazard ``absorbed_k / at_risk_k`` over all runs in ``records``.

    Censored pairs stay at risk through ``t_max``. Generations with nobody
    at risk get NaN.
    """
    if isinstance(records, CoalescenceRecords):
        records = [records]
    if not records:
        raise ValueError("need at least one set of records")
    survivors = np.zeros(t_max, dtype=np.int64)
    absorbed = np.zeros(t_max, dtype=np.int64)
    per_rep = np.full((len(records), t_max), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        for i, rec in enumerate(records):
            s, a = _counts(rec, t_max)
            survivors += s
            absorbed += a
            per_rep[i] = np.where(s > 0, a / np.maximum(s, 1), np.nan)
        hazard = np.where(survivors > 0, absorbed / np.maximum(survivors, 1), np.nan)
        stderr = np.sqrt(hazard * (1 - hazard) / survivors)
    return HazardCurve(np.arange(1, t_max + 1), survivors, absorbed, hazard, stderr, per_rep)


class StationaryConvergenceError(RuntimeError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"power iteration did not converge in {iterations} iterations "
            f"(last change {residual:.3e}); the chain may be periodic, try damping"
        )
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    residual: float
    iterations: int


def _step(g, pi):
    return np.bincount(g.targets, weights=0.5 * pi[g.sources], minlength=g.n)


def stationary_distribution(
    g: Digraph,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    damping: float = 0.0,
    start=None,
) -> StationaryDistribution:
    """Stationary law of the simple random walk along out-slots.

    Iterates ``pi <- (1 - damping) pi P + damping pi`` from the uniform law
    (or ``start``) until successive iterates are within ``tol`` in total
    variation. ``residual`` is the L1 norm of ``pi P - pi`` for the result.
    """
    g.two_out_slots()
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must lie in [0, 1), got {damping}")
    pi = np.full(g.n, 1.0 / g.n) if start is None else np.asarray(start, dtype=float).copy()
    change = math.inf
    for it in range(1, max_iters + 1):
        nxt = _step(g, pi)
        if damping:
            nxt = (1.0 - damping) * nxt + damping * pi
        nxt /= nxt.sum()
        change = 0.5 * np.abs(nxt - pi).sum()
        pi = nxt
        if change <= tol:
            residual = float(np.abs(_step(g, pi) - pi).sum())
            return StationaryDistribution(pi, residual, it)
    raise StationaryConvergenceError(max_iters, change)

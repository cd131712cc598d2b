"""Empirical in-degree law, its weighted distance to Poisson(2), and properness checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph_core import DegreeSequence, Digraph, GraphError, degree_sequence

POISSON_TAIL_EPS = 1e-15


@dataclass(frozen=True)
class EmpiricalInDegree:
    xi: np.ndarray
    n: int

    @classmethod
    def from_degrees(cls, in_deg) -> "EmpiricalInDegree":
        in_deg = np.asarray(in_deg, dtype=np.int64)
        n = len(in_deg)
        return cls(np.bincount(in_deg) / n, n)

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.xi)), self.xi))


@dataclass(frozen=True)
class WeightSequence:
    """Positive nondecreasing weights ``k -> l_k``."""

    weight: Callable[[int], float]
    name: str = "custom"

    def __call__(self, k: int) -> float:
        return self.weight(k)

    @classmethod
    def squared(cls) -> "WeightSequence":
        return cls(lambda k: float((k + 1) ** 2), "squared")

    @classmethod
    def unit(cls) -> "WeightSequence":
        return cls(lambda k: 1.0, "unit")


def empirical_in_degree(g: Digraph) -> EmpiricalInDegree:
    return EmpiricalInDegree.from_degrees(degree_sequence(g).in_deg)


def poisson2_pmf(k: int) -> float:
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return math.exp(-2.0 + k * math.log(2.0) - math.lgamma(k + 1))


def weighted_distance(xi: EmpiricalInDegree, weights: WeightSequence | None = None) -> float:
    """``sum_k l_k |xi_k - P(Poisson(2) = k)|`` with ``xi_k = 0`` past its support.

    The Poisson tail beyond the support is summed until a term drops below
    1e-15.
    """
    if weights is None:
        weights = WeightSequence.squared()
    total = 0.0
    for k, x in enumerate(np.asarray(xi.xi, dtype=float)):
        total += weights(k) * abs(x - poisson2_pmf(k))
    k = len(xi.xi)
    while True:
        term = weights(k) * poisson2_pmf(k)
        total += term
        if term < POISSON_TAIL_EPS and k > 2:
            break
        k += 1
    return total


def max_degree(degrees: DegreeSequence) -> int:
    if degrees.n == 0:
        return 0
    return int(max(degrees.in_deg.max(), degrees.out_deg.max()))


@dataclass(frozen=True)
class ProperReport:
    second_moment: float
    k_bound: float
    c1: bool
    max_degree: int
    delta_rule: str
    delta_bound: float
    c2: bool

    @property
    def proper(self) -> bool:
        return self.c1 and self.c2

    def as_dict(self) -> dict:
        return {
            "second_moment": self.second_moment,
            "k_bound": self.k_bound,
            "c1": self.c1,
            "max_degree": self.max_degree,
            "delta_rule": self.delta_rule,
            "delta_bound": self.delta_bound,
            "c2": self.c2,
            "proper": self.proper,
        }


def check_proper(degrees: DegreeSequence, k_bound: float = 10.0, delta_rule: str = "log_n") -> ProperReport:
    """Check the second-moment and maximal-degree conditions for a 2-out sequence.

    ``delta_rule="paper_c2"`` uses ``N^(1/12) / log N``, which no graph with
    N up to about 1e9 can meet; ``"log_n"`` uses ``log N``.
    """
    if (degrees.out_deg != 2).any():
        raise GraphError("properness is defined for constant out-degree 2")
    n = degrees.n
    xi = EmpiricalInDegree.from_degrees(degrees.in_deg)
    k = np.arange(len(xi.xi))
    second = float(np.dot(k * k, xi.xi))
    log_n = math.log(n) if n > 1 else 0.0
    if delta_rule == "log_n":
        bound = log_n
    elif delta_rule == "paper_c2":
        bound = n ** (1 / 12) / log_n if n > 1 else 0.0
    else:
        raise ValueError(f"unknown delta_rule {delta_rule!r}")
    delta = max_degree(degrees)
    return ProperReport(second, k_bound, second <= k_bound, delta, delta_rule, bound, delta <= bound)

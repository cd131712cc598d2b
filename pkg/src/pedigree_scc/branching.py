"""Galton-Watson survival probabilities and the constants derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OffspringPmf:
    """Offspring law, either a finite pmf vector or the analytic Poisson(2).

    Use `OffspringPmf.poisson2()` for the analytic law; its generating
    function is evaluated as ``exp(2x - 2)``.
    """

    pmf: np.ndarray | None = None
    analytic: str | None = None

    def __post_init__(self):
        if self.analytic is None:
            pmf = np.asarray(self.pmf, dtype=float)
            if pmf.ndim != 1 or len(pmf) == 0:
                raise ValueError("pmf must be a nonempty vector")
            if (pmf < 0).any() or abs(pmf.sum() - 1.0) > 1e-12:
                raise ValueError("pmf must be nonnegative and sum to 1")
            object.__setattr__(self, "pmf", pmf)
        elif self.analytic != "poisson2":
            raise ValueError(f"unknown analytic law {self.analytic!r}")

    @classmethod
    def poisson2(cls) -> "OffspringPmf":
        return cls(analytic="poisson2")

    @property
    def p0(self) -> float:
        if self.analytic == "poisson2":
            return math.exp(-2.0)
        return float(self.pmf[0])

    @property
    def mean(self) -> float:
        if self.analytic == "poisson2":
            return 2.0
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))


def pgf(law: OffspringPmf, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"pgf argument must lie in [0, 1], got {x}")
    if law.analytic == "poisson2":
        return math.exp(2.0 * x - 2.0)
    acc = 0.0
    for c in law.pmf[::-1]:
        acc = acc * x + c
    return float(acc)


def survival_probability(law: OffspringPmf, tol: float = 1e-12) -> float:
    """Survival probability ``x*`` of the branching process.

    Bisects ``f(y) - y`` on ``[tol, 1 - tol]`` for the extinction probability
    ``y = 1 - x*`` and returns ``1 - y``.
    """
    if law.mean <= 1.0:
        raise ValueError(f"no root in (0,1): offspring mean {law.mean} is not supercritical")
    if law.p0 <= 0.0:
        raise ValueError("no root in (0,1): extinction is impossible when P(0 offspring) = 0")
    lo, hi = tol, 1.0 - tol
    g_lo = pgf(law, lo) - lo
    g_hi = pgf(law, hi) - hi
    if g_lo <= 0 or g_hi >= 0:
        raise ValueError("no root in (0,1): tolerance too coarse to bracket the fixed point")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pgf(law, mid) - mid > 0:
            lo = mid
        else:
            hi = mid
    return 1.0 - 0.5 * (lo + hi)


def second_scc_constant(x_star: float) -> float:
    """``2 / -log(4 x* (1 - x*))``, the log N prefactor bounding small components."""
    if not 0.5 < x_star < 1.0:
        raise ValueError(f"x_star must lie in (1/2, 1), got {x_star}")
    return 2.0 / -math.log(4.0 * x_star * (1.0 - x_star))


def path_length_bound(n: int) -> float:
    if n < 3:
        raise ValueError(f"path length bound needs n >= 3, got {n}")
    return math.log(math.log(n)) / math.log(2.0)


def edges_into_giant_constant(x_star: float) -> float:
    return 2.0 * x_star * (1.0 - x_star)

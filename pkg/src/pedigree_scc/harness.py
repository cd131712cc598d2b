"""Replicated Monte Carlo experiments with pass/fail judgement and flat-file reports.

Each replicate ``r`` of an experiment with seed ``s`` draws its pedigree from
``RngSpec(s, r, "graph")`` and its lineage walks from ``RngSpec(s, r, "walk")``
(``"walk-independent"`` for the fresh-pedigree control), so a single
replicate can be re-run on its own.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import branching, degree_stats, generate, structure, walks

SCHEMA_VERSION = 1
WORKERS_ENV = "PEDIGREE_SCC_WORKERS"

CLAIMS = (
    "giant",
    "second_scc",
    "paths",
    "reachable",
    "out_edges",
    "in_edges",
    "indegree",
    "equivalence",
    "hazard",
    "stationary",
)

X_STAR = branching.survival_probability(branching.OffspringPmf.poisson2())
SECOND_SCC_C = branching.second_scc_constant(X_STAR)
IN_EDGE_C = branching.edges_into_giant_constant(X_STAR)


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    claim: str
    n_values: tuple[int, ...]
    replicates: int = 30
    seed: int = 0
    output: str | None = None
    format: str = "json"
    pairs: int = 10_000
    t_max: int = 100
    samples: int = 1_000_000
    workers: int | None = None

    def __post_init__(self):
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim {self.claim!r}; choose from {', '.join(CLAIMS)}")
        ns = tuple(int(n) for n in self.n_values)
        if not ns or list(ns) != sorted(ns):
            raise ValueError("n_values must be nonempty and ascending")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        object.__setattr__(self, "n_values", ns)


@dataclass
class ClaimReport:
    claim: str
    seed: int
    rows: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rows)

    def as_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "claim": self.claim, "seed": self.seed,
                "passed": self.passed, "rows": self.rows}


# -- per-replicate statistics ------------------------------------------------


def _graph(n, seed, rep):
    g = generate.sample_wcm(n, generate.RngSpec(seed, rep, "graph"))
    return g, structure.scc_decompose(g)


def _rep_giant(n, seed, rep, cfg):
    _, scc = _graph(n, seed, rep)
    return {"value": scc.giant_fraction}


def _rep_second(n, seed, rep, cfg):
    _, scc = _graph(n, seed, rep)
    return {"value": scc.second_size}


def _rep_paths(n, seed, rep, cfg):
    g, scc = _graph(n, seed, rep)
    dist = structure.distances_to_set(g, scc.giant_mask)
    outside = dist[~scc.giant_mask]
    if (outside < 0).any():
        return {"value": math.inf}
    return {"value": int(outside.max()) if outside.size else 0}


def _rep_reachable(n, seed, rep, cfg):
    g, scc = _graph(n, seed, rep)
    return {"value": structure.max_reachable_avoiding(g, scc.giant_mask)}


def _rep_out_edges(n, seed, rep, cfg):
    g, scc = _graph(n, seed, rep)
    return {"value": structure.edges_leaving_set(g, scc.giant_mask)}


def _rep_in_edges(n, seed, rep, cfg):
    g, scc = _graph(n, seed, rep)
    return {"value": structure.edges_entering_set(g, scc.giant_mask) / (IN_EDGE_C * n)}


def _rep_indegree(n, seed, rep, cfg):
    g = generate.sample_wcm(n, generate.RngSpec(seed, rep, "graph"))
    return {"value": degree_stats.weighted_distance(degree_stats.empirical_in_degree(g))}


def _rep_stationary(n, seed, rep, cfg):
    g, scc = _graph(n, seed, rep)
    sd = walks.stationary_distribution(g, tol=1e-10)
    return {"value": float(sd.pi[~scc.giant_mask].sum()), "residual": sd.residual}


def _rep_hazard(n, seed, rep, cfg):
    g = generate.sample_wcm(n, generate.RngSpec(seed, rep, "graph"))
    out = {}
    for mode, tag in ((walks.CYCLICAL, "walk"), (walks.INDEPENDENT, "walk-independent")):
        wc = walks.WalkConfig(mode=mode, pairs=cfg.pairs, t_max=cfg.t_max,
                              rng=generate.RngSpec(seed, rep, tag))
        rec = walks.simulate_pairs(g if mode == walks.CYCLICAL else None, n, wc)
        out[mode] = rec.generation.tolist()
    return out


def _rep_equivalence(n, seed, rep, cfg):
    size = cfg.samples
    wcm = generate.sample_wcm_targets(n, size, generate.RngSpec(seed, rep, "wcm-batch"))
    dcm = generate.sample_dcm_multinomial_targets(n, size, generate.RngSpec(seed, rep, "dcm-batch"))
    codes = {}
    for g in generate.enumerate_two_out_graphs(n):
        code = int(generate.canonical_codes(g.targets, n)[0])
        codes[code] = generate.graph_probability(g).value
    keys = sorted(codes)
    index = {c: i for i, c in enumerate(keys)}
    lookup = np.vectorize(index.__getitem__)
    c1 = np.bincount(lookup(generate.canonical_codes(wcm, n)), minlength=len(keys))
    c2 = np.bincount(lookup(generate.canonical_codes(dcm, n)), minlength=len(keys))
    probs = np.array([codes[c] for c in keys])
    table = np.vstack([c1, c2])
    table = table[:, table.sum(axis=0) > 0]
    p_value = float(stats.chi2_contingency(table, correction=False)[1])
    se = np.sqrt(probs * (1 - probs) / size)
    max_z = float(max(np.max(np.abs(c1 / size - probs) / se), np.max(np.abs(c2 / size - probs) / se)))
    return {"value": p_value, "max_z": max_z, "encodings": len(keys)}


REPLICATE_FNS = {
    "giant": _rep_giant,
    "second_scc": _rep_second,
    "paths": _rep_paths,
    "reachable": _rep_reachable,
    "out_edges": _rep_out_edges,
    "in_edges": _rep_in_edges,
    "indegree": _rep_indegree,
    "equivalence": _rep_equivalence,
    "hazard": _rep_hazard,
    "stationary": _rep_stationary,
}


# -- judgement ---------------------------------------------------------------


def _hazard_summary(n, per_rep, t_max):
    log2n = math.log2(n)
    lo, hi = int(math.ceil(2 * log2n)), int(math.floor(6 * log2n))
    out = {}
    for mode in (walks.CYCLICAL, walks.INDEPENDENT):
        recs = [walks.CoalescenceRecords(np.asarray(r[mode], dtype=np.int64), t_max, i)
                for i, r in enumerate(per_rep)]
        curve = walks.hazard_curve(recs, t_max)
        if mode == walks.CYCLICAL:
            out["window"] = [lo, min(hi, t_max)]
            out["cyclical_ratio"] = curve.mean_over(lo, min(hi, t_max)) * 2 * n
        else:
            out["independent_ratio"] = curve.mean_over(1, min(50, t_max)) * 2 * n
    return out


def judge(claim: str, n: int, per_rep: list, details: dict) -> tuple[bool, str]:
    """Pass/fail for one (claim, N) row, from stored numbers only."""
    vals = [r["value"] for r in per_rep] if claim != "hazard" else []
    if claim == "giant":
        mean = float(np.mean(vals))
        ok = 0.787 <= mean <= 0.807 and all(0.77 <= v <= 0.82 for v in vals)
        return ok, "mean in [0.787, 0.807]; each replicate in [0.77, 0.82]"
    if claim == "second_scc":
        bound = 2 * SECOND_SCC_C * math.log(n)
        return max(vals) <= bound, f"max second SCC <= {bound:.4g}"
    if claim == "paths":
        frac = float(np.mean([v <= 10 for v in vals]))
        return max(vals) <= 15 and frac >= 0.9, "max distance <= 15; <= 10 in >= 90% of replicates"
    if claim == "reachable":
        bound = 3 * SECOND_SCC_C * math.log(n)
        return max(vals) <= bound, f"max reachable avoiding giant <= {bound:.4g}"
    if claim == "out_edges":
        frac = float(np.mean([v == 0 for v in vals]))
        return frac >= 0.9 and max(vals) <= 0.001 * n, "zero in >= 90% of replicates; always <= 0.001 N"
    if claim == "in_edges":
        frac = float(np.mean([0.85 <= v <= 1.15 for v in vals]))
        return frac >= 0.9, "ratio in [0.85, 1.15] in >= 90% of replicates"
    if claim == "indegree":
        med = float(np.median(vals))
        ok = True
        desc = "descriptive"
        if n >= 100_000:
            ok = med <= 0.3
            desc = "median <= 0.3"
        if "ratio_from" in details:
            scale = math.sqrt(n / details["ratio_from"])
            ok = ok and 0.5 * scale <= details["median_ratio"] <= 2 * scale
            desc += f"; median ratio in [{0.5 * scale:.3g}, {2 * scale:.3g}]"
        return ok, desc
    if claim == "equivalence":
        ok = all(r["value"] > 0.001 and r["max_z"] <= 4 for r in per_rep)
        return ok, "chi-square p > 0.001; every encoding within 4 standard errors"
    if claim == "hazard":
        ok = 0.5 <= details["cyclical_ratio"] <= 2.0 and 0.8 <= details["independent_ratio"] <= 1.25
        return ok, "cyclical 2N*hazard in [0.5, 2.0]; independent in [0.8, 1.25]"
    if claim == "stationary":
        ok = max(vals) <= 1e-8 and max(r["residual"] for r in per_rep) <= 1e-9
        return ok, "mass outside giant <= 1e-8; residual <= 1e-9"
    raise ValueError(claim)


TARGETS = {
    "giant": lambda n: X_STAR,
    "second_scc": lambda n: SECOND_SCC_C * math.log(n),
    "paths": lambda n: branching.path_length_bound(n) if n >= 3 else None,
    "reachable": lambda n: SECOND_SCC_C * math.log(n),
    "out_edges": lambda n: 0,
    "in_edges": lambda n: 1.0,
    "indegree": lambda n: 0.0,
    "equivalence": lambda n: None,
    "hazard": lambda n: 1.0,
    "stationary": lambda n: 0.0,
}


def _estimate(claim, per_rep, details):
    if claim == "hazard":
        return details["cyclical_ratio"], None
    vals = np.asarray([r["value"] for r in per_rep], dtype=float)
    if claim in ("second_scc", "paths", "reachable", "stationary"):
        return float(vals.max()), None
    if claim == "indegree":
        return float(np.median(vals)), None
    if claim == "equivalence":
        return float(vals.min()), None
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else None
    return float(vals.mean()), se


def recheck(report: dict) -> bool:
    """Recompute every row's verdict from the numbers stored in a report dict."""
    return all(judge(r["claim"], r["n"], r["per_replicate"], r["details"])[0] == r["passed"]
               for r in report["rows"])


# -- execution ---------------------------------------------------------------


def _run_one(args):
    claim, n, seed, rep, cfg = args
    try:
        return REPLICATE_FNS[claim](n, seed, rep, cfg)
    except Exception as exc:
        raise ExperimentError(f"claim={claim}, N={n}, replicate={rep}: {exc}") from exc


def worker_count(cfg: ExperimentConfig) -> int:
    if cfg.workers is not None:
        return max(1, cfg.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig) -> ClaimReport:
    if cfg.output:
        parent = Path(cfg.output).parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise ExperimentError(f"output path {cfg.output} is not writable")
    report = ClaimReport(cfg.claim, cfg.seed)
    workers = worker_count(cfg)
    medians = {}
    for n in cfg.n_values:
        start = time.perf_counter()
        tasks = [(cfg.claim, n, cfg.seed, rep, cfg) for rep in range(cfg.replicates)]
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                per_rep = list(pool.map(_run_one, tasks))
        else:
            per_rep = [_run_one(t) for t in tasks]
        details = {}
        if cfg.claim == "hazard":
            details = _hazard_summary(n, per_rep, cfg.t_max)
            per_rep_stored = [{"value": None} for _ in per_rep]
        else:
            per_rep_stored = per_rep
        if cfg.claim == "indegree":
            medians[n] = float(np.median([r["value"] for r in per_rep]))
            first = cfg.n_values[0]
            if n != first:
                details = {"ratio_from": first, "median_ratio": medians[first] / medians[n]}
        passed, bound = judge(cfg.claim, n, per_rep, details)
        estimate, stderr = _estimate(cfg.claim, per_rep, details)
        report.rows.append({
            "claim": cfg.claim,
            "n": n,
            "replicates": cfg.replicates,
            "estimate": estimate,
            "stderr": stderr,
            "target": TARGETS[cfg.claim](n),
            "bound": bound,
            "passed": bool(passed),
            "per_replicate": per_rep_stored,
            "details": details,
            "substreams": {"seed": cfg.seed, "tags": _tags(cfg.claim)},
            "wall_clock_s": round(time.perf_counter() - start, 3),
        })
    if cfg.output:
        write_report(report, cfg.output, cfg.format)
    return report


def _tags(claim):
    if claim == "hazard":
        return ["graph", "walk", "walk-independent"]
    if claim == "equivalence":
        return ["wcm-batch", "dcm-batch"]
    return ["graph"]


# -- output ------------------------------------------------------------------

TABLE_COLUMNS = ["claim", "n", "replicates", "estimate", "stderr", "target", "bound", "passed", "wall_clock_s"]


def summarize(reports) -> list[dict]:
    """Merge reports into one table keyed by (claim, N)."""
    table = []
    seen = set()
    for rep in reports:
        rows = rep.rows if isinstance(rep, ClaimReport) else rep["rows"]
        for row in rows:
            key = (row["claim"], row["n"])
            if key in seen:
                raise ValueError(f"duplicate row for claim={key[0]}, N={key[1]}")
            seen.add(key)
            table.append({c: row[c] for c in TABLE_COLUMNS})
    return table


def table_to_csv(table: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(table)
    return buf.getvalue()


def render_report(report: ClaimReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n"
    return table_to_csv(summarize([report]))


def write_report(report: ClaimReport, path, fmt: str = "json") -> None:
    """Write atomically: render to a temp file in the target directory, then rename."""
    path = Path(path)
    text = render_report(report, fmt)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

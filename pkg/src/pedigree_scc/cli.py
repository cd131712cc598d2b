"""Command line entry point: ``pedigree-scc <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import branching, degree_stats, generate, graph_core, harness, structure, walks


def _int_list(text):
    return [int(float(x)) for x in text.replace(",", " ").split()]


def cmd_generate(args):
    spec = generate.RngSpec(args.seed, args.replicate, "graph")
    if args.model == "wcm":
        g = generate.sample_wcm(args.n, spec)
    else:
        g = generate.sample_dcm_multinomial(args.n, spec)
    graph_core.write_edge_list(g, args.out)
    return 0


def cmd_stats(args):
    g = graph_core.read_edge_list(args.graph)
    degs = graph_core.degree_sequence(g)
    xi = degree_stats.empirical_in_degree(g)
    weights = degree_stats.WeightSequence.squared() if args.weights == "squared" else degree_stats.WeightSequence.unit()
    payload = {
        "xi": xi.xi.tolist(),
        "distance": degree_stats.weighted_distance(xi, weights),
        "max_degree": degree_stats.max_degree(degs),
    }
    try:
        payload["proper_report"] = degree_stats.check_proper(degs, args.k_bound, args.delta_rule).as_dict()
    except graph_core.GraphError as exc:
        payload["proper_report"] = {"error": str(exc)}
    print(json.dumps(payload, indent=2))
    return 0


def cmd_fixedpoint(args):
    law = branching.OffspringPmf.poisson2()
    x = branching.survival_probability(law, args.tol)
    y = 1.0 - x
    print(json.dumps({
        "x_star": x,
        "second_scc_constant": branching.second_scc_constant(x),
        "residual": abs(branching.pgf(law, y) - y),
    }, indent=2))
    return 0


def scc_summary(g: graph_core.Digraph) -> dict:
    report = structure.scc_decompose(g)
    mask = report.giant_mask
    dist = structure.distances_to_set(g, mask)[~mask]
    if dist.size == 0:
        max_dist = 0
    elif (dist < 0).any():
        max_dist = None
    else:
        max_dist = int(dist.max())
    return {
        "sizes": report.sizes[:5].tolist(),
        "giant_fraction": report.giant_fraction,
        "edges_leaving_giant": structure.edges_leaving_set(g, mask),
        "edges_entering_giant": structure.edges_entering_set(g, mask),
        "max_distance_to_giant": max_dist,
        "max_reachable_avoiding": structure.max_reachable_avoiding(g, mask),
    }


def cmd_scc(args):
    summary = scc_summary(graph_core.read_edge_list(args.graph))
    if args.format == "json":
        print(json.dumps(summary, indent=2))
    else:
        flat = dict(summary)
        flat["sizes"] = " ".join(str(s) for s in summary["sizes"])
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        writer.writeheader()
        writer.writerow(flat)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_coalesce(args):
    meeting = {"bernoulli": walks.BERNOULLI_HALF, "independent-edges": walks.INDEPENDENT_EDGES}[args.meeting]
    records = []
    for rep in range(args.reps):
        g = None
        if args.mode == walks.CYCLICAL:
            g = generate.sample_wcm(args.n, generate.RngSpec(args.seed, rep, "graph"))
        cfg = walks.WalkConfig(args.mode, args.pairs, args.tmax, meeting,
                               generate.RngSpec(args.seed, rep, "walk"), args.distinct_start)
        records.append(walks.simulate_pairs(g, args.n, cfg))
    rows = walks.hazard_curve(records, args.tmax).rows()
    if args.format == "json":
        sys.stdout.write(json.dumps({"n": args.n, "mode": args.mode, "meeting": meeting, "rows": rows}, indent=2) + "\n")
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["k", "survivors", "absorbed", "hazard", "stderr"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_verify(args):
    cfg = harness.ExperimentConfig(
        claim=args.claim,
        n_values=tuple(args.n),
        replicates=args.reps,
        seed=args.seed,
        output=args.out,
        format=args.format,
        pairs=args.pairs,
        t_max=args.tmax,
        samples=args.samples,
    )
    report = harness.run_experiment(cfg)
    if not args.out:
        sys.stdout.write(harness.render_report(report, args.format))
    for row in report.rows:
        status = "PASS" if row["passed"] else "FAIL"
        print(f"{status} {row['claim']} N={row['n']} estimate={row['estimate']} ({row['bound']})", file=sys.stderr)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pedigree-scc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a pedigree digraph and write its edge list")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--replicate", type=int, default=0)
    g.add_argument("--model", choices=["wcm", "dcm-multinomial"], default="wcm")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("stats", help="degree statistics")
    ssub = s.add_subparsers(dest="stat", required=True)
    si = ssub.add_parser("indegree", help="empirical in-degree law and properness")
    si.add_argument("--graph", required=True)
    si.add_argument("--weights", choices=["squared", "unit"], default="squared")
    si.add_argument("--k-bound", type=float, default=10.0)
    si.add_argument("--delta-rule", choices=["log_n", "paper_c2"], default="log_n")
    si.set_defaults(func=cmd_stats)

    f = sub.add_parser("fixedpoint", help="Poisson(2) survival probability and derived constant")
    f.add_argument("--tol", type=float, default=1e-12)
    f.set_defaults(func=cmd_fixedpoint)

    c = sub.add_parser("scc", help="strongly connected component summary of an edge list")
    c.add_argument("--graph", required=True)
    c.add_argument("--format", choices=["json", "csv"], default="json")
    c.set_defaults(func=cmd_scc)

    w = sub.add_parser("coalesce", help="hazard curve of coalescing lineage pairs")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--pairs", type=int, default=10_000)
    w.add_argument("--tmax", type=int, default=100)
    w.add_argument("--mode", choices=[walks.CYCLICAL, walks.INDEPENDENT], default=walks.CYCLICAL)
    w.add_argument("--meeting", choices=["bernoulli", "independent-edges"], default="bernoulli")
    w.add_argument("--reps", type=int, default=1)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--distinct-start", action="store_true")
    w.add_argument("--format", choices=["json", "csv"], default="csv")
    w.set_defaults(func=cmd_coalesce)

    v = sub.add_parser("verify", help="run a replicated check of one claim")
    v.add_argument("claim", choices=harness.CLAIMS)
    v.add_argument("--n", type=_int_list, required=True, help="comma separated population sizes")
    v.add_argument("--reps", type=int, default=30)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.add_argument("--format", choices=["json", "csv"], default="json")
    v.add_argument("--pairs", type=int, default=10_000, help="walk pairs per pedigree (hazard)")
    v.add_argument("--tmax", type=int, default=100)
    v.add_argument("--samples", type=int, default=1_000_000, help="graphs per sampler (equivalence)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (graph_core.GraphError, harness.ExperimentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

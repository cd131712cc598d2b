"""Strongly connected structure of cyclical pedigree digraphs."""

from .branching import OffspringPmf, path_length_bound, pgf, second_scc_constant, survival_probability
from .degree_stats import (
    EmpiricalInDegree,
    WeightSequence,
    check_proper,
    empirical_in_degree,
    max_degree,
    poisson2_pmf,
    weighted_distance,
)
from .generate import (
    RngSpec,
    graph_probability,
    sample_dcm,
    sample_dcm_multinomial,
    sample_multinomial_indegrees,
    sample_wcm,
)
from .graph_core import (
    DegreeSequence,
    Digraph,
    GraphError,
    build_digraph,
    degree_sequence,
    double_edge_vertex_count,
    read_edge_list,
    write_edge_list,
)
from .structure import (
    distance_to_set,
    edges_entering_set,
    edges_leaving_set,
    fan,
    fan_dichotomy_histogram,
    reachable_avoiding,
    scc_decompose,
)
from .walks import WalkConfig, hazard_curve, simulate_pairs, stationary_distribution

__version__ = "0.1.0"

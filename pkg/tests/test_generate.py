import math
from collections import Counter
from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pedigree_scc.generate import (
    RngSpec,
    canonical_codes,
    enumerate_two_out_graphs,
    graph_probability,
    sample_dcm,
    sample_dcm_multinomial,
    sample_dcm_multinomial_targets,
    sample_multinomial_indegrees,
    sample_wcm,
    sample_wcm_targets,
)
from pedigree_scc.graph_core import DegreeSequence, GraphError, build_digraph, degree_sequence


def ordered_parent_oracle(n):
    """Probability of every canonical code by enumerating all n^(2n) ordered parent draws."""
    counts = Counter()
    for draw in product(range(n), repeat=2 * n):
        counts[int(canonical_codes(np.array(draw), n)[0])] += 1
    total = n ** (2 * n)
    return {code: c / total for code, c in counts.items()}


def within_3se(hits, trials, p):
    return abs(hits / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials)


# -- RngSpec -----------------------------------------------------------------


def test_rng_spec_streams_are_reproducible_and_separate():
    a = RngSpec(7, 3, "graph").generator().integers(0, 2**32, 5)
    b = RngSpec(7, 3, "graph").generator().integers(0, 2**32, 5)
    c = RngSpec(7, 3, "walk").generator().integers(0, 2**32, 5)
    d = RngSpec(7, 4, "graph").generator().integers(0, 2**32, 5)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()
    assert a.tolist() != d.tolist()


def test_rng_spec_derivation_is_documented_recipe():
    import hashlib

    word = int.from_bytes(hashlib.sha256(b"graph").digest()[:8], "big")
    ref = np.random.Generator(np.random.PCG64(np.random.SeedSequence([7, 3, word])))
    assert RngSpec(7, 3, "graph").generator().integers(0, 100, 8).tolist() == ref.integers(0, 100, 8).tolist()


# -- sample_wcm ----------------------------------------------------------------


def test_wcm_single_vertex_is_double_loop():
    for seed in range(5):
        assert sample_wcm(1, RngSpec(seed)).edges == [(0, 0), (0, 0)]


def test_wcm_zero_population_rejected():
    with pytest.raises(GraphError):
        sample_wcm(0, RngSpec(1))


def test_wcm_is_deterministic():
    assert sample_wcm(5, RngSpec(11)) == sample_wcm(5, RngSpec(11))


def test_wcm_shape():
    g = sample_wcm(50, RngSpec(2))
    assert g.m == 100
    assert (degree_sequence(g).out_deg == 2).all()
    assert g.sources.tolist()[:4] == [0, 0, 1, 1]


def test_wcm_n2_all_loops_frequency_oracle():
    # enumeration of the 16 equally likely (U1_0, U2_0, U1_1, U2_1)
    hits = sum(1 for u in product(range(2), repeat=4) if u[0] == u[1] == 0 and u[2] == u[3] == 1)
    p = hits / 16
    assert p == 1 / 16
    targets = sample_wcm_targets(2, 10**6, RngSpec(5, 0, "test"))
    freq_hits = int(np.count_nonzero((targets == [0, 0, 1, 1]).all(axis=1)))
    assert within_3se(freq_hits, 10**6, p)


def test_wcm_per_call_sampler_n2_all_loops():
    gen = np.random.default_rng(123)
    trials = 200_000
    hits = sum(sample_wcm(2, gen).targets.tolist() == [0, 0, 1, 1] for _ in range(trials))
    assert within_3se(hits, trials, 1 / 16)


# -- multinomial in-degrees ----------------------------------------------------


def test_multinomial_single_category():
    assert sample_multinomial_indegrees(1, RngSpec(3)).tolist() == [2]


@settings(max_examples=50)
@given(st.integers(1, 300), st.integers(0, 2**32))
def test_multinomial_conserves_total(n, seed):
    assert sample_multinomial_indegrees(n, RngSpec(seed)).sum() == 2 * n


def test_multinomial_n2_extreme_frequency():
    gen = np.random.default_rng(77)
    trials = 10**6
    hits = sum(sample_multinomial_indegrees(2, gen)[0] == 4 for _ in range(trials))
    assert within_3se(hits, trials, stats.binom.pmf(4, 4, 0.5))


# -- sample_dcm ------------------------------------------------------------------


def test_dcm_forced_matchings():
    assert sample_dcm(DegreeSequence([2], [2]), RngSpec(0)).edges == [(0, 0), (0, 0)]
    for seed in range(5):
        g = sample_dcm(DegreeSequence([0, 4], [2, 2]), RngSpec(seed))
        assert sorted(g.edges) == [(0, 1), (0, 1), (1, 1), (1, 1)]


def test_dcm_rejects_sum_mismatch():
    with pytest.raises(GraphError, match="degree sums differ"):
        sample_dcm(DegreeSequence([1, 2], [2, 2]), RngSpec(0))


def dcm_matching_probability(g):
    ds = degree_sequence(g)
    x = Counter(g.edges)
    num = math.prod(math.factorial(d) for d in ds.in_deg) * math.prod(math.factorial(d) for d in ds.out_deg)
    return num / (math.factorial(g.m) * math.prod(math.factorial(c) for c in x.values()))


def test_dcm_matching_enumeration_oracle():
    in_half = [0, 0, 1, 1]
    outcomes = Counter()
    for perm in permutations(in_half):
        x01 = sum(1 for slot, t in zip([0, 0, 1, 1], perm) if slot == 0 and t == 1)
        x10 = sum(1 for slot, t in zip([0, 0, 1, 1], perm) if slot == 1 and t == 0)
        outcomes[(x01, x10)] += 1
    p = outcomes[(2, 2)] / 24
    assert p == pytest.approx(1 / 6)
    g = build_digraph(2, [(0, 1), (0, 1), (1, 0), (1, 0)])
    assert dcm_matching_probability(g) == pytest.approx(p)

    gen = np.random.default_rng(9)
    deg = DegreeSequence([2, 2], [2, 2])
    trials = 200_000
    hits = sum(sample_dcm(deg, gen).targets.tolist() == [1, 1, 0, 0] for _ in range(trials))
    assert within_3se(hits, trials, p)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=8), st.integers(0, 2**32))
def test_dcm_in_degree_marginal_exact(out_deg, seed):
    s = sum(out_deg)
    rng = np.random.default_rng(seed)
    n = len(out_deg)
    in_deg = np.bincount(rng.integers(0, n, s), minlength=n) if s else np.zeros(n, dtype=int)
    g = sample_dcm(DegreeSequence(in_deg, out_deg), RngSpec(seed))
    ds = degree_sequence(g)
    assert ds.in_deg.tolist() == list(in_deg)
    assert ds.out_deg.tolist() == list(out_deg)


# -- graph_probability -----------------------------------------------------------


def test_graph_probability_examples(loop1):
    assert graph_probability(loop1).value == 1.0
    loops = build_digraph(2, [(0, 0), (0, 0), (1, 1), (1, 1)])
    assert graph_probability(loops).value == pytest.approx(1 / 16, rel=1e-14)
    mixed = build_digraph(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert graph_probability(mixed).value == pytest.approx(1 / 4, rel=1e-14)


def test_graph_probability_needs_two_out():
    with pytest.raises(GraphError):
        graph_probability(build_digraph(2, [(0, 1), (1, 0)]))


def test_graph_probability_log_domain_for_large_n():
    g = sample_wcm(200, RngSpec(1))
    p = graph_probability(g)
    assert p.value is None
    assert p.log < -1000


@pytest.mark.parametrize("n", [1, 2, 3])
def test_graph_probability_normalizes_and_matches_ordered_draws(n):
    oracle = ordered_parent_oracle(n)
    total = 0.0
    for g in enumerate_two_out_graphs(n):
        p = graph_probability(g).value
        total += p
        assert p == pytest.approx(oracle[int(canonical_codes(g.targets, n)[0])], rel=1e-12)
    assert abs(total - 1.0) <= 1e-12
    assert len(oracle) == math.comb(n + 1, 2) ** n


@pytest.mark.parametrize("n", [2, 3])
def test_matching_formula_times_multinomial_mass_equals_wcm_probability(n):
    for g in enumerate_two_out_graphs(n):
        d_in = degree_sequence(g).in_deg
        mult = math.factorial(2 * n) / math.prod(math.factorial(int(d)) for d in d_in) / n ** (2 * n)
        assert dcm_matching_probability(g) * mult == pytest.approx(graph_probability(g).value, rel=1e-12)


# -- distributional equivalence ------------------------------------------------------


def _probabilities(n):
    keys, probs = [], []
    for g in enumerate_two_out_graphs(n):
        keys.append(int(canonical_codes(g.targets, n)[0]))
        probs.append(graph_probability(g).value)
    order = np.argsort(keys)
    return np.asarray(keys)[order], np.asarray(probs)[order]


def _counts(codes, keys):
    return np.bincount(np.searchsorted(keys, codes), minlength=len(keys))


@pytest.mark.parametrize("n", [2, 3])
def test_wcm_frequencies_match_exact_probabilities(n):
    keys, probs = _probabilities(n)
    counts = _counts(canonical_codes(sample_wcm_targets(n, 10**6, RngSpec(n, 0, "chi")), n), keys)
    assert stats.chisquare(counts, probs * counts.sum()).pvalue > 0.001


@pytest.mark.parametrize("n", [2, 3])
def test_two_stage_sampler_matches_wcm(n):
    keys, probs = _probabilities(n)
    c1 = _counts(canonical_codes(sample_wcm_targets(n, 10**6, RngSpec(n, 1, "a")), n), keys)
    c2 = _counts(canonical_codes(sample_dcm_multinomial_targets(n, 10**6, RngSpec(n, 1, "b")), n), keys)
    assert stats.chi2_contingency(np.vstack([c1, c2]), correction=False)[1] > 0.001
    assert stats.chisquare(c2, probs * c2.sum()).pvalue > 0.001


def test_batch_two_stage_agrees_with_per_call_two_stage():
    n, trials = 2, 50_000
    keys, probs = _probabilities(n)
    gen = np.random.default_rng(4)
    per_call = np.array([sample_dcm_multinomial(n, gen).targets for _ in range(trials)])
    counts = _counts(canonical_codes(per_call, n), keys)
    assert stats.chisquare(counts, probs * trials).pvalue > 0.001


def test_canonical_code_ignores_slot_order():
    a = canonical_codes(np.array([0, 2, 1, 1, 2, 0]), 3)
    b = canonical_codes(np.array([2, 0, 1, 1, 0, 2]), 3)
    assert a[0] == b[0]

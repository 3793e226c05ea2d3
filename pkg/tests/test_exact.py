from collections import defaultdict
from fractions import Fraction

import pytest

from reference import reference_is_mis
from selfstab_mis.exact import (absorption_cdf, any_star_center_stable_probability,
                                four_vertex_graphs, is_absorbing,
                                mean_stabilization_times,
                                star_center_stable_probability, transitions)
from selfstab_mis.graph import Graph, gen_complete


def test_transitions_sum_to_one():
    g = gen_complete(3)
    for mask in range(8):
        total = sum(p for _, p in transitions(g, mask))
        assert total == Fraction(1)


def test_absorbing_iff_mis():
    for _, g in four_vertex_graphs():
        for mask in range(16):
            black = [u for u in range(4) if (mask >> u) & 1]
            assert is_absorbing(g, mask) == reference_is_mis(g, black)


def test_mean_time_k1():
    g = Graph(1, [])
    means = mean_stabilization_times(g)
    assert means[0] == Fraction(2)   # geometric(1/2), first flip in round 1
    assert means[1] == Fraction(0)   # single black vertex is already an MIS


def test_mean_time_k2_all_white_is_two():
    # from {both white} or {both black} the next joint state is uniform over
    # the four corners, two of which are absorbing: geometric(1/2), mean 2
    g = gen_complete(2)
    means = mean_stabilization_times(g)
    assert means[0b00] == Fraction(2)
    assert means[0b11] == Fraction(2)
    assert means[0b01] == 0 and means[0b10] == 0


def test_mean_consistent_with_cdf_tail_sum():
    g = Graph(3, [(0, 1), (1, 2)])
    means = mean_stabilization_times(g)
    cdf = absorption_cdf(g, 0, 220)
    tail_sum = sum((1 - c) for c in cdf)  # sum_{t>=0} P[T > t]
    assert abs(float(means[0]) - float(tail_sum)) < 1e-12


def test_cdf_monotone_and_bounded():
    g = gen_complete(4)
    cdf = absorption_cdf(g, 0b1111, 40)
    assert all(0 <= c <= 1 for c in cdf)
    assert all(a <= b for a, b in zip(cdf, cdf[1:]))
    assert float(cdf[-1]) > 0.999


def _star_joint_probability(k, rounds):
    """Independent path: evolve the full joint chain of the star."""
    g = Graph(k + 1, [(0, i) for i in range(1, k + 1)])
    dist = {0: Fraction(1)}
    for _ in range(rounds):
        nxt = defaultdict(Fraction)
        for mask, p in dist.items():
            for succ, q in transitions(g, mask):
                nxt[succ] += p * q
        dist = dict(nxt)
    return dist.get(0b1, Fraction(0))  # center black, all leaves white


@pytest.mark.parametrize("k,rounds", [(1, 1), (1, 3), (2, 2), (3, 2), (3, 4)])
def test_star_lumped_chain_matches_joint_chain(k, rounds):
    assert star_center_stable_probability(k, rounds) == \
        _star_joint_probability(k, rounds)


def test_star_k1_one_round_is_quarter():
    assert star_center_stable_probability(1, 1) == Fraction(1, 4)


def test_any_star_product_rule():
    p = any_star_center_stable_probability([1, 2], 2)
    p1 = star_center_stable_probability(1, 2)
    p2 = star_center_stable_probability(2, 2)
    assert p == 1 - (1 - p1) * (1 - p2)


def test_four_vertex_catalog_distinct():
    graphs = four_vertex_graphs()
    assert len(graphs) == 11
    signatures = set()
    for _, g in graphs:
        sig = (g.m, tuple(sorted(g.degrees.tolist())))
        assert sig not in signatures
        signatures.add(sig)


def test_joint_chain_size_guard():
    with pytest.raises(ValueError):
        mean_stabilization_times(gen_complete(7))

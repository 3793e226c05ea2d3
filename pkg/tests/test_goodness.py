import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfstab_mis.goodness import (ThetaResult, check_p1, check_p2, check_p3,
                                   check_p4, check_p5, check_p6, is_good,
                                   theta, witness_violates, _p3_enumerate)
from selfstab_mis.graph import Graph, gen_complete, gen_gnp


def bipartite(a, b):
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


# -- P1 --------------------------------------------------------------------------


def test_p1_examples():
    k8 = gen_complete(8)
    assert check_p1(k8, 1.0).status == "pass"
    # with tiny p the 4 ln n term dominates: 4 ln 8 ~ 8.3 > max degree 7
    assert 4 * math.log(8) > 7
    assert check_p1(k8, 1e-6).status == "pass"
    assert check_p1(Graph(5, []), 0.5).status == "pass"


def test_p1_exact_cap():
    with pytest.raises(ValueError):
        check_p1(gen_complete(17), 0.5)


def test_p1_sampled_finds_dense_core():
    # a clique covering most of the graph violates the p = tiny bound; the
    # full-size sample class is the whole vertex set, so sampling must hit it
    n = 42
    clique = list(range(40))
    edges = [(u, v) for i, u in enumerate(clique) for v in clique[i + 1:]]
    g = Graph(n, edges)
    assert 2 * g.m / n > 4 * math.log(n)
    res = check_p1(g, 1e-9, mode="sampled", samples=5, seed=1)
    assert res.status == "fail"
    assert witness_violates(g, 1e-9, res.witness)


# -- P2 --------------------------------------------------------------------------


def test_p2_vacuous_cases():
    g = gen_gnp(30, 0.3, 1)
    res = check_p2(g, 0.3)
    assert res.status == "pass" and "vacuous" in res.detail
    star = Graph(64, [(0, i) for i in range(1, 64)])
    # qualifying size 40 ln(64)/0.5 ~ 333 > 63: nothing to check
    assert 40 * math.log(64) / 0.5 > 63
    assert check_p2(star, 0.5).status == "pass"
    assert check_p2(g, 0.0).status == "pass"


def test_p2_sampled_pass_on_dense_random():
    g = gen_gnp(500, 0.6, seed=2)
    res = check_p2(g, 0.6, mode="sampled", samples=2, seed=3)
    assert res.status in ("pass", "sampled-pass")


def test_p2_sampled_fails_on_empty_graph():
    g = Graph(1000, [])
    res = check_p2(g, 0.5, mode="sampled", samples=1, seed=4)
    assert res.status == "fail"
    assert witness_violates(g, 0.5, res.witness)


# -- P3 --------------------------------------------------------------------------


def test_p3_exact_enumeration_on_path():
    p4 = Graph(4, [(0, 1), (1, 2), (2, 3)])
    assert _p3_enumerate(p4, 0.5) is None
    assert check_p3(p4, 0.5).status == "pass"


def test_p3_vacuous_by_magnitude():
    g = gen_gnp(12, 0.5, 3)
    assert 8 * math.log(12) ** 2 / 0.5 > 12
    assert check_p3(g, 0.5).status == "pass"


def test_p3_exact_cap():
    with pytest.raises(ValueError):
        check_p3(gen_complete(13), 0.5)


def test_p3_constructed_violation_reverifies():
    # hub with many private neighbors vs an edgeless S: lhs large, rhs 0
    n = 500
    edges = [(0, i) for i in range(1, 401)]
    g = Graph(n, edges)
    witness = {"property": "P3", "S": [401, 402], "T": [0], "I": [],
               "lhs": 400, "rhs": 0, "slack": 8 * math.log(n) ** 2}
    assert 8 * math.log(n) ** 2 / 1.0 < 400
    assert witness_violates(g, 1.0, witness)


def test_p3_sampled_pass_on_random():
    g = gen_gnp(200, 0.2, seed=5)
    res = check_p3(g, 0.2, mode="sampled", samples=40, seed=6)
    assert res.status in ("pass", "sampled-pass")


# -- P4 --------------------------------------------------------------------------


def test_p4_vacuous_when_no_admissible_t():
    g = gen_complete(2)
    assert math.log(2) / 1.0 < 1
    assert check_p4(g, 1.0).status == "pass"


def test_p4_exact_pass_examples():
    assert check_p4(gen_complete(8), 0.5).status == "pass"
    single = Graph(2, [(0, 1)])
    assert check_p4(single, 0.01).status == "pass"


def test_p4_sampled_finds_dense_bipartite():
    # K_{35,65}: T the 35 side, S the 65 side; E = 2275 > 6*65*ln(100) ~ 1796
    g = bipartite(35, 65)
    assert 35 * 65 > 6 * 65 * math.log(100)
    res = check_p4(g, 0.1, mode="sampled", samples=5, seed=7)
    assert res.status == "fail"
    assert witness_violates(g, 0.1, res.witness)


def test_p4_exact_cap():
    with pytest.raises(ValueError):
        check_p4(gen_complete(17), 0.2)


# -- P5 / P6 ---------------------------------------------------------------------


def test_p5_examples():
    assert check_p5(gen_complete(20), 1.0).status == "pass"
    g = bipartite(2, 1000)
    res = check_p5(g, 0.001)
    assert res.status == "fail"
    assert sorted((res.witness["u"], res.witness["v"])) == [0, 1]
    assert res.witness["common"] == 1000
    assert witness_violates(g, 0.001, res.witness)
    # triangle-free graph with threshold above its max common count
    c5 = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    assert check_p5(c5, 0.5).status == "pass"


def test_p5_relabeling_invariance(rng):
    g = gen_gnp(60, 0.3, seed=8)
    perm = rng.permutation(60)
    remapped = Graph(60, [(int(perm[u]), int(perm[v])) for u, v in g.edges()])
    a = check_p5(g, 0.05)
    b = check_p5(remapped, 0.05)
    assert a.status == b.status
    if a.status == "fail":
        pa = {int(perm[a.witness["u"]]), int(perm[a.witness["v"]])}
        assert a.witness["common"] == b.witness["common"]


def test_p6_examples():
    assert check_p6(gen_complete(10), 1.0).status == "pass"
    assert check_p6(gen_gnp(30, 0.1, 1), 0.0).status == "skipped"
    # on 4 vertices the density condition 2 sqrt(ln n / n) > 1 never fires,
    # so a diameter-3 path is only checkable at n >= 9
    p4 = Graph(4, [(0, 1), (1, 2), (2, 3)])
    assert 2.0 * math.sqrt(math.log(4) / 4) > 1.0
    assert check_p6(p4, 1.0).status == "skipped"
    p9 = Graph(9, [(i, i + 1) for i in range(8)])
    assert 2.0 * math.sqrt(math.log(9) / 9) <= 1.0
    res = check_p6(p9, 1.0)
    assert res.status == "fail"
    assert witness_violates(p9, 1.0, res.witness)


# -- aggregate --------------------------------------------------------------------


def test_is_good_exact_definitive():
    g = gen_gnp(10, 0.5, 2)
    report = is_good(g, 0.5, mode="exact")
    assert report.definitive
    assert set(report.properties) == {"P1", "P2", "P3", "P4", "P5", "P6"}


def test_is_good_overall_fail_via_p5():
    g = bipartite(2, 300)
    report = is_good(g, 0.001, mode="sampled", samples=5, seed=1)
    assert not report.passed
    assert report.properties["P5"].failed


def test_is_good_sampled_not_definitive():
    g = gen_gnp(60, 0.3, seed=3)
    report = is_good(g, 0.3, mode="sampled", samples=5, seed=2)
    assert report.passed and not report.definitive
    d = report.to_json_dict()
    assert d["passed"] and not d["definitive"]


# -- theta -----------------------------------------------------------------------


def test_theta_examples():
    star = Graph(7, [(0, i) for i in range(1, 7)])
    for i in range(0, 9):
        res = theta(star, 0, i)
        assert res.exact and res.value == min(i, 6)
    k4 = gen_complete(4)
    assert theta(k4, 0, 1) == ThetaResult(3, True)
    assert theta(k4, 2, 0) == ThetaResult(0, True)


def test_theta_monotone_and_bounded(rng):
    from conftest import small_random_graph
    for _ in range(25):
        g = small_random_graph(rng)
        u = int(rng.integers(0, g.n))
        deg = g.degree(u)
        prev = 0
        for i in range(0, deg + 2):
            res = theta(g, u, i)
            assert res.exact
            assert prev <= res.value <= deg
            assert res.value >= min(i, deg)
            prev = res.value


def test_theta_greedy_estimate_flagged():
    star = Graph(30, [(0, i) for i in range(1, 30)])
    res = theta(star, 0, 5)
    assert not res.exact
    assert 5 <= res.value <= 29


# -- exact vs sampled consistency ---------------------------------------------------


@settings(max_examples=15)
@given(st.integers(2, 10), st.sampled_from([0.1, 0.5, 0.9]),
       st.integers(0, 100))
def test_sampled_never_fails_where_exact_passes(n, p, seed):
    g = gen_gnp(n, 0.5, seed)
    for exact_check, sampled in [
        (check_p1(g, p), check_p1(g, p, "sampled", 10, seed)),
        (check_p2(g, p), check_p2(g, p, "sampled", 10, seed)),
        (check_p4(g, p), check_p4(g, p, "sampled", 10, seed)),
    ]:
        if exact_check.status == "pass":
            assert sampled.status in ("pass", "sampled-pass")

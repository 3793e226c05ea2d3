import math

import numpy as np
import pytest

from reference import reference_active, reference_is_mis, reference_step
from selfstab_mis import coins, exact
from selfstab_mis.dynamics import (BLACK, BLACK0, BLACK1, GRAY, WHITE,
                                   ProcessKind, StateVector, active_set,
                                   init_states, is_stabilized, k_active_set,
                                   run_trial, stable_sets, step)
from selfstab_mis.graph import Graph, gen_complete, gen_disjoint_cliques, gen_gnp

P3 = Graph(3, [(0, 1), (1, 2)])


def sv(process, colors, round=0):
    return StateVector(process=process, colors=np.array(colors, np.uint8),
                       round=round)


# -- init policies -------------------------------------------------------------


def test_init_examples():
    s = init_states(ProcessKind.TWO_STATE, 4, "all-black", 0)
    assert (s.colors == BLACK).all() and s.round == 0
    s = init_states(ProcessKind.THREE_STATE, 2, "all-white", 0)
    assert (s.colors == WHITE).all()
    with pytest.raises(ValueError):
        init_states(ProcessKind.TWO_STATE, 4, "all-gray", 0)
    g = init_states(ProcessKind.THREE_COLOR, 3, "all-gray", 0)
    assert (g.colors == GRAY).all()


def test_init_uniform_random_balance():
    s = init_states(ProcessKind.TWO_STATE, 100_000, "uniform-random", 31)
    frac = float((s.colors == BLACK).mean())
    assert abs(frac - 0.5) < 0.01
    s3 = init_states(ProcessKind.THREE_COLOR, 90_000, "uniform-random", 32)
    for color in (WHITE, BLACK, GRAY):
        assert abs(float((s3.colors == color).mean()) - 1 / 3) < 0.01


def test_init_alternating_cycles_alphabet():
    s = init_states(ProcessKind.TWO_STATE, 5, "alternating", 0)
    assert list(s.colors) == [WHITE, BLACK, WHITE, BLACK, WHITE]
    s3 = init_states(ProcessKind.THREE_STATE, 6, "alternating", 0)
    assert list(s3.colors) == [WHITE, BLACK1, BLACK0] * 2


def test_init_deterministic():
    a = init_states(ProcessKind.THREE_STATE, 1000, "uniform-random", 7)
    b = init_states(ProcessKind.THREE_STATE, 1000, "uniform-random", 7)
    assert np.array_equal(a.colors, b.colors)


# -- active / stable sets -------------------------------------------------------


def test_active_set_two_state_examples():
    assert active_set(P3, sv(ProcessKind.TWO_STATE, [BLACK, WHITE, BLACK])).count == 0
    k3 = gen_complete(3)
    assert sorted(active_set(k3, sv(ProcessKind.TWO_STATE, [BLACK] * 3)).indices()) == [0, 1, 2]
    iso = Graph(1, [])
    assert 0 in active_set(iso, sv(ProcessKind.TWO_STATE, [WHITE]))


def test_active_set_matches_reference(rng):
    from conftest import small_random_graph
    for _ in range(40):
        g = small_random_graph(rng)
        for proc in ProcessKind:
            hi = 2 if proc is ProcessKind.TWO_STATE else 3
            colors = rng.integers(0, hi, g.n).astype(np.uint8)
            got = set(active_set(g, sv(proc, colors)).indices())
            assert got == reference_active(g, colors, proc)


def test_stable_sets_examples():
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    res = stable_sets(star, sv(ProcessKind.TWO_STATE,
                               [BLACK, WHITE, WHITE, WHITE]))
    assert sorted(res.independent.indices()) == [0]
    assert res.stable_all.count == 4 and res.nonstable.count == 0
    k3 = gen_complete(3)
    res = stable_sets(k3, sv(ProcessKind.TWO_STATE, [BLACK] * 3))
    assert res.independent.count == 0 and res.stable_all.count == 0
    res = stable_sets(P3, sv(ProcessKind.TWO_STATE, [BLACK, WHITE, BLACK]))
    assert sorted(res.independent.indices()) == [0, 2]
    assert res.stable_all.count == 3


def test_k_active_examples():
    k3 = gen_complete(3)
    all_black = sv(ProcessKind.TWO_STATE, [BLACK] * 3)
    assert k_active_set(k3, all_black, 2).count == 3
    assert k_active_set(k3, all_black, 1).count == 0
    assert k_active_set(k3, all_black, 99).count == active_set(k3, all_black).count
    with pytest.raises(ValueError):
        k_active_set(k3, all_black, -1)


def test_is_stabilized_examples():
    assert is_stabilized(P3, sv(ProcessKind.TWO_STATE, [BLACK, WHITE, BLACK]))
    assert not is_stabilized(P3, sv(ProcessKind.TWO_STATE, [BLACK, WHITE, WHITE]))
    k2 = gen_complete(2)
    assert not is_stabilized(k2, sv(ProcessKind.TWO_STATE, [BLACK, BLACK]))


# -- single steps ---------------------------------------------------------------


def test_step_two_state_forced_branches():
    k2 = gen_complete(2)
    s = sv(ProcessKind.TWO_STATE, [BLACK, BLACK])
    seed = 5
    new = step(k2, s, seed)
    expect = [BLACK if coins.fair_bit(seed, coins.STREAM_PROCESS, 1, u)
              else WHITE for u in range(2)]
    assert list(new.colors) == expect and new.round == 1


def test_step_three_state_forced_branches():
    k2 = gen_complete(2)
    s = sv(ProcessKind.THREE_STATE, [BLACK0, BLACK1])
    seed = 9
    new = step(k2, s, seed)
    assert new.colors[0] == WHITE  # black0 beside black1 turns white
    expect1 = BLACK1 if coins.fair_bit(seed, coins.STREAM_PROCESS, 1, 1) \
        else BLACK0
    assert new.colors[1] == expect1


def test_step_three_color_gray_gated_by_switch():
    iso = Graph(1, [])
    s = sv(ProcessKind.THREE_COLOR, [GRAY])
    on = np.array([True])
    off = np.array([False])
    assert step(iso, s, 3, switch_on=on).colors[0] == WHITE
    assert step(iso, s, 3, switch_on=off).colors[0] == GRAY


def test_step_switch_on_argument_validation():
    k2 = gen_complete(2)
    s2 = sv(ProcessKind.TWO_STATE, [WHITE, WHITE])
    with pytest.raises(ValueError):
        step(k2, s2, 0, switch_on=np.array([True, True]))
    s3 = sv(ProcessKind.THREE_COLOR, [GRAY, GRAY])
    with pytest.raises(ValueError):
        step(k2, s3, 0)


def test_step_matches_reference_in_any_order(rng):
    from conftest import small_random_graph
    for trial in range(30):
        g = small_random_graph(rng)
        seed = int(rng.integers(0, 2**63))
        for proc in ProcessKind:
            hi = 2 if proc is ProcessKind.TWO_STATE else 3
            colors = rng.integers(0, hi, g.n).astype(np.uint8)
            s = sv(proc, colors, round=int(rng.integers(0, 50)))
            sigma = rng.random(g.n) < 0.5 if proc is ProcessKind.THREE_COLOR \
                else None
            got = step(g, s, seed, switch_on=sigma)
            order = list(rng.permutation(g.n))
            want = reference_step(g, colors, proc, seed, s.round + 1,
                                  sigma_on=sigma, order=order)
            assert np.array_equal(got.colors, want)


# -- trials ----------------------------------------------------------------------


def test_run_trial_k1_geometric():
    g = Graph(1, [])
    times = []
    for i in range(20_000):
        tr = run_trial(ProcessKind.TWO_STATE, g, "all-white", i, max_rounds=500)
        assert not tr.capped
        times.append(tr.stabilization_round)
    mean = float(np.mean(times))
    assert abs(mean - 2.0) < 0.05  # geometric(1/2) starting at round 1


def test_run_trial_k2_mean_matches_joint_chain():
    # exact joint-chain mean from all-white is 2 (verified in test_exact)
    g = gen_complete(2)
    expected = float(exact.mean_stabilization_times(g)[0])
    times = []
    for i in range(100_000):
        tr = run_trial(ProcessKind.TWO_STATE, g, "all-white", i, max_rounds=500)
        times.append(tr.stabilization_round)
    arr = np.array(times, dtype=float)
    assert abs(arr.mean() - expected) < 0.05
    se = arr.std(ddof=1) / math.sqrt(arr.size)
    assert abs(arr.mean() - expected) <= 3 * se


def test_run_trial_byte_determinism():
    g = gen_gnp(32, 0.2, seed=5)
    a = run_trial(ProcessKind.TWO_STATE, g, "uniform-random", 99, record_every=1)
    b = run_trial(ProcessKind.TWO_STATE, g, "uniform-random", 99, record_every=1)
    assert a.fingerprint() == b.fingerprint()
    assert np.array_equal(a.final.colors, b.final.colors)


def test_run_trial_capped_marker():
    g = gen_complete(64)
    tr = run_trial(ProcessKind.TWO_STATE, g, "all-white", 3, max_rounds=1)
    assert tr.capped and tr.stabilization_round is None
    assert tr.rounds_executed == 1


def test_run_trial_debug_branch_audit():
    for proc, init in [(ProcessKind.TWO_STATE, "uniform-random"),
                       (ProcessKind.THREE_STATE, "uniform-random"),
                       (ProcessKind.THREE_COLOR, "all-gray")]:
        g = gen_gnp(24, 0.25, seed=8)
        tr = run_trial(proc, g, init, 17, max_rounds=3000, debug=True,
                       switch_a=8.0, switch_zeta=0.5)
        assert not tr.capped


def _python_trajectory(g, proc, policy, seed, rounds, zeta=0.5):
    """Per-round states via public single-step API, for set-level invariants."""
    from selfstab_mis import switch as sw
    s = init_states(proc, g.n, policy, seed)
    lv = sw.switch_init(g.n, "uniform-random", seed, zeta=zeta) \
        if proc is ProcessKind.THREE_COLOR else None
    states = [s]
    for _ in range(rounds):
        if proc is ProcessKind.THREE_COLOR:
            sig = sw.sigma(lv)
            s = step(g, s, seed, switch_on=sig.mask)
            lv = sw.switch_step(g, lv, seed)
        else:
            s = step(g, s, seed)
        states.append(s)
        if is_stabilized(g, s):
            break
    return states


@pytest.mark.parametrize("proc,policy", [
    (ProcessKind.TWO_STATE, "uniform-random"),
    (ProcessKind.THREE_STATE, "all-black"),
    (ProcessKind.THREE_COLOR, "uniform-random"),
])
def test_monotone_stability(proc, policy):
    g = gen_gnp(28, 0.2, seed=11)
    states = _python_trajectory(g, proc, policy, 23, 2000)
    prev_i, prev_all = set(), set()
    for s in states:
        res = stable_sets(g, s)
        cur_i = set(res.independent.indices())
        cur_all = set(res.stable_all.indices())
        assert prev_i <= cur_i
        assert prev_all <= cur_all
        prev_i, prev_all = cur_i, cur_all


def test_three_state_stable_black_stays_black():
    g = gen_gnp(20, 0.3, seed=4)
    states = _python_trajectory(g, ProcessKind.THREE_STATE, "uniform-random",
                                5, 2000)
    stable_at = {}
    for t, s in enumerate(states):
        for u in stable_sets(g, s).independent.indices():
            stable_at.setdefault(int(u), t)
    for u, t0 in stable_at.items():
        for s in states[t0:]:
            assert s.colors[u] in (BLACK1, BLACK0)


def test_per_round_metric_identities():
    for proc, policy in [(ProcessKind.TWO_STATE, "uniform-random"),
                         (ProcessKind.THREE_STATE, "uniform-random"),
                         (ProcessKind.THREE_COLOR, "all-gray")]:
        g = gen_gnp(26, 0.25, seed=13)
        states = _python_trajectory(g, proc, policy, 13, 1500)
        for s in states:
            black = set(np.flatnonzero(s.black_mask()))
            act = set(active_set(g, s).indices())
            res = stable_sets(g, s)
            ind = set(res.independent.indices())
            whites = int((s.colors == WHITE).sum())
            grays = int((s.colors == GRAY).sum()) \
                if proc is ProcessKind.THREE_COLOR else 0
            assert len(black) + whites + grays == g.n
            assert ind <= black
            assert res.nonstable.count == g.n - res.stable_all.count
            closed = set(ind)
            for u in ind:
                closed |= {int(v) for v in g.neighbors(u)}
            assert res.stable_all.count == len(closed)
            if proc is ProcessKind.THREE_STATE:
                assert act & closed <= ind
            else:
                assert not (act & closed)


def test_trial_final_states_are_mis():
    for proc in ProcessKind:
        g = gen_gnp(40, 0.15, seed=21)
        tr = run_trial(proc, g, "uniform-random", 8, max_rounds=10**5)
        assert not tr.capped
        black = np.flatnonzero(tr.final.black_mask())
        assert reference_is_mis(g, black)


def test_distribution_matches_joint_chain():
    g = Graph(3, [(0, 1), (1, 2)])
    trials = 40_000
    init = init_states(ProcessKind.TWO_STATE, 3, "all-white", 0)
    times = np.array([
        run_trial(ProcessKind.TWO_STATE, g, "all-white", i,
                  max_rounds=500).stabilization_round
        for i in range(trials)], dtype=float)
    cdf = exact.absorption_cdf(g, 0, 12)
    for t in (1, 2, 3, 5, 8):
        phat = float((times <= t).mean())
        p = float(cdf[t])
        se = math.sqrt(max(p * (1 - p), 1e-12) / trials)
        assert abs(phat - p) <= 3.5 * se


def test_statevector_validates_alphabet():
    with pytest.raises(ValueError):
        sv(ProcessKind.TWO_STATE, [0, 2])


def test_gray_vertices_were_recently_active():
    # a gray vertex became gray straight after being active black and stays
    # gray at most one switch off-run, so any gray at round t was active
    # within the last (max observed off-run + 1) rounds
    from selfstab_mis import switch as sw
    zeta = 0.9
    g = gen_disjoint_cliques(8, 8)
    s = init_states(ProcessKind.THREE_COLOR, g.n, "uniform-random", 4)
    lv = sw.switch_init(g.n, "uniform-random", 4, zeta=zeta)
    states, sigmas = [s], [sw.sigma(lv).mask.copy()]
    active_hist = [set(active_set(g, s).indices())]
    for _ in range(300):
        s = step(g, s, 4, switch_on=sigmas[-1])
        lv = sw.switch_step(g, lv, 4)
        states.append(s)
        sigmas.append(sw.sigma(lv).mask.copy())
        active_hist.append(set(active_set(g, s).indices()))
        if is_stabilized(g, s):
            break
    off = ~np.stack(sigmas)
    max_off_run = 0
    for u in range(g.n):
        run = 0
        for v in off[:, u]:
            run = run + 1 if v else 0
            max_off_run = max(max_off_run, run)
    window = max_off_run + 1
    checked = 0
    for t, s_t in enumerate(states):
        if t < window:
            continue
        for u in np.flatnonzero(s_t.colors == GRAY):
            assert any(int(u) in active_hist[j]
                       for j in range(t - window, t))
            checked += 1
    assert checked > 0  # the run must actually exercise the claim


def test_active_black_rounds_are_rare_on_diameter_two():
    # on a diameter <= 2 graph, a vertex is non-stable black during at most
    # a handful of rounds per (a/6) ln n window (two black runs, short each)
    from selfstab_mis import switch as sw
    g = gen_complete(16)
    window = int((512 / 6) * math.log(16))
    total, vertex_windows = 0, 0
    for seed in (1, 2, 3):
        s = init_states(ProcessKind.THREE_COLOR, g.n, "uniform-random", seed)
        lv = sw.switch_init(g.n, "uniform-random", seed)
        counts = np.zeros(g.n, dtype=int)
        for t in range(2 * window):
            sig = sw.sigma(lv)
            s = step(g, s, seed, switch_on=sig.mask)
            lv = sw.switch_step(g, lv, seed)
            if t >= window:
                black = s.black_mask()
                nonstable = stable_sets(g, s).nonstable.mask
                counts += (black & nonstable).astype(int)
        total += int(counts.sum())
        vertex_windows += g.n
    assert total / vertex_windows <= 4.0

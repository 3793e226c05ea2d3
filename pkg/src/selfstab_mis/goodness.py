"""Structural property verifier for (n, p)-style random-graph regularity.

Six properties (P1-P6) relate a graph to a density parameter p: induced
average degree (P1), neighbor expansion into large sets (P2), a bounded
difference of outer neighborhoods (P3), edge counts between small and large
sets (P4), pairwise common-neighbor bounds (P5), and small diameter at high
density (P6).  G(n, p) graphs satisfy all six with high probability, so the
verifier doubles as a sanity check on generated inputs.

P1-P4 are universally quantified over subsets: exact mode enumerates
(feasible only at toy sizes), sampled mode is a refutation search that can
fail a graph but never prove it.  P5 and P6 are always exact.  Every ``fail``
carries a witness that independently re-verifies via ``witness_violates``.
Floating-point thresholds get a 1e-9 slack toward pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Optional

import numpy as np

from . import coins
from .graph import Graph

EPS = 1e-9
P1_P2_P4_EXACT_CAP = 16
P3_EXACT_CAP = 12
THETA_EXACT_DEGREE_CAP = 20


@dataclass
class PropertyResult:
    name: str
    status: str                      # pass | fail | skipped | sampled-pass
    witness: Optional[dict] = None
    detail: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status,
                "witness": self.witness, "detail": self.detail}


@dataclass
class GoodnessReport:
    n: int
    p: float
    mode: str
    properties: dict

    @property
    def passed(self) -> bool:
        return not any(r.failed for r in self.properties.values())

    @property
    def definitive(self) -> bool:
        """True when the verdict relied on no sampling."""
        return all(r.status in ("pass", "fail", "skipped")
                   for r in self.properties.values())

    def to_json_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p, "mode": self.mode,
            "passed": self.passed, "definitive": self.definitive,
            "properties": {k: v.as_dict()
                           for k, v in sorted(self.properties.items())},
        }


class _Sampler:
    """Sequential deterministic sampler over the SAMPLE coin stream."""

    def __init__(self, seed: int):
        self.seed = seed
        self.ctr = 0

    def below(self, bound: int) -> int:
        v = coins.uniform_below(self.seed, coins.STREAM_SAMPLE, self.ctr, bound)
        self.ctr += 1
        return v

    def subset(self, n: int, size: int) -> np.ndarray:
        pool = list(range(n))
        for i in range(size):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.asarray(sorted(pool[:size]), dtype=np.int64)


def _mask_to_list(mask: int) -> list[int]:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return out


def _union_masks(masks: list[int], members: int) -> int:
    out = 0
    m = members
    u = 0
    while m:
        if m & 1:
            out |= masks[u]
        m >>= 1
        u += 1
    return out


def _submasks(mask: int) -> Iterator[int]:
    """All nonempty submasks of ``mask``."""
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def _members_of(g: Graph, verts) -> np.ndarray:
    out = np.zeros(g.n, dtype=bool)
    out[np.asarray(verts, dtype=np.int64)] = True
    return out


def _neighbors_mask(g: Graph, members: np.ndarray) -> np.ndarray:
    """Open neighborhood N(S) of the boolean member mask S."""
    e = g.edges()
    out = np.zeros(g.n, dtype=bool)
    if e.size:
        out[e[:, 0][members[e[:, 1]]]] = True
        out[e[:, 1][members[e[:, 0]]]] = True
    return out & ~members


def _nbr_counts_into(g: Graph, members: np.ndarray) -> np.ndarray:
    """|N(u) ∩ S| for every u, with S the boolean member mask."""
    e = g.edges()
    if not e.size:
        return np.zeros(g.n, dtype=np.int64)
    a = np.bincount(e[:, 0], weights=members[e[:, 1]].astype(np.float64),
                    minlength=g.n)
    b = np.bincount(e[:, 1], weights=members[e[:, 0]].astype(np.float64),
                    minlength=g.n)
    return (a + b).astype(np.int64)


def _require_exact_cap(g: Graph, cap: int) -> None:
    if g.n > cap:
        raise ValueError(f"exact mode cap exceeded (n <= {cap})")


# -- P1: induced average degree ------------------------------------------------


def _p1_threshold(p: float, s: int, n: int) -> float:
    return max(8.0 * p * s, 4.0 * math.log(n)) if n > 1 else max(8.0 * p * s, 0.0)


def check_p1(g: Graph, p: float, mode: str = "exact", samples: int = 100,
             seed: int = 0) -> PropertyResult:
    """Every nonempty S has induced average degree <= max(8p|S|, 4 ln n)."""
    if mode == "exact":
        _require_exact_cap(g, P1_P2_P4_EXACT_CAP)
        masks = g.neighbor_masks()
        for S in range(1, 1 << g.n):
            s = S.bit_count()
            two_e = 0
            m = S
            u = 0
            while m:
                if m & 1:
                    two_e += (masks[u] & S).bit_count()
                m >>= 1
                u += 1
            thr = _p1_threshold(p, s, g.n)
            if two_e > (thr + EPS) * s:
                return PropertyResult("P1", "fail", witness={
                    "property": "P1", "S": _mask_to_list(S),
                    "avg_degree": two_e / s, "threshold": thr})
        return PropertyResult("P1", "pass")
    sampler = _Sampler(coins.word(seed, coins.STREAM_SAMPLE, 1001, 0))
    for s in range(1, g.n + 1):
        for _ in range(samples):
            verts = sampler.subset(g.n, s)
            members = _members_of(g, verts)
            two_e = 2 * _induced_edges(g, members)
            thr = _p1_threshold(p, s, g.n)
            if two_e > (thr + EPS) * s:
                return PropertyResult("P1", "fail", witness={
                    "property": "P1", "S": verts.tolist(),
                    "avg_degree": two_e / s, "threshold": thr})
    return PropertyResult("P1", "sampled-pass")


def _induced_edges(g: Graph, members: np.ndarray) -> int:
    e = g.edges()
    if not e.size:
        return 0
    return int((members[e[:, 0]] & members[e[:, 1]]).sum())


# -- P2: expansion into large sets ---------------------------------------------


def check_p2(g: Graph, p: float, mode: str = "exact", samples: int = 100,
             seed: int = 0) -> PropertyResult:
    """Sets of size >= 40 ln(n)/p leave at most |S|/2 poorly-connected outsiders."""
    if p <= 0.0:
        return PropertyResult("P2", "pass", detail={"vacuous": "p = 0"})
    s_min = 40.0 * math.log(g.n) / p if g.n > 1 else 0.0
    if s_min > g.n:
        return PropertyResult(
            "P2", "pass", detail={"vacuous": f"size floor {s_min:.1f} > n"})
    lo = max(1, math.ceil(s_min - EPS))
    if mode == "exact":
        _require_exact_cap(g, P1_P2_P4_EXACT_CAP)
        masks = g.neighbor_masks()
        for S in range(1, 1 << g.n):
            s = S.bit_count()
            if s < s_min:
                continue
            bad = 0
            for u in range(g.n):
                if not (S >> u) & 1 and \
                        (masks[u] & S).bit_count() < p * s / 2.0 - EPS:
                    bad += 1
            if bad > s / 2.0 + EPS:
                return PropertyResult("P2", "fail", witness={
                    "property": "P2", "S": _mask_to_list(S), "bad_count": bad})
        return PropertyResult("P2", "pass")
    sampler = _Sampler(coins.word(seed, coins.STREAM_SAMPLE, 1002, 0))
    for s in range(lo, g.n + 1):
        for _ in range(samples):
            verts = sampler.subset(g.n, s)
            members = _members_of(g, verts)
            cnt = _nbr_counts_into(g, members)
            bad = int(((cnt < p * s / 2.0 - EPS) & ~members).sum())
            if bad > s / 2.0 + EPS:
                return PropertyResult("P2", "fail", witness={
                    "property": "P2", "S": verts.tolist(), "bad_count": bad})
    return PropertyResult("P2", "sampled-pass")


# -- P3: outer-neighborhood difference ------------------------------------------


def _p3_slack(p: float, n: int) -> float:
    if p <= 0.0:
        return math.inf
    return 8.0 * math.log(n) ** 2 / p if n > 1 else 0.0


def _p3_eval_masks(masks, S: int, T: int, I: int) -> tuple[int, int]:
    """(lhs, rhs) = (|N(T) \\ N+(S∪I)|, |N(S) \\ N+(I)|) over bitmasks."""
    n_t = _union_masks(masks, T) & ~T
    n_si = _union_masks(masks, S | I)
    lhs = (n_t & ~(S | I | n_si)).bit_count()
    n_s = _union_masks(masks, S) & ~S
    n_i = _union_masks(masks, I)
    rhs = (n_s & ~(I | n_i)).bit_count()
    return lhs, rhs


def _p3_enumerate(g: Graph, p: float) -> Optional[dict]:
    """Exhaustive search for a violating (S, T, I); None when there is none."""
    masks = g.neighbor_masks()
    slack = _p3_slack(p, g.n)
    full = (1 << g.n) - 1
    for I in range(0, 1 << g.n):
        n_i = _union_masks(masks, I) & ~I
        allowed = full & ~(I | n_i)
        if not allowed:
            continue
        for T in _submasks(allowed):
            t = T.bit_count()
            rem = allowed & ~T
            if rem.bit_count() < 2 * t:
                continue
            for S in _submasks(rem):
                if S.bit_count() < 2 * t:
                    continue
                lhs, rhs = _p3_eval_masks(masks, S, T, I)
                if lhs > rhs + slack + EPS:
                    return {"property": "P3", "S": _mask_to_list(S),
                            "T": _mask_to_list(T), "I": _mask_to_list(I),
                            "lhs": lhs, "rhs": rhs, "slack": slack}
    return None


def check_p3(g: Graph, p: float, mode: str = "exact", samples: int = 100,
             seed: int = 0) -> PropertyResult:
    """|N(T) \\ N+(S∪I)| <= |N(S) \\ N+(I)| + 8 ln²(n)/p over qualifying triples."""
    slack = _p3_slack(p, g.n)
    if mode == "exact":
        _require_exact_cap(g, P3_EXACT_CAP)
        if slack >= g.n and g.n > 8:
            # the left side never exceeds n, so the bound holds outright
            return PropertyResult("P3", "pass",
                                  detail={"vacuous": "slack exceeds n"})
        w = _p3_enumerate(g, p)
        if w is not None:
            return PropertyResult("P3", "fail", witness=w)
        return PropertyResult("P3", "pass")
    if slack >= g.n:
        return PropertyResult("P3", "pass",
                              detail={"vacuous": "slack exceeds n"})
    sampler = _Sampler(coins.word(seed, coins.STREAM_SAMPLE, 1003, 0))
    for _ in range(samples):
        i_size = sampler.below(max(1, g.n // 4) + 1)
        i_set = sampler.subset(g.n, i_size)
        mi = _members_of(g, i_set)
        blocked = mi | _neighbors_mask(g, mi)
        allowed = np.flatnonzero(~blocked)
        if allowed.size < 3:
            continue
        t_size = 1 + sampler.below(max(1, allowed.size // 3))
        perm = sampler.subset(allowed.size, allowed.size)
        t_set = allowed[perm[:t_size]]
        rest = allowed[perm[t_size:]]
        if rest.size < 2 * t_size:
            continue
        s_size = 2 * t_size + sampler.below(rest.size - 2 * t_size + 1)
        s_set = rest[:s_size]
        mt, ms = _members_of(g, t_set), _members_of(g, s_set)
        n_t = _neighbors_mask(g, mt)
        n_si = _neighbors_mask(g, ms | mi)
        lhs = int((n_t & ~(ms | mi | n_si)).sum())
        n_s = _neighbors_mask(g, ms)
        n_i = _neighbors_mask(g, mi)
        rhs = int((n_s & ~(mi | n_i)).sum())
        if lhs > rhs + slack + EPS:
            return PropertyResult("P3", "fail", witness={
                "property": "P3", "S": s_set.tolist(), "T": t_set.tolist(),
                "I": i_set.tolist(), "lhs": lhs, "rhs": rhs, "slack": slack})
    return PropertyResult("P3", "sampled-pass")


# -- P4: edges between a small set and a larger one -----------------------------


def _p4_best_s(w: np.ndarray, forbidden: np.ndarray, t: int,
               ln_n: float) -> Optional[tuple[np.ndarray, int]]:
    """Worst-case S for fixed T: margins are additive, so sort and scan.

    Returns (S, edge_count) for the most violating S with |S| >= t, or None
    when every admissible S satisfies the bound.
    """
    w = w.astype(np.float64).copy()
    w[forbidden] = -np.inf
    order = np.argsort(-w)
    usable = int(np.isfinite(w[order]).sum())
    if usable < t:
        return None
    cums = np.cumsum(w[order[:usable]])
    sizes = np.arange(1, usable + 1)
    margin = cums - 6.0 * sizes * ln_n
    cand = np.flatnonzero((sizes >= t) & (margin > EPS))
    if cand.size == 0:
        return None
    best = cand[np.argmax(margin[cand])]
    s_set = np.sort(order[:best + 1])
    return s_set, int(cums[best])


def check_p4(g: Graph, p: float, mode: str = "exact", samples: int = 100,
             seed: int = 0) -> PropertyResult:
    """|E(S, T)| <= 6|S| ln n for disjoint S, T with |S| >= |T| <= ln(n)/p."""
    ln_n = math.log(g.n) if g.n > 1 else 0.0
    t_cap_real = (ln_n / p) if p > 0 else float(g.n)
    if t_cap_real < 1.0:
        return PropertyResult(
            "P4", "pass", detail={"vacuous": f"size cap {t_cap_real:.2f} < 1"})
    t_cap = min(int(t_cap_real + EPS), g.n // 2)
    if t_cap < 1:
        return PropertyResult(
            "P4", "pass", detail={"vacuous": "no admissible T"})
    if mode == "exact":
        _require_exact_cap(g, P1_P2_P4_EXACT_CAP)
        masks = g.neighbor_masks()
        for size in range(1, t_cap + 1):
            for t_verts in combinations(range(g.n), size):
                t_mask = 0
                for v in t_verts:
                    t_mask |= 1 << v
                w = np.array([(masks[u] & t_mask).bit_count()
                              for u in range(g.n)], dtype=np.int64)
                forb = np.zeros(g.n, dtype=bool)
                forb[list(t_verts)] = True
                hit = _p4_best_s(w, forb, size, ln_n)
                if hit is not None:
                    s_set, cnt = hit
                    return PropertyResult("P4", "fail", witness={
                        "property": "P4", "S": s_set.tolist(),
                        "T": list(t_verts), "edges": cnt,
                        "threshold": 6.0 * s_set.size * ln_n})
        return PropertyResult("P4", "pass")
    sampler = _Sampler(coins.word(seed, coins.STREAM_SAMPLE, 1004, 0))
    candidates = []
    degs = g.degrees
    for size in range(1, t_cap + 1):  # extremal heuristic: top-degree sets
        candidates.append(np.sort(np.argsort(-degs)[:size]))
    for _ in range(samples):
        size = 1 + sampler.below(t_cap)
        candidates.append(sampler.subset(g.n, size))
    for t_set in candidates:
        members = _members_of(g, t_set)
        w = _nbr_counts_into(g, members)
        hit = _p4_best_s(w, members, t_set.size, ln_n)
        if hit is not None:
            s_set, cnt = hit
            return PropertyResult("P4", "fail", witness={
                "property": "P4", "S": s_set.tolist(), "T": t_set.tolist(),
                "edges": cnt, "threshold": 6.0 * s_set.size * ln_n})
    return PropertyResult("P4", "sampled-pass")


# -- P5: common neighbors (always exact) ----------------------------------------


def check_p5(g: Graph, p: float) -> PropertyResult:
    """No pair of vertices shares more than max(6np², 4 ln n) common neighbors."""
    n = g.n
    thr = max(6.0 * n * p * p, 4.0 * math.log(n) if n > 1 else 0.0)
    if n == 1:
        return PropertyResult("P5", "pass", detail={"threshold": thr})
    adj = np.zeros((n, n), dtype=np.float32)
    e = g.edges()
    if e.size:
        adj[e[:, 0], e[:, 1]] = 1.0
        adj[e[:, 1], e[:, 0]] = 1.0
    best = -1
    arg = (0, 1)
    block = max(1, min(n, 2**22 // n))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        counts = adj[lo:hi] @ adj
        counts[np.arange(hi - lo), np.arange(lo, hi)] = -1.0
        idx = np.unravel_index(np.argmax(counts), counts.shape)
        val = int(counts[idx])
        if val > best:
            best, arg = val, (int(idx[0]) + lo, int(idx[1]))
    if best > thr + EPS:
        return PropertyResult("P5", "fail", witness={
            "property": "P5", "u": arg[0], "v": arg[1], "common": best,
            "threshold": thr})
    return PropertyResult("P5", "pass", detail={"max_common": best,
                                                "threshold": thr})


# -- P6: diameter at high density (always exact) ---------------------------------


def p6_applies(p: float, n: int) -> bool:
    return p >= 2.0 * math.sqrt(math.log(n) / n) if n > 1 else True


def check_p6(g: Graph, p: float) -> PropertyResult:
    """If p >= 2 sqrt(ln(n)/n), the graph must have diameter <= 2."""
    if not p6_applies(p, g.n):
        return PropertyResult("P6", "skipped",
                              detail={"reason": "density below threshold"})
    from .graph import diameter_at_most_two
    ok, pair = diameter_at_most_two(g)
    if not ok:
        return PropertyResult("P6", "fail", witness={
            "property": "P6", "u": pair[0], "v": pair[1]})
    return PropertyResult("P6", "pass")


# -- aggregate -------------------------------------------------------------------


def is_good(g: Graph, p: float, mode: str = "exact", samples: int = 100,
            seed: int = 0) -> GoodnessReport:
    """Run all six checks; overall pass iff none fails.

    Sampled passes and skipped checks count as non-failures but are flagged
    (``definitive`` is False when any verdict relied on sampling).
    """
    props = {
        "P1": check_p1(g, p, mode, samples, seed),
        "P2": check_p2(g, p, mode, samples, seed),
        "P3": check_p3(g, p, mode, samples, seed),
        "P4": check_p4(g, p, mode, samples, seed),
        "P5": check_p5(g, p),
        "P6": check_p6(g, p),
    }
    return GoodnessReport(n=g.n, p=p, mode=mode, properties=props)


# -- theta: neighborhood-cover diagnostic ----------------------------------------


@dataclass(frozen=True)
class ThetaResult:
    value: int
    exact: bool


def theta(g: Graph, u: int, i: int,
          exact_degree_cap: int = THETA_EXACT_DEGREE_CAP) -> ThetaResult:
    """max over S ⊆ N(u), |S| <= i of |N(u) ∩ N+(S)|.

    Exact by enumeration when deg(u) <= the cap; otherwise an admissible
    upper estimate from greedy max-coverage (greedy achieves at least a
    (1 - 1/e) fraction of the optimum), flagged as non-exact.
    """
    if i <= 0:
        return ThetaResult(0, True)
    nbrs = [int(v) for v in g.neighbors(u)]
    deg = len(nbrs)
    if deg == 0:
        return ThetaResult(0, True)
    pos = {v: j for j, v in enumerate(nbrs)}
    cover = []
    for v in nbrs:
        mask = 1 << pos[v]
        for w in g.neighbors(v):
            w = int(w)
            if w in pos:
                mask |= 1 << pos[w]
        cover.append(mask)
    size = min(i, deg)
    if deg <= exact_degree_cap:
        best = 0
        for combo in combinations(range(deg), size):
            acc = 0
            for j in combo:
                acc |= cover[j]
            best = max(best, acc.bit_count())
        return ThetaResult(best, True)
    acc = 0
    for _ in range(size):
        gains = [(acc | c).bit_count() for c in cover]
        acc |= cover[int(np.argmax(gains))]
    upper = min(deg, int(acc.bit_count() / (1.0 - math.exp(-1.0)) + EPS))
    return ThetaResult(upper, False)


# -- witness re-verification -------------------------------------------------------


def witness_violates(g: Graph, p: float, witness: dict) -> bool:
    """Re-evaluate a returned witness from scratch; True iff it violates."""
    prop = witness["property"]
    ln_n = math.log(g.n) if g.n > 1 else 0.0
    if prop == "P1":
        verts = witness["S"]
        members = _members_of(g, verts)
        two_e = 2 * _induced_edges(g, members)
        return two_e > (_p1_threshold(p, len(verts), g.n) + EPS) * len(verts)
    if prop == "P2":
        verts = witness["S"]
        s = len(verts)
        if s < 40.0 * ln_n / p:
            return False
        members = _members_of(g, verts)
        cnt = _nbr_counts_into(g, members)
        bad = int(((cnt < p * s / 2.0 - EPS) & ~members).sum())
        return bad > s / 2.0 + EPS
    if prop == "P3":
        ms = _members_of(g, witness["S"])
        mt = _members_of(g, witness["T"])
        mi = _members_of(g, witness["I"])
        if (ms & mt).any() or (ms & mi).any() or (mt & mi).any():
            return False
        if int(ms.sum()) < 2 * int(mt.sum()):
            return False
        if ((ms | mt) & _neighbors_mask(g, mi)).any():
            return False
        n_t = _neighbors_mask(g, mt)
        lhs = int((n_t & ~(ms | mi | _neighbors_mask(g, ms | mi))).sum())
        n_s = _neighbors_mask(g, ms)
        rhs = int((n_s & ~(mi | _neighbors_mask(g, mi))).sum())
        return lhs > rhs + _p3_slack(p, g.n) + EPS
    if prop == "P4":
        s_m = _members_of(g, witness["S"])
        t_m = _members_of(g, witness["T"])
        if (s_m & t_m).any() or int(s_m.sum()) < int(t_m.sum()):
            return False
        if p > 0 and int(t_m.sum()) > ln_n / p + EPS:
            return False
        e = g.edges()
        cross = int(((s_m[e[:, 0]] & t_m[e[:, 1]]) |
                     (t_m[e[:, 0]] & s_m[e[:, 1]])).sum()) if e.size else 0
        return cross > 6.0 * int(s_m.sum()) * ln_n + EPS
    if prop == "P5":
        from .graph import common_neighbors
        c = common_neighbors(g, witness["u"], witness["v"])
        return c > max(6.0 * g.n * p * p, 4.0 * ln_n) + EPS
    if prop == "P6":
        u, v = witness["u"], witness["v"]
        if g.has_edge(u, v) or u == v:
            return False
        return common_neighbors_zero(g, u, v)
    raise ValueError(f"unknown witness property {prop!r}")


def common_neighbors_zero(g: Graph, u: int, v: int) -> bool:
    from .graph import common_neighbors
    return common_neighbors(g, u, v) == 0

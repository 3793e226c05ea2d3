"""Exact reference computations for small instances.

These are the independent oracles the Monte Carlo paths are tested against:

* the full joint-state chain of the two-state process on tiny graphs
  (states are black-set bitmasks; 2^n of them), giving exact expected
  stabilization times and absorption probabilities in rational arithmetic;
* the lumped chain of the two-state process on a star, tracking only
  (center color, number of black leaves), which is exact by leaf
  exchangeability and scales to large leaf counts.

Nothing here shares code with the simulation kernels.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import comb

from .graph import Graph

_MAX_JOINT_VERTICES = 6


def _adj_masks(g: Graph) -> list[int]:
    masks = [0] * g.n
    for u, v in g.edges():
        masks[int(u)] |= 1 << int(v)
        masks[int(v)] |= 1 << int(u)
    return masks


def _active_list(adj: list[int], mask: int, n: int) -> list[int]:
    act = []
    for u in range(n):
        if (mask >> u) & 1:
            if adj[u] & mask:
                act.append(u)
        else:
            if not (adj[u] & mask):
                act.append(u)
    return act


def is_absorbing(g: Graph, mask: int) -> bool:
    """A black-set bitmask is absorbing iff it is an MIS."""
    return not _active_list(_adj_masks(g), mask, g.n)


def transitions(g: Graph, mask: int) -> list[tuple[int, Fraction]]:
    """Successor distribution of one joint state of the two-state process."""
    adj = _adj_masks(g)
    act = _active_list(adj, mask, g.n)
    if not act:
        return [(mask, Fraction(1))]
    base = mask
    for u in act:
        base &= ~(1 << u)
    p = Fraction(1, 2 ** len(act))
    out = []
    for bits in range(2 ** len(act)):
        new = base
        for i, u in enumerate(act):
            if (bits >> i) & 1:
                new |= 1 << u
        out.append((new, p))
    return out


def mean_stabilization_times(g: Graph) -> list[Fraction]:
    """Exact expected stabilization time from every joint initial state.

    Index = black-set bitmask.  Solves the absorbing-chain linear system in
    rational arithmetic; limited to very small graphs.
    """
    n = g.n
    if n > _MAX_JOINT_VERTICES:
        raise ValueError(f"joint chain limited to n <= {_MAX_JOINT_VERTICES}")
    nstates = 2 ** n
    trans = [transitions(g, m) for m in range(nstates)]
    transient = [m for m in range(nstates)
                 if not (len(trans[m]) == 1 and trans[m][0][0] == m)]
    idx = {m: i for i, m in enumerate(transient)}
    k = len(transient)
    # rows: x_i - sum Q_ij x_j = 1
    mat = [[Fraction(0)] * (k + 1) for _ in range(k)]
    for m in transient:
        i = idx[m]
        mat[i][i] += 1
        mat[i][k] = Fraction(1)
        for succ, p in trans[m]:
            if succ in idx:
                mat[i][idx[succ]] -= p
    _solve_inplace(mat, k)
    out = [Fraction(0)] * nstates
    for m, i in idx.items():
        out[m] = mat[i][k]
    return out


def _solve_inplace(mat: list[list[Fraction]], k: int) -> None:
    """Gaussian elimination on an augmented k x (k+1) rational matrix."""
    for col in range(k):
        piv = next(r for r in range(col, k) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for r in range(k):
            if r != col and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[col])]


def absorption_cdf(g: Graph, init_mask: int, t_max: int) -> list[Fraction]:
    """P[stabilized by round t] for t = 0..t_max, exactly."""
    n = g.n
    if n > _MAX_JOINT_VERTICES:
        raise ValueError(f"joint chain limited to n <= {_MAX_JOINT_VERTICES}")
    trans = {}
    dist = {init_mask: Fraction(1)}
    out = []
    for _ in range(t_max + 1):
        absorbed = Fraction(0)
        for m, p in dist.items():
            if m not in trans:
                trans[m] = transitions(g, m)
            if len(trans[m]) == 1 and trans[m][0][0] == m:
                absorbed += p
        out.append(absorbed)
        nxt = defaultdict(Fraction)
        for m, p in dist.items():
            for succ, q in trans[m]:
                nxt[succ] += p * q
        dist = dict(nxt)
    return out


# -- star graphs, lumped by leaf exchangeability -----------------------------


def star_center_stable_probability(k: int, rounds: int) -> Fraction:
    """P[the star center is stable black after ``rounds``], all-white start.

    The two-state process on a star K_{1,k} is lumpable to states
    (center color, number of black leaves); the center is stable black
    exactly in the absorbing state (black, 0).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    half = Fraction(1, 2)
    dist: dict[tuple[str, int], Fraction] = {("W", 0): Fraction(1)}
    for _ in range(rounds):
        nxt: dict[tuple[str, int], Fraction] = defaultdict(Fraction)
        for (c, b), pr in dist.items():
            if c == "B" and b == 0:
                nxt[("B", 0)] += pr
            elif c == "W" and b == k and k > 0:
                nxt[("W", k)] += pr
            elif c == "B":
                for b2 in range(b + 1):
                    pb = Fraction(comb(b, b2), 2 ** b)
                    nxt[("B", b2)] += pr * half * pb
                    nxt[("W", b2)] += pr * half * pb
            elif b == 0:
                for b2 in range(k + 1):
                    pb = Fraction(comb(k, b2), 2 ** k)
                    nxt[("B", b2)] += pr * half * pb
                    nxt[("W", b2)] += pr * half * pb
            else:
                w = k - b
                for j in range(w + 1):
                    pj = Fraction(comb(w, j), 2 ** w)
                    nxt[("W", b + j)] += pr * pj
        dist = dict(nxt)
    return dist.get(("B", 0), Fraction(0))


def any_star_center_stable_probability(ks: list[int], rounds: int) -> Fraction:
    """P[some center stable black] on disjoint stars, all-white start."""
    miss = Fraction(1)
    for k in ks:
        miss *= 1 - star_center_stable_probability(k, rounds)
    return 1 - miss


# -- the graphs on four vertices ----------------------------------------------


def four_vertex_graphs() -> list[tuple[str, Graph]]:
    """The 11 non-isomorphic simple graphs on exactly 4 vertices."""
    catalog = [
        ("empty", []),
        ("one-edge", [(0, 1)]),
        ("matching", [(0, 1), (2, 3)]),
        ("path-3", [(0, 1), (1, 2)]),
        ("triangle", [(0, 1), (0, 2), (1, 2)]),
        ("path-4", [(0, 1), (1, 2), (2, 3)]),
        ("star-3", [(0, 1), (0, 2), (0, 3)]),
        ("cycle-4", [(0, 1), (1, 2), (2, 3), (0, 3)]),
        ("paw", [(0, 1), (0, 2), (1, 2), (2, 3)]),
        ("diamond", [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]),
        ("complete-4", [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    ]
    return [(name, Graph(4, edges)) for name, edges in catalog]

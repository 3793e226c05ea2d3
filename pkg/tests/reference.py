"""Slow, independent reference implementations used as test oracles.

These re-derive the update rules from the definitions with plain Python
loops and per-vertex reads, sharing no logic with the simulation kernels
(only the keyed coin function, which is tested separately against all
backends).  ``order`` lets tests prove vertex-order independence.
"""

import numpy as np

from selfstab_mis import coins
from selfstab_mis.dynamics import BLACK, BLACK0, BLACK1, GRAY, WHITE, ProcessKind


def reference_step(g, colors, process, seed, t, sigma_on=None, order=None):
    n = g.n
    out = [None] * n
    if order is None:
        order = range(n)
    for u in order:
        c = int(colors[u])
        nbr = [int(colors[v]) for v in g.neighbors(u)]
        if process is ProcessKind.TWO_STATE:
            has_black = BLACK in nbr
            if (c == BLACK and has_black) or (c == WHITE and not has_black):
                bit = coins.fair_bit(seed, coins.STREAM_PROCESS, t, u)
                out[u] = BLACK if bit else WHITE
            else:
                out[u] = c
        elif process is ProcessKind.THREE_STATE:
            has_black1 = BLACK1 in nbr
            has_black = has_black1 or BLACK0 in nbr
            if c == BLACK1 or (c == BLACK0 and not has_black1) or \
                    (c == WHITE and not has_black):
                bit = coins.fair_bit(seed, coins.STREAM_PROCESS, t, u)
                out[u] = BLACK1 if bit else BLACK0
            elif c == BLACK0:
                out[u] = WHITE
            else:
                out[u] = c
        else:
            has_black = BLACK in nbr
            if c == BLACK and has_black:
                bit = coins.fair_bit(seed, coins.STREAM_PROCESS, t, u)
                out[u] = BLACK if bit else GRAY
            elif c == WHITE and not has_black:
                bit = coins.fair_bit(seed, coins.STREAM_PROCESS, t, u)
                out[u] = BLACK if bit else WHITE
            elif c == GRAY and sigma_on is not None and sigma_on[u]:
                out[u] = WHITE
            else:
                out[u] = c
    return np.array(out, dtype=np.uint8)


def reference_switch_step(g, levels, seed, t, zeta, order=None):
    n = g.n
    threshold = coins.threshold_for_probability(zeta)
    out = [None] * n
    if order is None:
        order = range(n)
    for u in order:
        lv = int(levels[u])
        if lv == 5:
            b_is_zero = coins.word(seed, coins.STREAM_SWITCH, t, u) < threshold
            if not b_is_zero:
                out[u] = 5
                continue
        if lv == 0:
            out[u] = 5
            continue
        mx = max([lv] + [int(levels[v]) for v in g.neighbors(u)])
        out[u] = mx - 1
    return np.array(out, dtype=np.uint8)


def reference_is_mis(g, black_set):
    """Set-based independence + maximality check."""
    black = set(int(b) for b in black_set)
    for u in black:
        for v in g.neighbors(u):
            if int(v) in black:
                return False
    for u in range(g.n):
        if u not in black and not any(int(v) in black for v in g.neighbors(u)):
            return False
    return True


def reference_active(g, colors, process):
    """Vertices taking a randomizing branch, re-derived per definition."""
    out = set()
    for u in range(g.n):
        c = int(colors[u])
        nbr = [int(colors[v]) for v in g.neighbors(u)]
        if process is ProcessKind.TWO_STATE:
            has_black = BLACK in nbr
            if (c == BLACK and has_black) or (c == WHITE and not has_black):
                out.add(u)
        elif process is ProcessKind.THREE_STATE:
            has_black1 = BLACK1 in nbr
            has_black = has_black1 or BLACK0 in nbr
            if c == BLACK1 or (c == BLACK0 and not has_black1) or \
                    (c == WHITE and not has_black):
                out.add(u)
        else:
            has_black = BLACK in nbr
            if (c == BLACK and has_black) or (c == WHITE and not has_black):
                out.add(u)
    return out

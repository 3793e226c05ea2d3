"""The three synchronous MIS state machines and derived vertex sets.

Processes:

* two-state: colors {white, black}; a vertex whose color is inconsistent
  with the MIS conditions (black with a black neighbor, or white with no
  black neighbor) redraws its color uniformly each round.
* three-state: colors {white, black1, black0}; black1 always redraws over
  {black1, black0}, black0 does too unless a neighbor is black1 (then it
  turns white), and a white vertex with an all-white neighborhood redraws.
  Both black1 and black0 count as black.
* three-color: the two-state rule where a black vertex with a black
  neighbor retreats to gray instead of white, and gray returns to white
  only when the vertex's on/off switch is on (see the ``switch`` module).

A vertex is *stable* once it is black with no black neighbor, or non-black
with a stable black neighbor; the process is stabilized when every vertex
is stable, equivalently when the black set is a maximal independent set.

All randomness flows through keyed coin words (see ``coins``), so a trial
is a pure function of its arguments and vertex update order never matters.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels_py as _ref
from . import backend, coins
from .graph import Graph

WHITE = _ref.WHITE
BLACK = _ref.BLACK
BLACK1 = _ref.BLACK
BLACK0 = _ref.BLACK0
GRAY = _ref.GRAY

DEFAULT_MAX_ROUNDS = 10**6
DEFAULT_SWITCH_A = 512.0
DEFAULT_SWITCH_ZETA = 1.0 / 128.0

_METRIC_ROW_BUDGET = 65536


class ProcessKind(Enum):
    TWO_STATE = _ref.PROC_TWO_STATE
    THREE_STATE = _ref.PROC_THREE_STATE
    THREE_COLOR = _ref.PROC_THREE_COLOR

    @property
    def token(self) -> str:
        return {0: "two-state", 1: "three-state", 2: "three-color"}[self.value]

    @classmethod
    def from_token(cls, token: str) -> "ProcessKind":
        for kind in cls:
            if kind.token == token:
                return kind
        raise ValueError(f"unknown process {token!r}")

    @property
    def alphabet(self) -> tuple[int, ...]:
        if self is ProcessKind.TWO_STATE:
            return (WHITE, BLACK)
        return (WHITE, BLACK, 2)


INIT_POLICIES = ("all-white", "all-black", "uniform-random", "alternating",
                 "all-gray")


@dataclass(frozen=True)
class VertexSet:
    """Vertex subset as a boolean membership mask plus its cardinality."""

    mask: np.ndarray
    count: int

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "VertexSet":
        mask = np.asarray(mask, dtype=bool)
        mask.setflags(write=False)
        return cls(mask=mask, count=int(mask.sum()))

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __contains__(self, u: int) -> bool:
        return bool(self.mask[u])

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True)
class StateVector:
    """Per-vertex colors of one process at one round."""

    process: ProcessKind
    colors: np.ndarray
    round: int

    def __post_init__(self):
        colors = np.asarray(self.colors, dtype=np.uint8)
        colors.setflags(write=False)
        object.__setattr__(self, "colors", colors)
        hi = {ProcessKind.TWO_STATE: 1}.get(self.process, 2)
        if colors.size and colors.max() > hi:
            raise ValueError("color outside the process alphabet")

    @property
    def n(self) -> int:
        return int(self.colors.size)

    def black_mask(self) -> np.ndarray:
        return _ref.blackness(self.colors, self.process.value)


@dataclass(frozen=True)
class StableSets:
    independent: VertexSet   # stable black vertices (no black neighbor)
    stable_all: VertexSet    # independent plus its dominated neighborhood
    nonstable: VertexSet     # complement of stable_all


def _uniform_codes(seed: int, stream: int, n: int, bound: int) -> np.ndarray:
    """Vectorized exact-uniform draws in {0..bound-1}, one per vertex.

    Rejection attempts advance the ctr slot so accepted draws stay keyed to
    their vertex.
    """
    rem = (1 << 64) % bound
    out = np.zeros(n, dtype=np.uint8)
    pending = np.arange(n, dtype=np.int64)
    attempt = 0
    while pending.size:
        w = coins.words_for_units(seed, stream, attempt, pending)
        ok = np.ones(w.size, dtype=bool) if rem == 0 \
            else w < np.uint64((1 << 64) - rem)
        out[pending[ok]] = (w[ok] % np.uint64(bound)).astype(np.uint8)
        pending = pending[~ok]
        attempt += 1
    return out


def init_states(process: ProcessKind, n: int, policy: str, seed: int) -> StateVector:
    """Round-0 state vector under one of the initialization policies.

    ``all-black`` means black1 for the three-state process;
    ``alternating`` cycles the process alphabet by vertex index;
    ``all-gray`` is only meaningful for the three-color process.
    """
    if policy not in INIT_POLICIES:
        raise ValueError(f"unknown init policy {policy!r}")
    if policy == "all-gray" and process is not ProcessKind.THREE_COLOR:
        raise ValueError("all-gray init requires the three-color process")
    if policy == "all-white":
        colors = np.zeros(n, dtype=np.uint8)
    elif policy == "all-black":
        colors = np.full(n, BLACK, dtype=np.uint8)
    elif policy == "all-gray":
        colors = np.full(n, GRAY, dtype=np.uint8)
    elif policy == "alternating":
        alpha = process.alphabet
        colors = np.array([alpha[i % len(alpha)] for i in range(n)],
                          dtype=np.uint8)
    else:
        colors = _uniform_codes(seed, coins.STREAM_INIT, n,
                                len(process.alphabet))
    return StateVector(process=process, colors=colors, round=0)


def _flags(g: Graph, s: StateVector):
    return _ref.neighbor_flags(g.indptr, g.indices, s.colors, s.process.value)


def active_set(g: Graph, s: StateVector) -> VertexSet:
    """Vertices whose next-round color is randomized by the update rule."""
    black, hbn, hb1n = _flags(g, s)
    return VertexSet.from_mask(
        _ref.active_mask(s.colors, s.process.value, black, hbn, hb1n))


def stable_sets(g: Graph, s: StateVector) -> StableSets:
    black, hbn, _ = _flags(g, s)
    indep = black & ~hbn
    stable_all = _ref._mark_closed_neighborhood(g.indptr, g.indices, indep)
    return StableSets(independent=VertexSet.from_mask(indep),
                      stable_all=VertexSet.from_mask(stable_all),
                      nonstable=VertexSet.from_mask(~stable_all))


def k_active_set(g: Graph, s: StateVector, k: int) -> VertexSet:
    """Active vertices with at most k active neighbors."""
    if k < 0:
        raise ValueError("k must be >= 0")
    black, hbn, hb1n = _flags(g, s)
    active = _ref.active_mask(s.colors, s.process.value, black, hbn, hb1n)
    nact = _seg_count(g, active)
    return VertexSet.from_mask(active & (nact <= k))


def _seg_count(g: Graph, flag: np.ndarray) -> np.ndarray:
    n = g.n
    out = np.zeros(n, dtype=np.int64)
    starts = g.indptr[:-1]
    nz = starts < g.indptr[1:]
    if g.indices.size and nz.any():
        vals = flag[g.indices].astype(np.int64)
        out[nz] = np.add.reduceat(vals, starts[nz])
    return out


def is_stabilized(g: Graph, s: StateVector) -> bool:
    """True iff the black set is independent and dominating."""
    black, hbn, _ = _flags(g, s)
    return _ref.stabilized(black, hbn)


def step(g: Graph, s: StateVector, coin_stream, switch_on=None) -> StateVector:
    """Advance one synchronous round (round index s.round + 1).

    ``switch_on`` supplies the previous-round on/off values and is required
    exactly when the process is three-color.
    """
    seed = coin_stream.master_seed if hasattr(coin_stream, "master_seed") \
        else int(coin_stream)
    if s.process is ProcessKind.THREE_COLOR:
        if switch_on is None:
            raise ValueError("three-color step requires switch_on")
        sig = np.asarray(getattr(switch_on, "mask", switch_on), dtype=np.uint8)
    else:
        if switch_on is not None:
            raise ValueError("switch_on only applies to the three-color process")
        sig = None
    new = backend.step_colors(g.indptr, g.indices, s.colors, s.process.value,
                              seed, s.round + 1, sig)
    return StateVector(process=s.process, colors=new, round=s.round + 1)


# -- trials -------------------------------------------------------------------


@dataclass
class TrialResult:
    """Outcome of one trial, sufficient to reproduce and audit it."""

    process: ProcessKind
    graph_token: str
    n: int
    init_policy: str
    seed: int
    max_rounds: int
    stabilization_round: Optional[int]   # None when the round cap was hit
    capped: bool
    rounds_executed: int
    final: StateVector
    final_levels: Optional[np.ndarray]
    metrics: dict = field(default_factory=dict)
    switch_a: Optional[float] = None
    switch_zeta: Optional[float] = None
    switch_init: Optional[str] = None

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.process.token}|{self.graph_token}|{self.n}|"
                 f"{self.init_policy}|{self.seed}|{self.max_rounds}|"
                 f"{self.stabilization_round}|{self.capped}|"
                 f"{self.rounds_executed}|".encode())
        h.update(self.final.colors.tobytes())
        if self.final_levels is not None:
            h.update(self.final_levels.tobytes())
        for key in sorted(self.metrics):
            h.update(key.encode())
            h.update(np.ascontiguousarray(self.metrics[key]).tobytes())
        return h.hexdigest()


def _auto_record_every(max_rounds: int) -> int:
    if max_rounds <= _METRIC_ROW_BUDGET:
        return 1
    return -(-max_rounds // _METRIC_ROW_BUDGET)


def run_trial(process: ProcessKind, g: Graph, policy: str, master_seed: int,
              max_rounds: int = DEFAULT_MAX_ROUNDS, record_every: int | None = None,
              switch_a: float = DEFAULT_SWITCH_A,
              switch_zeta: float = DEFAULT_SWITCH_ZETA,
              switch_init: str = "all-five",
              graph_token: str = "", debug: bool = False) -> TrialResult:
    """Run one trial from the chosen init until stabilization or the cap.

    Deterministic in all arguments.  ``record_every`` thins per-round metric
    recording (None picks a cadence that bounds recorded rows; 0 disables).
    Hitting the cap is reported, not raised.  In debug mode every round is
    cross-checked vertex-by-vertex against the update-rule branches.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if record_every is None:
        record_every = _auto_record_every(max_rounds)
    s0 = init_states(process, g.n, policy, master_seed)
    levels0 = None
    zeta_threshold = 0
    if process is ProcessKind.THREE_COLOR:
        from . import switch as _switch
        lv = _switch.switch_init(g.n, switch_init, master_seed,
                                 zeta=switch_zeta)
        levels0 = lv.levels
        zeta_threshold = coins.threshold_for_probability(switch_zeta)

    if debug:
        out = _run_trial_debug(g, s0, levels0, zeta_threshold, master_seed,
                               max_rounds, record_every)
    else:
        out = backend.run_trial_kernel(g.indptr, g.indices, s0.colors,
                                       process.value, master_seed, max_rounds,
                                       record_every, levels0, zeta_threshold)

    stab = out["stab_round"]
    final = StateVector(process=process, colors=out["colors"],
                        round=out["rounds"])
    if stab >= 0 and not _ref.stabilized(
            *_ref.neighbor_flags(g.indptr, g.indices, final.colors,
                                 process.value)[:2]):
        raise AssertionError("kernel reported stabilization on a non-MIS")
    return TrialResult(
        process=process, graph_token=graph_token or f"n{g.n}m{g.m}", n=g.n,
        init_policy=policy, seed=master_seed, max_rounds=max_rounds,
        stabilization_round=stab if stab >= 0 else None, capped=stab < 0,
        rounds_executed=out["rounds"], final=final,
        final_levels=out["levels"], metrics=out["rec"],
        switch_a=switch_a if process is ProcessKind.THREE_COLOR else None,
        switch_zeta=switch_zeta if process is ProcessKind.THREE_COLOR else None,
        switch_init=switch_init if process is ProcessKind.THREE_COLOR else None,
    )


def _run_trial_debug(g, s0, levels0, zeta_threshold, seed, max_rounds,
                     record_every):
    """Reference per-round loop with an exhaustive branch audit."""
    ip, ix = g.indptr, g.indices
    proc = s0.process.value
    colors = s0.colors.copy()
    levels = levels0.copy() if levels0 is not None else None
    rec = {k: [] for k in ("round", "blacks", "whites", "grays", "actives",
                           "stable_black", "nonstable")}
    t = 0
    stab_round = -1
    while True:
        black, hbn, hb1n = _ref.neighbor_flags(ip, ix, colors, proc)
        is_stab = _ref.stabilized(black, hbn)
        stopping = is_stab or t >= max_rounds
        if record_every and (stopping or t % record_every == 0):
            active = _ref.active_mask(colors, proc, black, hbn, hb1n)
            indep = black & ~hbn
            covered = _ref._mark_closed_neighborhood(ip, ix, indep)
            rec["round"].append(t)
            rec["blacks"].append(int(black.sum()))
            rec["whites"].append(int((colors == WHITE).sum()))
            rec["grays"].append(int((colors == GRAY).sum())
                                if proc == _ref.PROC_THREE_COLOR else 0)
            rec["actives"].append(int(active.sum()))
            rec["stable_black"].append(int(indep.sum()))
            rec["nonstable"].append(int(g.n - covered.sum()))
        if is_stab:
            stab_round = t
            break
        if t >= max_rounds:
            break
        t += 1
        sig = _ref.sigma_on_mask(levels) if proc == _ref.PROC_THREE_COLOR else None
        new = _ref.step_colors(ip, ix, colors, proc, seed, t, sig)
        _audit_round(g, colors, new, proc, black, hbn, hb1n, sig)
        if proc == _ref.PROC_THREE_COLOR:
            levels = _ref.step_levels(ip, ix, levels, seed, t, zeta_threshold)
        colors = new
    return {"stab_round": stab_round, "rounds": t, "colors": colors,
            "levels": levels,
            "rec": {k: np.asarray(v, dtype=np.int64) for k, v in rec.items()}}


def _audit_round(g, prev, new, proc, black, hbn, hb1n, sig):
    """Assert, per vertex, that the transition took a legal branch."""
    for u in range(g.n):
        c, d = int(prev[u]), int(new[u])
        if proc == _ref.PROC_TWO_STATE:
            if (c == BLACK) == bool(hbn[u]):
                assert d in (WHITE, BLACK)
            else:
                assert d == c, f"frozen vertex {u} changed color"
        elif proc == _ref.PROC_THREE_STATE:
            if c == BLACK1 or (c == BLACK0 and not hb1n[u]) or \
                    (c == WHITE and not hbn[u]):
                assert d in (BLACK1, BLACK0)
            elif c == BLACK0:
                assert d == WHITE, f"black0 vertex {u} kept color beside black1"
            else:
                assert d == c, f"frozen vertex {u} changed color"
        else:
            if c == BLACK and hbn[u]:
                assert d in (BLACK, GRAY)
            elif c == WHITE and not hbn[u]:
                assert d in (BLACK, WHITE)
            elif c == GRAY and sig is not None and sig[u]:
                assert d == WHITE
            else:
                assert d == c, f"frozen vertex {u} changed color"

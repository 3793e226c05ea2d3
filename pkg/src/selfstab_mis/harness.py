"""Experiment orchestration: trial batches, the MIS oracle, and statistics.

``run_experiment`` executes independent trials with per-trial seeds derived
from the master seed through the keyed coin construction, so results are
deterministic regardless of thread count.  Every completed trial's final
black set must pass ``verify_mis`` or the experiment aborts: a "stabilized"
non-MIS indicates an implementation bug, never sampling noise.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import backend, coins, exact
from .dynamics import (DEFAULT_MAX_ROUNDS, DEFAULT_SWITCH_A,
                       DEFAULT_SWITCH_ZETA, ProcessKind, TrialResult,
                       run_trial)
from .graph import Graph, from_descriptor, descriptor_token


class SoundnessError(RuntimeError):
    """A trial reported stabilization but its black set is not an MIS."""


def verify_mis(g: Graph, black) -> bool:
    """Independent + dominating check, structurally separate from the kernels."""
    mask = np.asarray(getattr(black, "mask", black), dtype=bool)
    if mask.size != g.n:
        raise ValueError("black mask size mismatch")
    e = g.edges()
    if e.size:
        if bool((mask[e[:, 0]] & mask[e[:, 1]]).any()):
            return False
        dominated = np.zeros(g.n, dtype=bool)
        dominated[e[:, 0][mask[e[:, 1]]]] = True
        dominated[e[:, 1][mask[e[:, 0]]]] = True
    else:
        dominated = np.zeros(g.n, dtype=bool)
    return bool((mask | dominated).all())


def default_thread_count() -> int:
    env = os.environ.get("MIS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    process: ProcessKind
    graph: object                 # Graph instance or descriptor string
    init_policy: str
    trials: int
    master_seed: int
    max_rounds: int = DEFAULT_MAX_ROUNDS
    record_every: int = 0         # 0: no per-round metrics
    switch_a: float = DEFAULT_SWITCH_A
    switch_zeta: float = DEFAULT_SWITCH_ZETA
    switch_init: str = "all-five"
    threads: Optional[int] = None
    store_trials: bool = False
    graph_label: str = ""

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")
        if not 0.0 < self.switch_zeta < 1.0:
            raise ValueError("switch zeta must lie in (0, 1)")

    def resolve_graph(self) -> tuple[Graph, str]:
        if isinstance(self.graph, Graph):
            label = self.graph_label or f"n{self.graph.n}m{self.graph.m}"
            return self.graph, label
        default_seed = coins.word(self.master_seed, coins.STREAM_GRAPH, 0, 0)
        g = from_descriptor(str(self.graph), default_seed=default_seed)
        return g, descriptor_token(str(self.graph))

    def as_dict(self) -> dict:
        g_desc = self.graph if isinstance(self.graph, str) \
            else (self.graph_label or f"graph(n={self.graph.n},m={self.graph.m})")
        return {
            "process": self.process.token,
            "graph": str(g_desc),
            "init": self.init_policy,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "max_rounds": self.max_rounds,
            "record_every": self.record_every,
            "switch_a": self.switch_a,
            "switch_zeta": self.switch_zeta,
            "switch_init": self.switch_init,
            "trial_seed_scheme":
                "word(master_seed, stream=TRIAL, ctr=trial_index, unit=0)",
            "backend": backend.BACKEND,
        }


@dataclass
class ExperimentResult:
    config: dict
    n: int
    graph_token: str
    trial_seeds: np.ndarray
    stab_rounds: np.ndarray       # -1 where capped
    aggregate: dict
    trials: list = field(default_factory=list)
    wall_clock_seconds: float = 0.0   # informational; never serialized

    @property
    def completed(self) -> np.ndarray:
        return self.stab_rounds[self.stab_rounds >= 0]

    @property
    def capped_count(self) -> int:
        return int((self.stab_rounds < 0).sum())


def _aggregate(stab_rounds: np.ndarray) -> dict:
    done = np.sort(stab_rounds[stab_rounds >= 0])
    out = {
        "trials": int(stab_rounds.size),
        "completed": int(done.size),
        "capped": int(stab_rounds.size - done.size),
    }
    if done.size:
        out.update({
            "mean": float(done.mean()),
            "median": float(np.median(done)),
            "max": int(done.max()),
            "p90": float(np.quantile(done, 0.9)),
            "p99": float(np.quantile(done, 0.99)),
        })
    else:
        out.update({"mean": None, "median": None, "max": None,
                    "p90": None, "p99": None})
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute cfg.trials independent trials; deterministic in the config."""
    cfg.validate()
    g, token = cfg.resolve_graph()
    seeds = np.array([coins.derive_trial_seed(cfg.master_seed, i)
                      for i in range(cfg.trials)], dtype=np.uint64)
    stab = np.empty(cfg.trials, dtype=np.int64)
    stored: list[Optional[TrialResult]] = [None] * cfg.trials

    def one(i: int) -> None:
        tr = run_trial(cfg.process, g, cfg.init_policy, int(seeds[i]),
                       max_rounds=cfg.max_rounds,
                       record_every=cfg.record_every,
                       switch_a=cfg.switch_a, switch_zeta=cfg.switch_zeta,
                       switch_init=cfg.switch_init, graph_token=token)
        if not tr.capped and not verify_mis(g, tr.final.black_mask()):
            raise SoundnessError(
                f"trial {i} (seed {seeds[i]}) stabilized on a non-MIS")
        stab[i] = -1 if tr.capped else tr.stabilization_round
        if cfg.store_trials or cfg.record_every:
            stored[i] = tr

    t0 = time.perf_counter()
    threads = cfg.threads if cfg.threads is not None else default_thread_count()
    if threads > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(cfg.trials)))
    else:
        for i in range(cfg.trials):
            one(i)
    wall = time.perf_counter() - t0

    return ExperimentResult(
        config=cfg.as_dict(), n=g.n, graph_token=token, trial_seeds=seeds,
        stab_rounds=stab, aggregate=_aggregate(stab),
        trials=[t for t in stored if t is not None],
        wall_clock_seconds=wall)


# -- stabilization-time tail ----------------------------------------------------


@dataclass
class TailTable:
    unit: float
    trials: int
    rows: list          # (k, count, phat, se)
    ratios: list        # (k, rho, se) only where the denominator is well fed

    def as_dict(self) -> dict:
        return {
            "unit": self.unit,
            "trials": self.trials,
            "rows": [{"k": k, "count": c, "phat": p, "se": s}
                     for k, c, p, s in self.rows],
            "ratios": [{"k": k, "rho": r, "se": s}
                       for k, r, s in self.ratios],
        }


def tail_decay(times: Sequence[int], unit: float,
               min_count: int = 50) -> TailTable:
    """Empirical P[T >= k*unit] for k = 1.. and successive ratios.

    Ratios rho_k = P[k+1]/P[k] are conditional binomials estimated from the
    trials surviving level k; they are reported only where that count is at
    least ``min_count``.
    """
    if unit <= 0:
        raise ValueError("unit must be positive")
    t = np.asarray(times, dtype=np.int64)
    n = int(t.size)
    if n == 0:
        return TailTable(unit=unit, trials=0, rows=[], ratios=[])
    kmax = int(t.max() // unit) + 1
    rows = []
    counts = []
    for k in range(1, kmax + 1):
        c = int((t >= k * unit).sum())
        phat = c / n
        se = math.sqrt(phat * (1.0 - phat) / n)
        rows.append((k, c, phat, se))
        counts.append(c)
    ratios = []
    for k in range(1, kmax):
        c_k, c_k1 = counts[k - 1], counts[k]
        if c_k >= min_count:
            rho = c_k1 / c_k
            se = math.sqrt(max(rho * (1.0 - rho), 0.0) / c_k)
            ratios.append((k, rho, se))
    return TailTable(unit=unit, trials=n, rows=rows, ratios=ratios)


# -- probability lower-bound checks on stars -------------------------------------


@dataclass
class BoundCheck:
    estimate: float
    bound: float
    se: float
    trials: int
    exact_value: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.estimate >= self.bound - 3.0 * self.se


def _star_graph(k: int) -> Graph:
    return Graph(k + 1, [(0, i) for i in range(1, k + 1)])


def lemma6_check(k: int, trials: int, seed: int) -> BoundCheck:
    """All-white star with k leaves: after ceil(log2(k+1)) rounds the center
    is stable black with probability at least 1/(2ek)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = _star_graph(k)
    r = math.ceil(math.log2(k + 1))
    hits = 0
    for i in range(trials):
        s = coins.derive_trial_seed(seed, i)
        out = backend.run_trial_kernel(g.indptr, g.indices,
                                       np.zeros(g.n, dtype=np.uint8),
                                       ProcessKind.TWO_STATE.value, s, r, 0)
        colors = out["colors"]
        if colors[0] == 1 and not (colors[1:] == 1).any():
            hits += 1
    phat = hits / trials
    se = math.sqrt(phat * (1.0 - phat) / trials)
    bound = 1.0 / (2.0 * math.e * k)
    ex = float(exact.star_center_stable_probability(k, r))
    return BoundCheck(estimate=phat, bound=bound, se=se, trials=trials,
                      exact_value=ex)


def lemma7_check(ks: Sequence[int], trials: int, seed: int) -> BoundCheck:
    """Disjoint all-white stars: some center is stable black after
    ceil(log2(max k + 1)) rounds with probability at least
    (1/5) min(1, sum 1/(2 k_i))."""
    ks = list(ks)
    if not ks or any(k < 1 for k in ks):
        raise ValueError("each k must be >= 1")
    edges = []
    centers = []
    base = 0
    for k in ks:
        centers.append(base)
        edges += [(base, base + i) for i in range(1, k + 1)]
        base += k + 1
    g = Graph(base, edges)
    r = math.ceil(math.log2(max(ks) + 1))
    hits = 0
    for i in range(trials):
        s = coins.derive_trial_seed(seed, i)
        out = backend.run_trial_kernel(g.indptr, g.indices,
                                       np.zeros(g.n, dtype=np.uint8),
                                       ProcessKind.TWO_STATE.value, s, r, 0)
        colors = out["colors"]
        black = colors == 1
        for j, c in enumerate(centers):
            k = ks[j]
            if black[c] and not black[c + 1:c + 1 + k].any():
                hits += 1
                break
    phat = hits / trials
    se = math.sqrt(phat * (1.0 - phat) / trials)
    bound = 0.2 * min(1.0, sum(1.0 / (2.0 * k) for k in ks))
    ex = float(exact.any_star_center_stable_probability(ks, r))
    return BoundCheck(estimate=phat, bound=bound, se=se, trials=trials,
                      exact_value=ex)

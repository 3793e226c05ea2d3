"""Randomized on/off switch built from a 6-level per-vertex clock.

Each vertex holds a level in {0..5}.  A vertex at level 5 stays there until
a biased bit fires (probability ``zeta`` per round); a vertex at level 0
jumps back to 5; every other vertex moves to (max level over its closed
neighborhood) - 1.  The vertex's switch value is **on** iff its level is at
most 2, so off-runs last about (1/zeta)·ln n rounds while on-runs are short.

Defaults are a = 512 and zeta = 4/a = 2**-7; the audit checks the three
run-length properties the 3-color process relies on:

  S1: no off-run longer than a·ln n;
  S2: (diameter <= 2 only) after a per-vertex burn-in, no complete off-run
      shorter than (a/6)·ln n;
  S3: (diameter <= 2 only) from round 7 on, no on-run longer than b.

Thresholds are compared as exact reals against integer run lengths; runs
truncated by the end of the recorded history never count against the
minimum-length property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import backend, coins
from .graph import Graph

DEFAULT_A = 512.0
DEFAULT_ZETA = 1.0 / 128.0
DEFAULT_B = 3

SWITCH_INIT_POLICIES = ("all-five", "uniform-random")


@dataclass(frozen=True)
class LevelVector:
    levels: np.ndarray
    round: int
    zeta: float

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.uint8)
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        if levels.size and levels.max() > 5:
            raise ValueError("levels must lie in {0..5}")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError("zeta must lie in (0, 1)")

    @property
    def n(self) -> int:
        return int(self.levels.size)


@dataclass(frozen=True)
class OnOffVector:
    """Per-vertex on/off values; ``mask`` is True where the switch is on."""

    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)


def check_parameters(a: float, zeta: float) -> Optional[str]:
    """Return a warning when a·zeta deviates from the calibrated product 4."""
    if abs(a * zeta - 4.0) > 1e-9:
        return (f"switch parameters a={a} zeta={zeta} break a*zeta=4; "
                "run-length guarantees are calibrated for that product")
    return None


def switch_init(n: int, policy: str, seed: int,
                zeta: float = DEFAULT_ZETA) -> LevelVector:
    if policy not in SWITCH_INIT_POLICIES:
        raise ValueError(f"unknown switch init policy {policy!r}")
    if policy == "all-five":
        levels = np.full(n, 5, dtype=np.uint8)
    else:
        levels = _uniform_levels(seed, n)
    return LevelVector(levels=levels, round=0, zeta=zeta)


def _uniform_levels(seed: int, n: int) -> np.ndarray:
    limit = np.uint64((1 << 64) - ((1 << 64) % 6))  # 6 never divides 2**64
    out = np.zeros(n, dtype=np.uint8)
    pending = np.arange(n, dtype=np.int64)
    attempt = 0
    while pending.size:
        w = coins.words_for_units(seed, coins.STREAM_SWITCH_INIT, attempt,
                                  pending)
        ok = w < limit
        out[pending[ok]] = (w[ok] % np.uint64(6)).astype(np.uint8)
        pending = pending[~ok]
        attempt += 1
    return out


def switch_step(g: Graph, lv: LevelVector, coin_stream) -> LevelVector:
    """Advance the switch one round (bias bits keyed to round lv.round+1)."""
    seed = coin_stream.master_seed if hasattr(coin_stream, "master_seed") \
        else int(coin_stream)
    threshold = coins.threshold_for_probability(lv.zeta)
    new = backend.step_levels(g.indptr, g.indices, lv.levels, seed,
                              lv.round + 1, threshold)
    return LevelVector(levels=new, round=lv.round + 1, zeta=lv.zeta)


def sigma(lv: LevelVector) -> OnOffVector:
    """On/off mapping: levels 0-2 are on, levels 3-5 are off."""
    return OnOffVector(mask=lv.levels <= 2)


# -- run-length audit ---------------------------------------------------------


@dataclass
class RunRecord:
    vertex: int
    start: int
    length: int
    value: str  # "on" or "off"

    def as_dict(self):
        return {"vertex": self.vertex, "start": self.start,
                "length": self.length, "value": self.value}


@dataclass
class SwitchAudit:
    n: int
    rounds: int                   # history covers rounds 0..rounds
    a: float
    b: int
    diam_le_2: bool
    burn_in: np.ndarray           # per-vertex S2 burn-in round, -1 if none
    violations: dict = field(default_factory=dict)
    runs_per_vertex: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "rounds": self.rounds,
            "a": self.a,
            "b": self.b,
            "diam_le_2": self.diam_le_2,
            "passed": self.passed,
            "violations": {k: [r.as_dict() for r in v]
                           for k, v in sorted(self.violations.items())},
        }


def _runs(values: np.ndarray) -> list[tuple[int, int, bool]]:
    """Maximal constant runs of a boolean sequence as (start, length, value)."""
    out = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] != values[start]:
            out.append((start, i - start, bool(values[start])))
            start = i
    return out


def run_length_audit(history: Sequence, a: float, b: int, diam_le_2: bool,
                     n: int) -> SwitchAudit:
    """Audit an on/off history for the S1-S3 run-length properties.

    ``history`` is a sequence of per-round on/off vectors (OnOffVector or
    boolean arrays) for rounds 0..T.
    """
    on = np.stack([np.asarray(getattr(h, "mask", h), dtype=bool)
                   for h in history])
    rounds = on.shape[0] - 1
    if on.shape[1] != n:
        raise ValueError("history width does not match n")
    s1_limit = a * math.log(n) if n > 1 else 0.0
    s2_min = (a / 6.0) * math.log(n) if n > 1 else 0.0
    viol = {"S1": [], "S2": [], "S3": []}
    burn_in = np.full(n, -1, dtype=np.int64)
    runs_per_vertex = []

    for u in range(n):
        seq = on[:, u]
        runs = _runs(seq)
        runs_per_vertex.append(
            [RunRecord(u, s, l, "on" if v else "off") for s, l, v in runs])
        for s, l, v in runs:
            if not v and l > s1_limit:
                viol["S1"].append(RunRecord(u, s, l, "off"))
        if diam_le_2:
            on_rounds = np.flatnonzero(seq)
            qualifying = on_rounds[on_rounds >= s2_min]
            if qualifying.size:
                t_u = int(qualifying[0])
                burn_in[u] = t_u
                for s, l, v in runs:
                    if v or s < t_u:
                        continue
                    if s + l - 1 >= rounds:
                        continue  # truncated by end of history
                    if l < s2_min:
                        viol["S2"].append(RunRecord(u, s, l, "off"))
            if rounds >= 7:
                for s, l, v in _runs(seq[7:]):
                    if v and l > b:
                        viol["S3"].append(RunRecord(u, s + 7, l, "on"))

    return SwitchAudit(n=n, rounds=rounds, a=a, b=b, diam_le_2=diam_le_2,
                       burn_in=burn_in, violations=viol,
                       runs_per_vertex=runs_per_vertex)


def run_switch_history(g: Graph, rounds: int, seed: int,
                       policy: str = "uniform-random",
                       zeta: float = DEFAULT_ZETA) -> list[OnOffVector]:
    """Run the switch alone for the given rounds, returning the on/off history."""
    lv = switch_init(g.n, policy, seed, zeta=zeta)
    hist = [sigma(lv)]
    for _ in range(rounds):
        lv = switch_step(g, lv, seed)
        hist.append(sigma(lv))
    return hist

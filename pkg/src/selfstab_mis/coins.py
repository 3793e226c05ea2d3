"""Deterministic counter-mode randomness.

Every random decision in this package is a pure function of a 64-bit seed
and a small address ``(stream, ctr, unit)``:

    word(seed, stream, ctr, unit) -> uniform 64-bit value

``stream`` separates purposes (process coins, switch bias bits, state
initialization, per-trial seed derivation, graph generation, subset
sampling), ``ctr`` is usually a round or draw counter, and ``unit`` is
usually a vertex index.  Identical addresses always yield identical words,
regardless of evaluation order, thread, or how many other draws happened in
between.  That is what makes trials reproducible byte-for-byte and lets the
per-round update run in any vertex order.

The word function is three rounds of the splitmix64 finalizer, folding in
one address component per round.  The compiled kernels re-implement the
same function in C; cross-backend equality is enforced by tests.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Stream ids.  Fixed protocol: changing these changes every trajectory.
STREAM_PROCESS = 0      # per-round per-vertex color coins
STREAM_SWITCH = 1       # per-round per-vertex switch bias bits
STREAM_INIT = 2         # state-vector initialization draws
STREAM_SWITCH_INIT = 3  # switch-level initialization draws
STREAM_TRIAL = 4        # per-trial seed derivation (ctr = trial index)
STREAM_GNP = 5          # G(n,p) edge-skip draws (ctr = draw index)
STREAM_TREE = 6         # random-tree sequence draws (ctr = position)
STREAM_SAMPLE = 7       # subset sampling in the property verifier
STREAM_GRAPH = 8        # default graph seed derived from a master seed

_C_STREAM = 0x9E3779B97F4A7C15
_C_CTR = 0xD1B54A32D192ED03
_C_UNIT = 0x8CB92BA72F3D8DD7


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def word(seed: int, stream: int, ctr: int, unit: int) -> int:
    """Uniform 64-bit word for one address. Pure function."""
    z = mix64((int(seed) & MASK64) ^ ((_C_STREAM * (int(stream) + 1)) & MASK64))
    z = mix64(z ^ ((_C_CTR * (int(ctr) + 1)) & MASK64))
    return mix64(z ^ ((_C_UNIT * (int(unit) + 1)) & MASK64))


def fair_bit(seed: int, stream: int, ctr: int, unit: int) -> int:
    """Fair coin in {0, 1} (top bit of the word)."""
    return word(seed, stream, ctr, unit) >> 63


def unit_float(w: int) -> float:
    """Map a word to a float in the open interval (0, 1).

    52 bits keep the endpoints representable: the largest value is
    1 - 2**-53 exactly, never rounded up to 1.0.
    """
    return ((w >> 12) + 0.5) * 2.0**-52


def threshold_for_probability(p: float) -> int:
    """64-bit threshold t such that P[word < t] = p up to 2**-64."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    return min(int(round(p * 2.0**64)), MASK64)


def uniform_below(seed: int, stream: int, ctr: int, bound: int) -> int:
    """Exact uniform draw from {0, ..., bound-1} by rejection.

    Rejection attempts walk the ``unit`` slot of the address, so the draw
    for a given (stream, ctr) never perturbs any other address.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    limit = (1 << 64) - ((1 << 64) % bound)
    attempt = 0
    while True:
        w = word(seed, stream, ctr, attempt)
        if w < limit:
            return w % bound
        attempt += 1


_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _M1
    z = (z ^ (z >> _U27)) * _M2
    return z ^ (z >> _U31)


def words_for_units(seed: int, stream: int, ctr: int, units: np.ndarray) -> np.ndarray:
    """Vectorized ``word`` over an array of unit indices (uint64 result)."""
    base = mix64((seed & MASK64) ^ ((_C_STREAM * (stream + 1)) & MASK64))
    base = mix64(base ^ ((_C_CTR * (ctr + 1)) & MASK64))
    u = units.astype(np.uint64, copy=False)
    folded = np.uint64(base) ^ ((u + np.uint64(1)) * np.uint64(_C_UNIT))
    return _mix64_np(folded)


def fair_bits_for_units(seed: int, stream: int, ctr: int, units: np.ndarray) -> np.ndarray:
    return (words_for_units(seed, stream, ctr, units) >> np.uint64(63)).astype(np.uint8)


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial seed, keyed the same way as every other stream."""
    return word(master_seed, STREAM_TRIAL, trial_index, 0)


class CoinStream:
    """Convenience handle bundling a master seed with the word function."""

    __slots__ = ("master_seed",)

    def __init__(self, master_seed: int):
        self.master_seed = master_seed & MASK64

    def word(self, stream: int, ctr: int, unit: int) -> int:
        return word(self.master_seed, stream, ctr, unit)

    def fair_bit(self, stream: int, ctr: int, unit: int) -> int:
        return fair_bit(self.master_seed, stream, ctr, unit)

    def words(self, stream: int, ctr: int, units: np.ndarray) -> np.ndarray:
        return words_for_units(self.master_seed, stream, ctr, units)

    def __repr__(self):
        return f"CoinStream(0x{self.master_seed:016x})"

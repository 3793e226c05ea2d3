"""Pure-Python (numpy) simulation kernels.

This module is the reference semantics for the per-round updates.  The
compiled extension ``_kernels`` implements the same functions with identical
results; the backend selector picks whichever is available.  Everything here
reads only the previous-round state plus keyed coin words, so vertex update
order is immaterial.

Color encodings (uint8):
  two-state:   0 = white, 1 = black
  three-state: 0 = white, 1 = black1, 2 = black0   (both 1 and 2 are "black")
  three-color: 0 = white, 1 = black, 2 = gray
Switch levels are uint8 values in {0..5}; the on/off value is on iff
level <= 2.
"""

from __future__ import annotations

import numpy as np

from . import coins

BACKEND_NAME = "python"

PROC_TWO_STATE = 0
PROC_THREE_STATE = 1
PROC_THREE_COLOR = 2

WHITE = 0
BLACK = 1      # also black1 in the three-state process
BLACK0 = 2     # three-state only
GRAY = 2       # three-color only


# -- segment reductions over CSR rows ---------------------------------------


def _seg_any(indptr: np.ndarray, indices: np.ndarray, flag: np.ndarray) -> np.ndarray:
    """Per-vertex 'some neighbor has flag set' (empty rows give False)."""
    n = indptr.size - 1
    out = np.zeros(n, dtype=bool)
    starts = indptr[:-1]
    nz = starts < indptr[1:]
    if indices.size and nz.any():
        vals = flag[indices].astype(np.uint8)
        out[nz] = np.maximum.reduceat(vals, starts[nz]) > 0
    return out


def _seg_max(indptr: np.ndarray, indices: np.ndarray, vals_per_vertex: np.ndarray,
             fill: int) -> np.ndarray:
    """Per-vertex max of neighbor values (empty rows give ``fill``)."""
    n = indptr.size - 1
    out = np.full(n, fill, dtype=np.int16)
    starts = indptr[:-1]
    nz = starts < indptr[1:]
    if indices.size and nz.any():
        vals = vals_per_vertex[indices]
        out[nz] = np.maximum.reduceat(vals, starts[nz]).astype(np.int16)
    return out


def _mark_closed_neighborhood(indptr, indices, members: np.ndarray) -> np.ndarray:
    """Boolean mask of N+(S) for the boolean member mask S."""
    return members | _seg_any(indptr, indices, members)


# -- blackness / flags -------------------------------------------------------


def blackness(colors: np.ndarray, process_id: int) -> np.ndarray:
    if process_id == PROC_THREE_STATE:
        return colors != WHITE
    return colors == BLACK


def neighbor_flags(indptr, indices, colors, process_id):
    """(black, has_black_nbr, has_black1_nbr-or-None) for the given colors."""
    black = blackness(colors, process_id)
    hbn = _seg_any(indptr, indices, black)
    hb1n = None
    if process_id == PROC_THREE_STATE:
        hb1n = _seg_any(indptr, indices, colors == BLACK)
    return black, hbn, hb1n


def active_mask(colors, process_id, black, hbn, hb1n):
    """Vertices whose next-round color is randomized by the update rule."""
    if process_id == PROC_TWO_STATE:
        return black == hbn
    if process_id == PROC_THREE_STATE:
        return (colors == BLACK) | ((colors == BLACK0) & ~hb1n) | \
               ((colors == WHITE) & ~hbn)
    return (black & hbn) | ((colors == WHITE) & ~hbn)


def stabilized(black: np.ndarray, hbn: np.ndarray) -> bool:
    """True iff the black set is independent and dominating."""
    return bool((black != hbn).all())


# -- single-round updates ----------------------------------------------------


def _next_colors(colors, process_id, black, hbn, hb1n, bits, sigma_on):
    if process_id == PROC_TWO_STATE:
        active = black == hbn
        drawn = np.where(bits == 1, np.uint8(BLACK), np.uint8(WHITE))
        return np.where(active, drawn, colors).astype(np.uint8)
    if process_id == PROC_THREE_STATE:
        randomize = (colors == BLACK) | ((colors == BLACK0) & ~hb1n) | \
                    ((colors == WHITE) & ~hbn)
        to_white = (colors == BLACK0) & hb1n
        drawn = np.where(bits == 1, np.uint8(BLACK), np.uint8(BLACK0))
        out = np.where(to_white, np.uint8(WHITE), colors)
        return np.where(randomize, drawn, out).astype(np.uint8)
    black_branch = black & hbn
    white_branch = (colors == WHITE) & ~hbn
    gray_fires = (colors == GRAY) & sigma_on
    drawn_b = np.where(bits == 1, np.uint8(BLACK), np.uint8(GRAY))
    drawn_w = np.where(bits == 1, np.uint8(BLACK), np.uint8(WHITE))
    out = np.where(gray_fires, np.uint8(WHITE), colors)
    out = np.where(white_branch, drawn_w, out)
    return np.where(black_branch, drawn_b, out).astype(np.uint8)


def step_colors(indptr, indices, colors, process_id, seed, t, sigma_on=None):
    """Colors at round t from colors at round t-1 (coin ctr = t)."""
    n = colors.size
    units = np.arange(n, dtype=np.uint64)
    bits = coins.fair_bits_for_units(seed, coins.STREAM_PROCESS, t, units)
    black, hbn, hb1n = neighbor_flags(indptr, indices, colors, process_id)
    return _next_colors(colors, process_id, black, hbn, hb1n, bits, sigma_on)


def step_levels(indptr, indices, levels, seed, t, zeta_threshold):
    """Switch levels at round t from levels at round t-1 (bias ctr = t)."""
    n = levels.size
    units = np.arange(n, dtype=np.uint64)
    words = coins.words_for_units(seed, coins.STREAM_SWITCH, t, units)
    b0 = words < np.uint64(zeta_threshold)
    lv = levels.astype(np.int16)
    mx = np.maximum(lv, _seg_max(indptr, indices, levels, fill=0))
    to5 = ((levels == 5) & ~b0) | (levels == 0)
    return np.where(to5, np.int16(5), mx - 1).astype(np.uint8)


def sigma_on_mask(levels: np.ndarray) -> np.ndarray:
    """On/off value of the switch: on iff level <= 2."""
    return levels <= 2


# -- full trial loop ----------------------------------------------------------


def run_trial_kernel(indptr, indices, colors0, process_id, seed, max_rounds,
                     record_every, levels0=None, zeta_threshold=0):
    """Run one trial to stabilization or the round cap.

    Returns a dict with the stabilization round (-1 when capped), the number
    of executed rounds, final colors (and switch levels for the three-color
    process), and thinned per-round metric arrays.  Metrics are recorded at
    rounds divisible by ``record_every`` plus the final round; pass
    ``record_every = 0`` to disable recording.
    """
    n = colors0.size
    colors = colors0.copy()
    levels = levels0.copy() if levels0 is not None else None
    units = np.arange(n, dtype=np.uint64)

    rec = {k: [] for k in ("round", "blacks", "whites", "grays", "actives",
                           "stable_black", "nonstable")}
    t = 0
    stab_round = -1
    while True:
        black, hbn, hb1n = neighbor_flags(indptr, indices, colors, process_id)
        is_stab = stabilized(black, hbn)
        stopping = is_stab or t >= max_rounds
        if record_every and (stopping or t % record_every == 0):
            active = active_mask(colors, process_id, black, hbn, hb1n)
            indep = black & ~hbn
            covered = _mark_closed_neighborhood(indptr, indices, indep)
            rec["round"].append(t)
            rec["blacks"].append(int(black.sum()))
            rec["whites"].append(int((colors == WHITE).sum()))
            rec["grays"].append(int((colors == GRAY).sum())
                                if process_id == PROC_THREE_COLOR else 0)
            rec["actives"].append(int(active.sum()))
            rec["stable_black"].append(int(indep.sum()))
            rec["nonstable"].append(int(n - covered.sum()))
        if is_stab:
            stab_round = t
            break
        if t >= max_rounds:
            break
        t += 1
        bits = coins.fair_bits_for_units(seed, coins.STREAM_PROCESS, t, units)
        if process_id == PROC_THREE_COLOR:
            sig = sigma_on_mask(levels)
            new_colors = _next_colors(colors, process_id, black, hbn, hb1n,
                                      bits, sig)
            levels = step_levels(indptr, indices, levels, seed, t,
                                 zeta_threshold)
            colors = new_colors
        else:
            colors = _next_colors(colors, process_id, black, hbn, hb1n,
                                  bits, None)

    return {
        "stab_round": stab_round,
        "rounds": t,
        "colors": colors,
        "levels": levels,
        "rec": {k: np.asarray(v, dtype=np.int64) for k, v in rec.items()},
    }

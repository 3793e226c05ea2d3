# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernels.

Same contract and bit-identical results as ``_kernels_py``; see that module
for the reference semantics.  The full-trial loop runs without the GIL so
trial batches parallelize across threads.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t
from libc.string cimport memset

cnp.import_array()

BACKEND_NAME = "compiled"

PROC_TWO_STATE = 0
PROC_THREE_STATE = 1
PROC_THREE_COLOR = 2

WHITE = 0
BLACK = 1
BLACK0 = 2
GRAY = 2

cdef enum:
    _TWO = 0
    _TSTATE = 1
    _TCOLOR = 2
    _W = 0
    _B = 1
    _B0 = 2
    _G = 2

cdef uint64_t _C_STREAM = <uint64_t> 0x9E3779B97F4A7C15
cdef uint64_t _C_CTR = <uint64_t> 0xD1B54A32D192ED03
cdef uint64_t _C_UNIT = <uint64_t> 0x8CB92BA72F3D8DD7
cdef uint64_t _M1 = <uint64_t> 0xBF58476D1CE4E5B9
cdef uint64_t _M2 = <uint64_t> 0x94D049BB133111EB

cdef uint64_t STREAM_PROCESS = 0
cdef uint64_t STREAM_SWITCH = 1


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * _M1
    z = (z ^ (z >> 27)) * _M2
    return z ^ (z >> 31)


cdef inline uint64_t _coin(uint64_t seed, uint64_t stream, uint64_t ctr,
                           uint64_t unit) nogil:
    cdef uint64_t z = _mix64(seed ^ (_C_STREAM * (stream + 1)))
    z = _mix64(z ^ (_C_CTR * (ctr + 1)))
    return _mix64(z ^ (_C_UNIT * (unit + 1)))


def coin_word(seed, stream, ctr, unit):
    """C coin word, exported for cross-backend parity tests."""
    return _coin(<uint64_t> seed, <uint64_t> stream, <uint64_t> ctr,
                 <uint64_t> unit)


cdef void _has_flag(const int64_t* ip, const int32_t* ix, Py_ssize_t n,
                    const uint8_t* flag, uint8_t* out, int32_t* scratch) nogil:
    """out[u] = 1 iff some neighbor of u is flagged.

    Strategy is adaptive: scatter from flagged vertices when few are
    flagged, early-exit gather otherwise; exact either way.
    """
    cdef Py_ssize_t u, i, cnt = 0
    cdef int64_t e, scatter_cost = 0, gather_est
    cdef int64_t m2 = ip[n]
    cdef int32_t v
    for u in range(n):
        if flag[u]:
            scratch[cnt] = <int32_t> u
            cnt += 1
            scatter_cost += ip[u + 1] - ip[u]
    if cnt == 0:
        memset(out, 0, n)
        return
    if cnt == n:
        for u in range(n):
            out[u] = 1 if ip[u + 1] > ip[u] else 0
        return
    gather_est = n * (2 * n / cnt + 1)
    if gather_est > m2:
        gather_est = m2
    if scatter_cost <= gather_est:
        memset(out, 0, n)
        for i in range(cnt):
            v = scratch[i]
            for e in range(ip[v], ip[v + 1]):
                out[ix[e]] = 1
    else:
        for u in range(n):
            out[u] = 0
            for e in range(ip[u], ip[u + 1]):
                if flag[ix[e]]:
                    out[u] = 1
                    break


cdef void _fill_black(const uint8_t* colors, Py_ssize_t n, int proc,
                      uint8_t* blk, uint8_t* b1) nogil:
    cdef Py_ssize_t u
    if proc == _TSTATE:
        for u in range(n):
            blk[u] = 1 if colors[u] != _W else 0
            b1[u] = 1 if colors[u] == _B else 0
    else:
        for u in range(n):
            blk[u] = 1 if colors[u] == _B else 0


cdef void _color_step(const uint8_t* colors, Py_ssize_t n, int proc,
                      uint64_t seed, int64_t t, const uint8_t* hbn,
                      const uint8_t* hb1n, const uint8_t* sig,
                      uint8_t* out) nogil:
    cdef Py_ssize_t u
    cdef uint8_t c
    cdef uint64_t bit
    for u in range(n):
        c = colors[u]
        if proc == _TWO:
            if (c == _B) == (hbn[u] != 0):
                bit = _coin(seed, STREAM_PROCESS, t, u) >> 63
                out[u] = _B if bit else _W
            else:
                out[u] = c
        elif proc == _TSTATE:
            if c == _B or (c == _B0 and not hb1n[u]) or (c == _W and not hbn[u]):
                bit = _coin(seed, STREAM_PROCESS, t, u) >> 63
                out[u] = _B if bit else _B0
            elif c == _B0:
                out[u] = _W
            else:
                out[u] = c
        else:
            if c == _B and hbn[u]:
                bit = _coin(seed, STREAM_PROCESS, t, u) >> 63
                out[u] = _B if bit else _G
            elif c == _W and not hbn[u]:
                bit = _coin(seed, STREAM_PROCESS, t, u) >> 63
                out[u] = _B if bit else _W
            elif c == _G and sig[u]:
                out[u] = _W
            else:
                out[u] = c


cdef void _level_step_counts(const int64_t* ip, const int32_t* ix,
                             Py_ssize_t n, const uint8_t* levels,
                             int32_t* lvlcnt, uint64_t seed, int64_t t,
                             uint64_t zth, uint8_t* out) nogil:
    """One switch round driven by per-vertex neighbor-level counters."""
    cdef Py_ssize_t u
    cdef int64_t e, base
    cdef int L, mx
    cdef uint8_t lu
    cdef uint64_t w
    for u in range(n):
        lu = levels[u]
        if lu == 5:
            w = _coin(seed, STREAM_SWITCH, t, u)
            if w >= zth:
                out[u] = 5
                continue
        elif lu == 0:
            out[u] = 5
            continue
        mx = lu
        base = <int64_t> u * 6
        for L in range(5, <int> lu, -1):
            if lvlcnt[base + L] > 0:
                mx = L
                break
        out[u] = <uint8_t> (mx - 1)
    for u in range(n):
        if out[u] != levels[u]:
            for e in range(ip[u], ip[u + 1]):
                base = <int64_t> ix[e] * 6
                lvlcnt[base + levels[u]] -= 1
                lvlcnt[base + out[u]] += 1


cdef inline const int32_t* _ixptr(const int32_t[::1] ix) nogil:
    return &ix[0] if ix.shape[0] > 0 else NULL


def step_colors(indptr, indices, colors, process_id, seed, t, sigma_on=None):
    """Colors at round t from colors at round t-1 (coin ctr = t)."""
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const uint8_t[::1] col = np.ascontiguousarray(colors, dtype=np.uint8)
    cdef Py_ssize_t n = col.shape[0]
    out_arr = np.empty(n, dtype=np.uint8)
    blk_arr = np.empty(n, dtype=np.uint8)
    b1_arr = np.empty(n, dtype=np.uint8)
    hbn_arr = np.empty(n, dtype=np.uint8)
    hb1n_arr = np.zeros(n, dtype=np.uint8)
    scratch_arr = np.empty(n, dtype=np.int32)
    if sigma_on is not None:
        sig_arr = np.ascontiguousarray(sigma_on, dtype=np.uint8)
    else:
        sig_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint8_t[::1] blk = blk_arr
    cdef uint8_t[::1] b1 = b1_arr
    cdef uint8_t[::1] hbn = hbn_arr
    cdef uint8_t[::1] hb1n = hb1n_arr
    cdef const uint8_t[::1] sig = sig_arr
    cdef int32_t[::1] scratch = scratch_arr
    cdef int proc = process_id
    cdef uint64_t s = <uint64_t> seed
    cdef int64_t tt = t
    with nogil:
        _fill_black(&col[0], n, proc, &blk[0], &b1[0])
        _has_flag(&ip[0], _ixptr(ix), n, &blk[0], &hbn[0], &scratch[0])
        if proc == _TSTATE:
            _has_flag(&ip[0], _ixptr(ix), n, &b1[0], &hb1n[0], &scratch[0])
        _color_step(&col[0], n, proc, s, tt, &hbn[0], &hb1n[0], &sig[0],
                    &out[0])
    return out_arr


def step_levels(indptr, indices, levels, seed, t, zeta_threshold):
    """Switch levels at round t from levels at round t-1 (bias ctr = t)."""
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const uint8_t[::1] lv = np.ascontiguousarray(levels, dtype=np.uint8)
    cdef Py_ssize_t n = lv.shape[0]
    out_arr = np.empty(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint64_t s = <uint64_t> seed
    cdef uint64_t zth = <uint64_t> zeta_threshold
    cdef int64_t tt = t
    cdef Py_ssize_t u
    cdef int64_t e
    cdef int mx
    cdef uint8_t lu
    cdef uint64_t w
    with nogil:
        for u in range(n):
            lu = lv[u]
            if lu == 5:
                w = _coin(s, STREAM_SWITCH, tt, u)
                if w >= zth:
                    out[u] = 5
                    continue
            elif lu == 0:
                out[u] = 5
                continue
            mx = lu
            for e in range(ip[u], ip[u + 1]):
                if lv[ix[e]] > mx:
                    mx = lv[ix[e]]
            out[u] = <uint8_t> (mx - 1)
    return out_arr


def run_trial_kernel(indptr, indices, colors0, process_id, seed, max_rounds,
                     record_every, levels0=None, zeta_threshold=0):
    """Fused trial loop; see ``_kernels_py.run_trial_kernel`` for semantics."""
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    colors_a = np.array(colors0, dtype=np.uint8, copy=True)
    cdef Py_ssize_t n = colors_a.shape[0]
    colors_b = np.empty(n, dtype=np.uint8)
    cdef int proc = process_id
    cdef uint64_t s = <uint64_t> seed
    cdef uint64_t zth = <uint64_t> zeta_threshold
    cdef int64_t cap = max_rounds
    cdef int64_t rec_every = record_every

    blk_arr = np.empty(n, dtype=np.uint8)
    b1_arr = np.empty(n, dtype=np.uint8)
    hbn_arr = np.empty(n, dtype=np.uint8)
    hb1n_arr = np.zeros(n, dtype=np.uint8)
    sig_arr = np.zeros(n, dtype=np.uint8)
    covered_arr = np.empty(n, dtype=np.uint8)
    scratch_arr = np.empty(n, dtype=np.int32)

    cdef uint8_t[::1] ca_mv = colors_a
    cdef uint8_t[::1] cb_mv = colors_b
    cdef uint8_t[::1] blk = blk_arr
    cdef uint8_t[::1] b1 = b1_arr
    cdef uint8_t[::1] hbn = hbn_arr
    cdef uint8_t[::1] hb1n = hb1n_arr
    cdef uint8_t[::1] sig = sig_arr
    cdef uint8_t[::1] covered = covered_arr
    cdef int32_t[::1] scratch = scratch_arr

    levels_a = levels_b = lvlcnt_arr = None
    cdef uint8_t[::1] la_mv
    cdef uint8_t[::1] lb_mv
    cdef int32_t[::1] lc_mv
    cdef uint8_t* levels_p = NULL
    cdef uint8_t* levels_next_p = NULL
    cdef int32_t* lvlcnt_p = NULL
    if proc == _TCOLOR:
        if levels0 is None:
            raise ValueError("three-color trials need switch levels")
        levels_a = np.array(levels0, dtype=np.uint8, copy=True)
        levels_b = np.empty(n, dtype=np.uint8)
        lvlcnt_arr = np.zeros(n * 6, dtype=np.int32)
        la_mv = levels_a
        lb_mv = levels_b
        lc_mv = lvlcnt_arr
        levels_p = &la_mv[0]
        levels_next_p = &lb_mv[0]
        lvlcnt_p = &lc_mv[0]

    cdef int64_t nrec_cap = (cap // rec_every + 2) if rec_every > 0 else 0
    rec_arrs = {k: np.empty(nrec_cap, dtype=np.int64)
                for k in ("round", "blacks", "whites", "grays", "actives",
                          "stable_black", "nonstable")}
    cdef int64_t[::1] r_round = rec_arrs["round"]
    cdef int64_t[::1] r_blacks = rec_arrs["blacks"]
    cdef int64_t[::1] r_whites = rec_arrs["whites"]
    cdef int64_t[::1] r_grays = rec_arrs["grays"]
    cdef int64_t[::1] r_actives = rec_arrs["actives"]
    cdef int64_t[::1] r_stable = rec_arrs["stable_black"]
    cdef int64_t[::1] r_nonstable = rec_arrs["nonstable"]

    cdef const int64_t* ipp = &ip[0]
    cdef const int32_t* ixp = _ixptr(ix)
    cdef uint8_t* colors_p = &ca_mv[0]
    cdef uint8_t* next_p = &cb_mv[0]
    cdef uint8_t* tmp_p = NULL

    cdef int64_t t = 0, e
    cdef int64_t stab_round = -1
    cdef Py_ssize_t u, nrec = 0
    cdef bint is_stab, stopping, act
    cdef int64_t cb, cw, cg, caq, ci, cov
    cdef uint8_t c

    with nogil:
        if proc == _TCOLOR:
            for u in range(n):
                for e in range(ipp[u], ipp[u + 1]):
                    lvlcnt_p[<int64_t> u * 6 + levels_p[ixp[e]]] += 1
        while True:
            _fill_black(colors_p, n, proc, &blk[0], &b1[0])
            _has_flag(ipp, ixp, n, &blk[0], &hbn[0], &scratch[0])
            if proc == _TSTATE:
                _has_flag(ipp, ixp, n, &b1[0], &hb1n[0], &scratch[0])
            is_stab = True
            for u in range(n):
                if blk[u] == hbn[u]:
                    is_stab = False
                    break
            stopping = is_stab or t >= cap
            if rec_every > 0 and (stopping or t % rec_every == 0):
                cb = cw = cg = caq = ci = 0
                memset(&covered[0], 0, n)
                for u in range(n):
                    c = colors_p[u]
                    if blk[u]:
                        cb += 1
                    if c == _W:
                        cw += 1
                    if proc == _TCOLOR and c == _G:
                        cg += 1
                    if proc == _TWO:
                        act = blk[u] == hbn[u]
                    elif proc == _TSTATE:
                        act = c == _B or (c == _B0 and not hb1n[u]) or \
                              (c == _W and not hbn[u])
                    else:
                        act = (c == _B and hbn[u] != 0) or \
                              (c == _W and not hbn[u])
                    if act:
                        caq += 1
                    if blk[u] and not hbn[u]:
                        ci += 1
                        covered[u] = 1
                        for e in range(ipp[u], ipp[u + 1]):
                            covered[ixp[e]] = 1
                cov = 0
                for u in range(n):
                    if covered[u]:
                        cov += 1
                r_round[nrec] = t
                r_blacks[nrec] = cb
                r_whites[nrec] = cw
                r_grays[nrec] = cg
                r_actives[nrec] = caq
                r_stable[nrec] = ci
                r_nonstable[nrec] = n - cov
                nrec += 1
            if is_stab:
                stab_round = t
                break
            if t >= cap:
                break
            t += 1
            if proc == _TCOLOR:
                for u in range(n):
                    sig[u] = 1 if levels_p[u] <= 2 else 0
                _color_step(colors_p, n, proc, s, t, &hbn[0], &hb1n[0],
                            &sig[0], next_p)
                _level_step_counts(ipp, ixp, n, levels_p, lvlcnt_p, s, t,
                                   zth, levels_next_p)
                tmp_p = levels_p
                levels_p = levels_next_p
                levels_next_p = tmp_p
            else:
                _color_step(colors_p, n, proc, s, t, &hbn[0], &hb1n[0],
                            &sig[0], next_p)
            tmp_p = colors_p
            colors_p = next_p
            next_p = tmp_p

    final_colors = (colors_a if colors_p == &ca_mv[0] else colors_b).copy()
    final_levels = None
    if proc == _TCOLOR:
        final_levels = (levels_a if levels_p == &la_mv[0] else levels_b).copy()
    return {
        "stab_round": int(stab_round),
        "rounds": int(t),
        "colors": final_colors,
        "levels": final_levels,
        "rec": {k: v[:nrec].copy() for k, v in rec_arrs.items()},
    }

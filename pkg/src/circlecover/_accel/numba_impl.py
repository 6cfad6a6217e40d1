"""Numba-jitted versions of the hot kernels (see numpy_impl for semantics)."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def kahan_cumsum(x):
    out = np.empty_like(x)
    s = 0.0
    comp = 0.0
    for i in range(x.shape[0]):
        y = x[i] - comp
        t = s + y
        comp = (t - s) - y
        s = t
        out[i] = s
    return out


@njit(cache=True, nogil=True)
def _subtract_open(s, e, m, a, b):
    """Remove the open interval (a,b), 0 <= a < b <= 1, from the sorted
    disjoint closed arcs s[:m], e[:m] in place; zero-length remnants are
    dropped.  Returns the new arc count (at most m+1)."""
    lo_i, hi_i = 0, m
    while lo_i < hi_i:  # first arc with e > a
        mid = (lo_i + hi_i) // 2
        if e[mid] > a:
            hi_i = mid
        else:
            lo_i = mid + 1
    i = lo_i
    if i == m or s[i] >= b:
        return m
    j = i
    while j < m and s[j] < b:
        j += 1
    left_keep = s[i] < a
    right_keep = e[j - 1] > b
    ls = s[i]
    re_ = e[j - 1]
    k = (1 if left_keep else 0) + (1 if right_keep else 0)
    delta = k - (j - i)
    if delta > 0:
        for t in range(m - 1, j - 1, -1):
            s[t + delta] = s[t]
            e[t + delta] = e[t]
    elif delta < 0:
        for t in range(j, m):
            s[t + delta] = s[t]
            e[t + delta] = e[t]
    w = i
    if left_keep:
        s[w] = ls
        e[w] = a
        w += 1
    if right_keep:
        s[w] = b
        e[w] = re_
    return m + delta


@njit(cache=True, nogil=True)
def cover_trajectory(lo, hi, t_s, t_e, cps):
    """Subtract the open intervals (lo[n], hi[n]) — wrapping when hi < lo —
    from the closed target arcs, recording the uncovered measure at each
    checkpoint.  Returns (uncovered, cover_step) with cover_step = 0 when
    the target measure never reaches zero within the horizon."""
    cap = 4 * t_s.shape[0] + 64
    s = np.empty(cap)
    e = np.empty(cap)
    m = t_s.shape[0]
    for i in range(m):
        s[i] = t_s[i]
        e[i] = t_e[i]
    unc = np.zeros(cps.shape[0])
    ci = 0
    cover_step = 0
    N = lo.shape[0]
    for n in range(N):
        if m + 2 >= cap:
            cap *= 2
            s2 = np.empty(cap)
            e2 = np.empty(cap)
            for i in range(m):
                s2[i] = s[i]
                e2[i] = e[i]
            s, e = s2, e2
        a = lo[n]
        b = hi[n]
        if a < b:
            m = _subtract_open(s, e, m, a, b)
        else:
            m = _subtract_open(s, e, m, a, 1.0)
            m = _subtract_open(s, e, m, 0.0, b)
        if m == 0:
            cover_step = n + 1
            break
        while ci < cps.shape[0] and cps[ci] == n + 1:
            tot = 0.0
            for i in range(m):
                tot += e[i] - s[i]
            unc[ci] = tot
            ci += 1
    while ci < cps.shape[0]:
        if m > 0:
            tot = 0.0
            for i in range(m):
                tot += e[i] - s[i]
            unc[ci] = tot
        ci += 1
    return unc, cover_step


@njit(cache=True, nogil=True)
def point_first_hits(centers, radii, points, chunk=4096):
    N = centers.shape[0]
    out = np.zeros(points.shape[0], dtype=np.int64)
    for i in range(points.shape[0]):
        p = points[i]
        for n in range(N):
            d = abs(centers[n] - p)
            if d > 0.5:
                d = 1.0 - d
            if d < radii[n]:
                out[i] = n + 1
                break
    return out


@njit(cache=True, nogil=True)
def _cdf_ext_scalar(bp, c0, c1, cum, x):
    k = np.floor(x)
    y = x - k
    # rightmost piece with bp[i] <= y
    m = c0.shape[0]
    leftv = 0
    rightv = m  # bp has m+1 entries, pieces 0..m-1
    while leftv < rightv:
        mid = (leftv + rightv) // 2
        if bp[mid + 1] <= y:
            leftv = mid + 1
        else:
            rightv = mid
    i = leftv
    if i >= m:
        i = m - 1
    t = y - bp[i]
    return cum[i] + t * (c0[i] + 0.5 * c1[i] * t) + k


@njit(cache=True, nogil=True)
def log_survival_partials(bp, c0, c1, cum, t, radii, cp_idx):
    out = np.empty(cp_idx.shape[0], dtype=np.float64)
    partial = 0.0
    j = 0
    while j < cp_idx.shape[0] and cp_idx[j] == 0:
        out[j] = 0.0
        j += 1
    for n in range(radii.shape[0]):
        r = radii[n]
        mass = _cdf_ext_scalar(bp, c0, c1, cum, t + r) - _cdf_ext_scalar(bp, c0, c1, cum, t - r)
        partial += np.log1p(-mass)
        while j < cp_idx.shape[0] and cp_idx[j] == n + 1:
            out[j] = partial
            j += 1
    while j < cp_idx.shape[0]:
        out[j] = partial
        j += 1
    return out


@njit(cache=True, nogil=True)
def ball_mass_array(bp, c0, c1, cum, t, radii):
    out = np.empty(radii.shape[0], dtype=np.float64)
    for n in range(radii.shape[0]):
        r = radii[n]
        out[n] = _cdf_ext_scalar(bp, c0, c1, cum, t + r) - _cdf_ext_scalar(bp, c0, c1, cum, t - r)
    return out

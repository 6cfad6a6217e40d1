"""Pure numpy/python reference implementations of the hot kernels.

These define the semantics; the numba versions in ``numba_impl`` mirror
them operation for operation.  Selected via CIRCLECOVER_NO_NUMBA=1.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np


def kahan_cumsum(x: np.ndarray) -> np.ndarray:
    """Prefix sums in extended precision, rounded back to float64."""
    return np.cumsum(x.astype(np.longdouble)).astype(np.float64)


def _subtract_open(s, e, a, b):
    """Remove the open interval (a,b), 0 <= a < b <= 1, from the sorted
    disjoint closed arcs in the lists s, e; zero-length remnants are
    dropped."""
    i = bisect_right(e, a)
    if i == len(s) or s[i] >= b:
        return
    j = i
    while j < len(s) and s[j] < b:
        j += 1
    repl_s, repl_e = [], []
    if s[i] < a:
        repl_s.append(s[i])
        repl_e.append(a)
    if e[j - 1] > b:
        repl_s.append(b)
        repl_e.append(e[j - 1])
    s[i:j] = repl_s
    e[i:j] = repl_e


def cover_trajectory(lo, hi, t_s, t_e, cps):
    """Reference implementation of the online subtract engine; see the
    numba twin for the contract."""
    s, e = list(t_s), list(t_e)
    unc = np.zeros(len(cps))
    ci = 0
    cover_step = 0
    for n in range(len(lo)):
        a, b = lo[n], hi[n]
        if a < b:
            _subtract_open(s, e, a, b)
        else:
            _subtract_open(s, e, a, 1.0)
            _subtract_open(s, e, 0.0, b)
        if not s:
            cover_step = n + 1
            break
        while ci < len(cps) and cps[ci] == n + 1:
            unc[ci] = sum(ee - ss for ss, ee in zip(s, e))
            ci += 1
    while ci < len(cps):
        if s:
            unc[ci] = sum(ee - ss for ss, ee in zip(s, e))
        ci += 1
    return unc, cover_step


def point_first_hits(centers: np.ndarray, radii: np.ndarray, points: np.ndarray,
                     chunk: int = 4096) -> np.ndarray:
    """First step n (1-based, 0 = never) with circle_dist(center_n, p) < r_n."""
    N = len(centers)
    out = np.zeros(len(points), dtype=np.int64)
    for i, p in enumerate(points):
        hit = 0
        for start in range(0, N, chunk):
            stop = min(start + chunk, N)
            d = np.abs(centers[start:stop] - p)
            d = np.minimum(d, 1.0 - d)
            m = d < radii[start:stop]
            if m.any():
                hit = start + int(np.argmax(m)) + 1
                break
        out[i] = hit
    return out


def cdf_ext(bp: np.ndarray, c0: np.ndarray, c1: np.ndarray, cum: np.ndarray,
            x: np.ndarray) -> np.ndarray:
    """Distribution function extended by F(x+k) = F(x) + k."""
    k = np.floor(x)
    y = x - k
    i = np.clip(np.searchsorted(bp, y, side="right") - 1, 0, len(c0) - 1)
    t = y - bp[i]
    return cum[i] + t * (c0[i] + 0.5 * c1[i] * t) + k


def log_survival_partials(bp, c0, c1, cum, t, radii, cp_idx) -> np.ndarray:
    """Partial sums of log(1 - mu(B(t, r_n))) at checkpoint indices.

    radii must be nonincreasing; cp_idx holds 1-based step counts.
    """
    fa = cdf_ext(bp, c0, c1, cum, t - radii)
    fb = cdf_ext(bp, c0, c1, cum, t + radii)
    mass = fb - fa
    terms = np.log1p(-mass)
    partial = np.cumsum(terms)
    N = len(radii)
    out = np.empty(len(cp_idx), dtype=np.float64)
    for j, n in enumerate(cp_idx):
        n = min(int(n), N)
        out[j] = 0.0 if n == 0 else partial[n - 1]
    return out


def ball_mass_array(bp, c0, c1, cum, t, radii) -> np.ndarray:
    """mu(B(t, r_n)) for every n at once."""
    return cdf_ext(bp, c0, c1, cum, t + radii) - cdf_ext(bp, c0, c1, cum, t - radii)

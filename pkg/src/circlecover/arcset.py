"""Canonical finite unions of closed arcs on the circle [0,1).

Arcs are stored as (start, length) with start reduced into [0,1) and
length in [0,1].  Zero-length arcs (single points) are allowed so that
degenerate sets like a one-point essential-infimum set stay representable.
Covering intervals are open, so subtracting an open interval from a closed
arc leaves closed remnants; zero-length remnants are kept by ``subtract``
(drop them explicitly with ``drop_points`` when only measure matters).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

FULL_EPS = 1e-15


def mod1(x: float) -> float:
    """Reduce a position to [0,1)."""
    y = x - math.floor(x)
    return y if y < 1.0 else 0.0


def circle_dist(x: float, y: float) -> float:
    """Geodesic distance on the circle, in [0, 1/2]."""
    d = abs(mod1(x) - mod1(y))
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class ArcSet:
    starts: tuple
    lengths: tuple

    @staticmethod
    def from_arcs(arcs, merge_points: bool = True) -> "ArcSet":
        """Canonicalize a list of (start, length) pairs.

        Overlapping or touching arcs are merged so the result has pairwise
        positive gaps; a union covering everything collapses to the full
        circle (0, 1).
        """
        cleaned = []
        for s, ln in arcs:
            if ln < 0:
                raise ValueError(f"negative arc length {ln}")
            if ln >= 1.0 - FULL_EPS:
                return ArcSet.full_circle()
            cleaned.append((mod1(s), float(ln)))
        if not cleaned:
            return ArcSet((), ())
        cleaned.sort()
        merged = []
        for s, ln in cleaned:
            if merged:
                ps, pln = merged[-1]
                if s <= ps + pln:  # overlap or touch
                    merged[-1] = (ps, max(pln, s + ln - ps))
                    continue
            merged.append((s, ln))
        # wrap: last arc may reach past 1 into the first arcs
        while len(merged) > 1:
            ls, lln = merged[-1]
            fs, fln = merged[0]
            if ls + lln >= 1.0 + fs:  # reaches (or touches) first arc
                new_len = max(lln, 1.0 + fs + fln - ls)
                if new_len >= 1.0 - FULL_EPS:
                    return ArcSet.full_circle()
                merged = merged[1:-1] + [(ls, new_len)]
                merged.sort()
            else:
                break
        if len(merged) == 1 and merged[0][1] >= 1.0 - FULL_EPS:
            return ArcSet.full_circle()
        return ArcSet(tuple(s for s, _ in merged), tuple(ln for _, ln in merged))

    @staticmethod
    def full_circle() -> "ArcSet":
        return ArcSet((0.0,), (1.0,))

    @staticmethod
    def empty() -> "ArcSet":
        return ArcSet((), ())

    @staticmethod
    def point(x: float) -> "ArcSet":
        return ArcSet((mod1(x),), (0.0,))

    def __len__(self):
        return len(self.starts)

    def is_empty(self) -> bool:
        return not self.starts

    def is_full(self) -> bool:
        return len(self.starts) == 1 and self.lengths[0] >= 1.0 - FULL_EPS

    @property
    def measure(self) -> float:
        return math.fsum(self.lengths)

    def arcs(self):
        return list(zip(self.starts, self.lengths))

    def contains(self, x: float, tol: float = 0.0) -> bool:
        """Point membership (closed arcs)."""
        if self.is_full():
            return True
        x = mod1(x)
        for s, ln in zip(self.starts, self.lengths):
            # test x and x+1 against the unwrapped arc [s, s+ln]
            if s - tol <= x <= s + ln + tol or s - tol <= x + 1.0 <= s + ln + tol:
                return True
        return False

    def _linear_intervals(self):
        """Unwrapped [a,b] images in [0,2) for interval arithmetic."""
        return [(s, s + ln) for s, ln in zip(self.starts, self.lengths)]

    def subtract(self, lo: float, hi_len: float) -> "ArcSet":
        """Remove the open interval (lo, lo+hi_len) from the set.

        Remnants are closed; zero-length remnants (endpoint hits) are kept
        as point arcs.
        """
        if hi_len <= 0:
            return self
        if hi_len >= 1.0:
            raise ValueError("cannot subtract an open interval of length >= 1")
        lo = mod1(lo)
        hi = lo + hi_len
        out = []
        for s, ln in zip(self.starts, self.lengths):
            pieces = [(s, s + ln)]
            for shift in (0.0, 1.0, -1.0):
                a, b = lo + shift, hi + shift
                nxt = []
                for p, q in pieces:
                    if b <= p or a >= q:  # open (a,b) misses [p,q]
                        nxt.append((p, q))
                        continue
                    if a >= p:  # left remnant [p,a]; closed, may be a point
                        nxt.append((p, a))
                    if b <= q:  # right remnant [b,q]
                        nxt.append((b, q))
                pieces = nxt
            if pieces == [(s, s + ln)]:  # untouched: keep the exact original
                out.append((s, ln))
            else:
                out.extend((p, q - p) for p, q in pieces)
        return ArcSet.from_arcs(out)

    def subtract_set(self, other: "ArcSet") -> "ArcSet":
        """Set difference up to finitely many endpoints (measure-exact)."""
        if other.is_full():
            return ArcSet.empty()
        res = self
        for s, ln in zip(other.starts, other.lengths):
            if ln > 0:
                res = res.subtract(s, ln)
        return res

    def intersect(self, other: "ArcSet") -> "ArcSet":
        if self.is_full():
            return other
        if other.is_full():
            return self
        out = []
        for p, q in self._linear_intervals():
            for shift in (-1.0, 0.0, 1.0):
                for a, b in other._linear_intervals():
                    a, b = a + shift, b + shift
                    lo, hi = max(p, a), min(q, b)
                    if lo <= hi:
                        out.append((lo, hi - lo))
        return ArcSet.from_arcs(out)

    def union(self, other: "ArcSet") -> "ArcSet":
        return ArcSet.from_arcs(self.arcs() + other.arcs())

    def translate(self, offset: float) -> "ArcSet":
        return ArcSet.from_arcs([(s + offset, ln) for s, ln in self.arcs()])

    def drop_points(self) -> "ArcSet":
        keep = [(s, ln) for s, ln in self.arcs() if ln > 0]
        return ArcSet(tuple(s for s, _ in keep), tuple(ln for _, ln in keep))

    def only_points(self) -> bool:
        """True when every component is a single point (or the set is empty)."""
        return all(ln == 0.0 for ln in self.lengths)

    def component_points(self):
        return [s for s, ln in zip(self.starts, self.lengths) if ln == 0.0]

    def overlap_measure(self, lo: float, hi_len: float) -> float:
        """Measure of the intersection with the interval (lo, lo+hi_len)."""
        if hi_len <= 0:
            return 0.0
        lo = mod1(lo)
        total = 0.0
        for p, q in self._linear_intervals():
            for shift in (0.0, 1.0, -1.0):
                a, b = lo + shift, lo + hi_len + shift
                total += max(0.0, min(q, b) - max(p, a))
        return total

    def distance(self, x: float) -> float:
        """Distance from a point to the set (0 if contained)."""
        if self.is_empty():
            return math.inf
        if self.contains(x):
            return 0.0
        x = mod1(x)
        best = math.inf
        for s, ln in zip(self.starts, self.lengths):
            best = min(best, circle_dist(x, s), circle_dist(x, mod1(s + ln)))
        return best

    def approx_equal(self, other: "ArcSet", tol: float = 1e-12) -> bool:
        if len(self) != len(other):
            return False
        return all(
            circle_dist(a, b) <= tol and abs(la - lb) <= tol
            for a, b, la, lb in zip(self.starts, other.starts, self.lengths, other.lengths)
        )


def point_in_sorted_arcs(x: float, starts, lengths) -> bool:
    """Membership test against canonical arrays using bisection."""
    n = len(starts)
    if n == 0:
        return False
    x = mod1(x)
    i = bisect_right(starts, x) - 1
    if i >= 0 and x <= starts[i] + lengths[i]:
        return True
    # wrap arc: last arc may cover x+1
    return x + 1.0 <= starts[-1] + lengths[-1]

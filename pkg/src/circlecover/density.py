"""Piecewise degree<=1 probability densities on the circle.

A density is a tiling of [0,1) by half-open pieces, each carrying an
affine polynomial in the local coordinate (x - piece start).  Restricting
to degree <= 1 keeps every quantity the covering criteria consume exact:
essential infima, the set where the local essential infimum is attained,
ball masses, the distribution function and its inverse, and the local
expansion of mu(B(x,r)) around any point.

Series classifications here are analytic-first: numeric partial sums are
reported but never decide convergence on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .arcset import ArcSet, circle_dist, mod1
from . import _accel

INTEGRAL_TOL = 1e-12


class DensitySpecError(ValueError):
    pass


@dataclass(frozen=True)
class PiecewisePolyDensity:
    """Density f as breakpoints bp[0..m] (bp[0]=0, bp[m]=1) and per-piece
    affine coefficients: f(x) = c0[i] + c1[i]*(x - bp[i]) on [bp[i], bp[i+1])."""

    bp: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    cum: np.ndarray  # cumulative mass at each breakpoint, cum[0]=0, cum[m]=1
    name: Optional[str] = None

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_pieces(pieces, name: Optional[str] = None,
                    normalize: bool = False) -> "PiecewisePolyDensity":
        """Build from [(from, to, poly)] covering [0,1] without gaps.

        poly is [c] for a constant piece or [c0, c1] for an affine piece in
        the local coordinate.
        """
        if not pieces:
            raise DensitySpecError("no pieces")
        pieces = sorted(pieces, key=lambda p: p[0])
        bp, c0s, c1s = [], [], []
        pos = 0.0
        for frm, to, poly in pieces:
            if abs(frm - pos) > 1e-15:
                raise DensitySpecError(f"pieces leave a gap at {pos}")
            if to <= frm:
                raise DensitySpecError("piece with nonpositive width")
            if len(poly) == 1:
                a, b = float(poly[0]), 0.0
            elif len(poly) == 2:
                a, b = float(poly[0]), float(poly[1])
            else:
                raise DensitySpecError("poly must have 1 or 2 coefficients")
            bp.append(frm)
            c0s.append(a)
            c1s.append(b)
            pos = to
        if abs(pos - 1.0) > 1e-15:
            raise DensitySpecError("pieces do not reach 1")
        bp.append(1.0)
        bp = np.asarray(bp, dtype=np.float64)
        c0 = np.asarray(c0s, dtype=np.float64)
        c1 = np.asarray(c1s, dtype=np.float64)
        widths = np.diff(bp)
        total = math.fsum(c0[i] * widths[i] + 0.5 * c1[i] * widths[i] ** 2
                          for i in range(len(c0)))
        if normalize:
            if total <= 0:
                raise DensitySpecError("cannot normalize a zero-mass density")
            c0, c1 = c0 / total, c1 / total
            total = math.fsum(c0[i] * widths[i] + 0.5 * c1[i] * widths[i] ** 2
                              for i in range(len(c0)))
        ends = c0 + c1 * widths
        if np.any(c0 < -INTEGRAL_TOL) or np.any(ends < -INTEGRAL_TOL):
            raise DensitySpecError("density negative somewhere")
        if abs(total - 1.0) > INTEGRAL_TOL:
            raise DensitySpecError(f"density integrates to {total!r}, not 1")
        cum = np.zeros(len(bp))
        acc = 0.0
        masses = [c0[i] * widths[i] + 0.5 * c1[i] * widths[i] ** 2
                  for i in range(len(c0))]
        for i, mass in enumerate(masses):
            acc = math.fsum(masses[: i + 1])
            cum[i + 1] = acc
        cum[-1] = 1.0  # pin the endpoint; |acc-1| <= INTEGRAL_TOL
        return PiecewisePolyDensity(bp, c0, c1, cum, name)

    @staticmethod
    def uniform() -> "PiecewisePolyDensity":
        return PiecewisePolyDensity.from_pieces([(0.0, 1.0, [1.0])], name="uniform")

    @staticmethod
    def tent() -> "PiecewisePolyDensity":
        """f(x) = |x| + 3/4 on [-1/2, 1/2), wrapped to [0,1)."""
        return PiecewisePolyDensity.from_pieces(
            [(0.0, 0.5, [0.75, 1.0]), (0.5, 1.0, [1.25, -1.0])], name="tent")

    @staticmethod
    def step(lo: float = 0.5, hi: float = 1.5, split: float = 0.5) -> "PiecewisePolyDensity":
        """lo on [0, split), hi on [split, 1); must integrate to 1."""
        return PiecewisePolyDensity.from_pieces(
            [(0.0, split, [lo]), (split, 1.0, [hi])],
            name=f"step:{lo}:{hi}:{split}")

    @staticmethod
    def fat_cantor(depth: int) -> "PiecewisePolyDensity":
        """Staircase over dyadic blocks with a fat-Cantor indicator inside.

        Block n = [2^-(n+1), 2^-n) carries 1/(n+1) on a depth-`depth`
        fat Cantor set (central gap of length 4^-(k+1) removed at step k)
        scaled into the block, and 1/(n+1) + 1 on the gaps; the tail
        [0, 2^-depth) is constant at 1/(depth+1).  The result is
        renormalized.  At finite depth the Cantor pieces have interior, so
        the essential-infimum set is the closed tail block; only in the
        infinite-depth limit does it collapse to {0}.
        """
        if not 1 <= depth <= 20:
            raise DensitySpecError("depth must be in 1..20")
        kept = [(0.0, 1.0)]
        for k in range(depth):
            gap = 4.0 ** (-k - 1)
            nxt = []
            for a, b in kept:
                c = 0.5 * (a + b)
                nxt.append((a, c - gap / 2))
                nxt.append((c + gap / 2, b))
            kept = nxt
        pieces = [(0.0, 2.0 ** (-depth), [1.0 / (depth + 1)])]
        for n in range(depth - 1, -1, -1):
            lo_block = 2.0 ** (-n - 1)
            base = 1.0 / (n + 1)
            pos = lo_block
            for a, b in kept:
                xa, xb = lo_block * (1 + a), lo_block * (1 + b)
                if xa > pos:
                    pieces.append((pos, xa, [base + 1.0]))
                pieces.append((xa, xb, [base]))
                pos = xb
            if pos < 2.0 * lo_block:
                pieces.append((pos, 2.0 * lo_block, [base + 1.0]))
        return PiecewisePolyDensity.from_pieces(
            pieces, name=f"fatcantor:{depth}", normalize=True)

    @staticmethod
    def from_spec(obj: dict, name: Optional[str] = None) -> "PiecewisePolyDensity":
        """Build from the file schema { pieces = [ {from, to, poly} ] }."""
        try:
            raw = [(p["from"], p["to"], p["poly"]) for p in obj["pieces"]]
        except (KeyError, TypeError) as exc:
            raise DensitySpecError(f"bad density spec: {exc}") from exc
        return PiecewisePolyDensity.from_pieces(raw, name=name)

    @staticmethod
    def parse(text: str) -> "PiecewisePolyDensity":
        """Named builders: uniform | tent | step:<lo>:<hi>:<split> | fatcantor:<depth>."""
        parts = text.split(":")
        kind = parts[0]
        if kind == "uniform" and len(parts) == 1:
            return PiecewisePolyDensity.uniform()
        if kind == "tent" and len(parts) == 1:
            return PiecewisePolyDensity.tent()
        if kind == "step":
            if len(parts) != 4:
                raise DensitySpecError("expected step:<lo>:<hi>:<split>")
            return PiecewisePolyDensity.step(*(float(p) for p in parts[1:]))
        if kind == "fatcantor":
            if len(parts) != 2:
                raise DensitySpecError("expected fatcantor:<depth>")
            return PiecewisePolyDensity.fat_cantor(int(parts[1]))
        raise DensitySpecError(f"unknown density spec {text!r}")

    # -- pointwise and integral evaluation ---------------------------------

    @property
    def npieces(self) -> int:
        return len(self.c0)

    def tables(self):
        return self.bp, self.c0, self.c1, self.cum

    def piece_index(self, x: float) -> int:
        x = mod1(x)
        i = int(np.searchsorted(self.bp, x, side="right")) - 1
        return min(max(i, 0), self.npieces - 1)

    def __call__(self, x: float) -> float:
        i = self.piece_index(x)
        return float(self.c0[i] + self.c1[i] * (mod1(x) - self.bp[i]))

    def one_sided(self, x: float):
        """(v_left, slope_left, v_right, slope_right) of f at x (limits)."""
        x = mod1(x)
        i = self.piece_index(x)
        if x > self.bp[i]:  # interior of piece i
            v = self.c0[i] + self.c1[i] * (x - self.bp[i])
            return float(v), float(self.c1[i]), float(v), float(self.c1[i])
        j = (i - 1) % self.npieces  # piece to the left (wraps at 0)
        wl = self.bp[j + 1] - self.bp[j]
        vl = self.c0[j] + self.c1[j] * wl
        return float(vl), float(self.c1[j]), float(self.c0[i]), float(self.c1[i])

    def cdf(self, x: float) -> float:
        """M(x) = integral of f over [0, x], for x in [0, 1]."""
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        i = self.piece_index(x)
        t = x - self.bp[i]
        return float(self.cum[i] + t * (self.c0[i] + 0.5 * self.c1[i] * t))

    def cdf_bulk(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        i = np.clip(np.searchsorted(self.bp, x, side="right") - 1, 0,
                    self.npieces - 1)
        t = x - self.bp[i]
        return self.cum[i] + t * (self.c0[i] + 0.5 * self.c1[i] * t)

    def integrate_arc(self, start: float, length: float) -> float:
        """Exact mass of the arc (start, start+length), 0 <= length <= 1."""
        if length <= 0.0:
            return 0.0
        if length >= 1.0:
            return 1.0
        start = mod1(start)
        end = start + length
        if end <= 1.0:
            return self.cdf(end) - self.cdf(start)
        return (1.0 - self.cdf(start)) + self.cdf(end - 1.0)

    def mu_ball(self, x: float, r: float) -> float:
        """Mass of the ball B(x, r); requires 0 < r < 1/2."""
        if not 0.0 < r < 0.5:
            raise ValueError(f"radius {r} outside (0, 1/2)")
        return self.integrate_arc(x - r, 2.0 * r)

    def mu_ball_batch(self, x: float, radii: np.ndarray) -> np.ndarray:
        """mu(B(x, r_n)) for a whole radius array (each in (0, 1/2))."""
        return _accel.ball_mass_array(self.bp, self.c0, self.c1, self.cum,
                                      mod1(x), np.asarray(radii, dtype=np.float64))

    def mu_arcset(self, s: ArcSet) -> float:
        return math.fsum(self.integrate_arc(a, ln) for a, ln in s.arcs() if ln > 0)

    def mu_ball_intersection(self, t: float, s: float, r: float) -> float:
        """Mass of B(t,r) ∩ B(s,r)."""
        if not 0.0 < r < 0.5:
            raise ValueError(f"radius {r} outside (0, 1/2)")
        bt = ArcSet.from_arcs([(t - r, 2 * r)])
        bs = ArcSet.from_arcs([(s - r, 2 * r)])
        return self.mu_arcset(bt.intersect(bs))

    # -- inverse distribution ----------------------------------------------

    def inverse_cdf_bulk(self, u: np.ndarray) -> np.ndarray:
        """Generalized inverse M^{-1}(u) = inf{t : M(t) >= u}, vectorized.

        Returns values in [0, 1]; u=1 maps to 1 (same circle point as 0).
        """
        u = np.asarray(u, dtype=np.float64)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise ValueError("u outside [0, 1]")
        if self.npieces == 1 and self.c1[0] == 0.0:  # uniform: M is the identity
            return u.copy()
        idx = np.searchsorted(self.cum, u, side="left")
        i = np.clip(idx - 1, 0, self.npieces - 1)
        q = u - self.cum[i]
        a, b = self.c0[i], self.c1[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(a * a + 2.0 * b * q, 0.0))
            denom = a + disc
            t_affine = np.where(denom > 0, 2.0 * q / np.where(denom > 0, denom, 1.0), 0.0)
            t_const = np.where(a > 0, q / np.where(a > 0, a, 1.0), 0.0)
        t = np.where(b != 0.0, t_affine, t_const)
        widths = np.diff(self.bp)[i]
        t = np.clip(t, 0.0, widths)
        x = self.bp[i] + t
        return np.where(u <= 0.0, 0.0, x)

    def inverse_cdf(self, u: float) -> float:
        return float(self.inverse_cdf_bulk(np.array([u]))[0])

    # -- essential infimum machinery ----------------------------------------

    def _piece_end_values(self):
        widths = np.diff(self.bp)
        return self.c0.copy(), self.c0 + self.c1 * widths

    def ess_inf(self) -> float:
        v0, v1 = self._piece_end_values()
        return float(min(v0.min(), v1.min()))

    def ess_sup(self) -> float:
        v0, v1 = self._piece_end_values()
        return float(max(v0.max(), v1.max()))

    def ess_inf_interval(self, start: float, length: float) -> float:
        """Essential infimum of f over the arc [start, start+length]."""
        if length <= 0.0:
            raise ValueError("empty arc")
        if length >= 1.0:
            return self.ess_inf()
        start = mod1(start)
        a, b = start, start + length  # b < 2
        best = math.inf
        for i in range(self.npieces):
            for off in (0.0, 1.0):
                lo = max(a, self.bp[i] + off)
                hi = min(b, self.bp[i + 1] + off)
                if hi <= lo:
                    continue
                y0, y1 = lo - self.bp[i] - off, hi - self.bp[i] - off
                va = self.c0[i] + self.c1[i] * y0
                vb = self.c0[i] + self.c1[i] * y1
                best = min(best, float(va), float(vb))
        return best

    def local_ess_inf(self, x: float) -> float:
        vl, _, vr, _ = self.one_sided(x)
        return min(vl, vr)

    def local_ess_sup(self, x: float) -> float:
        vl, _, vr, _ = self.one_sided(x)
        return max(vl, vr)

    def ess_inf_set(self) -> ArcSet:
        """The closed set of points where the local essential infimum equals
        the global one: whole pieces for flat minima, isolated endpoints
        where an affine piece touches the minimum."""
        m = self.ess_inf()
        widths = np.diff(self.bp)
        arcs = []
        for i in range(self.npieces):
            va = float(self.c0[i])
            vb = float(self.c0[i] + self.c1[i] * widths[i])
            if self.c1[i] == 0.0:
                if va == m:
                    arcs.append((float(self.bp[i]), float(widths[i])))
            else:
                if va == m:
                    arcs.append((float(self.bp[i]), 0.0))
                if vb == m:
                    arcs.append((float(mod1(self.bp[i + 1])), 0.0))
        return ArcSet.from_arcs(arcs)

    def local_expansion(self, x: float):
        """(gap, curve, radius): for r < radius,
        mu(B(x,r)) - m*l = 2*gap*r + curve*r^2 exactly, with l = 2r."""
        x = mod1(x)
        vl, sl, vr, sr = self.one_sided(x)
        m = self.ess_inf()
        gap = 0.5 * (vl + vr) - m
        curve = 0.5 * (sr - sl)
        dists = [d for d in
                 (circle_dist(x, b) for b in self.bp[:-1])
                 if d > 0.0]
        radius = min(dists) if dists else 0.5
        return gap, curve, min(radius, 0.5)


# -- analysis objects -------------------------------------------------------

@dataclass(frozen=True)
class DensityAnalysis:
    density: PiecewisePolyDensity
    ess_inf: float
    min_set: ArcSet
    attainable_infimum: str  # yes | no | unknown
    attainability_note: Optional[str] = None
    translate_offsets: Optional[tuple] = None


def attainable_infimum_check(f: PiecewisePolyDensity):
    """Tri-state check that inf over the circle of the local essential
    supremum equals the essential infimum (guaranteed for piecewise affine
    densities; the check stays honest for future density classes).

    Finite-depth staircase densities pass, but their infinite-depth limits
    do not; a warning note records that caveat.
    """
    m = f.ess_inf()
    v0, v1 = f._piece_end_values()
    inf_sup = float(min(v0.min(), v1.min()))
    note = None
    if f.name and f.name.startswith("fatcantor"):
        note = ("finite-depth approximation only: the infinite-depth "
                "staircase has local ess sup >= 1 everywhere and fails "
                "this check")
    if inf_sup == m:
        return "yes", note
    if inf_sup > m:
        return "no", note
    return "unknown", note


def analyze(f: PiecewisePolyDensity,
            translate_offsets: Optional[Sequence[float]] = None) -> DensityAnalysis:
    verdict, note = attainable_infimum_check(f)
    return DensityAnalysis(
        density=f,
        ess_inf=f.ess_inf(),
        min_set=f.ess_inf_set(),
        attainable_infimum=verdict,
        attainability_note=note,
        translate_offsets=tuple(translate_offsets) if translate_offsets else (0.0,),
    )


@dataclass(frozen=True)
class FlatnessReport:
    x: float
    checkpoints: tuple
    partial_sums: tuple
    classification: str  # converges | diverges | inconclusive
    bound_constant: Optional[float] = None
    witness_constant: Optional[float] = None
    note: Optional[str] = None
    local_gap: float = 0.0
    local_curve: float = 0.0
    local_radius: float = 0.0


def flatness_partial(f: PiecewisePolyDensity, x: float, lengths,
                     checkpoints: Sequence[int]) -> FlatnessReport:
    """Partial sums of |mu(B(x, r_n)) - m*l_n| with an analytic verdict.

    For r_n below the distance to the neighboring breakpoints the term is
    exactly 2*gap*r_n + curve*r_n^2, so the classification never rests on
    the numerics:

    * sum(l_n) finite           -> converges (terms <= (esssup - m) l_n);
    * constant lengths          -> the terms are eventually one fixed value;
    * gap > 0, sum(l_n) = inf   -> diverges (terms >= gap/2 * l_n eventually);
    * gap = 0                   -> terms are curve*r_n^2: converges when
      sum(l_n^2) does (bound constant |curve|), inconclusive otherwise;
    * anything else             -> inconclusive.
    """
    checkpoints = sorted(int(c) for c in checkpoints)
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive and increasing")
    N = checkpoints[-1]
    m = f.ess_inf()
    ell = lengths.prefix(N)
    radii = 0.5 * ell
    masses = f.mu_ball_batch(x, radii)
    terms = np.abs(masses - m * ell)
    partial = np.cumsum(terms)
    sums = tuple(float(partial[c - 1]) for c in checkpoints)

    gap, curve, radius = f.local_expansion(x)
    sum_v = lengths.sum_verdict()
    ell2_v = lengths.ell2_verdict()
    cls, bound, witness, note = "inconclusive", None, None, None
    if sum_v == "converges":
        cls = "converges"
        bound = f.ess_sup() - m
        note = "summable lengths bound every term by (esssup f - m) l_n"
    elif lengths.is_constant():
        tval = float(terms[-1])
        if tval <= 1e-12:  # zero up to float noise in the exact integrals
            cls, bound = "converges", 0.0
        else:
            cls, witness = "diverges", tval / float(ell[-1])
            note = "constant lengths: the term is eventually constant and positive"
    elif gap > 0.0:
        if sum_v == "diverges":
            cls, witness = "diverges", 0.5 * gap
            note = "one-sided limits exceed m on average; terms ~ gap * l_n"
    elif gap == 0.0:
        if curve == 0.0:
            cls, bound = "converges", 0.0
            note = "locally constant at the minimum: terms are eventually 0"
        elif ell2_v == "converges":
            cls, bound = "converges", abs(curve)
            note = "terms are exactly |curve| r_n^2 once r_n is local"
        elif ell2_v == "diverges":
            note = ("terms are ~ |curve| r_n^2 with divergent sum(r_n^2), "
                    "but no c*l_n lower bound exists")
    return FlatnessReport(mod1(x), tuple(checkpoints), sums, cls, bound,
                          witness, note, gap, curve, radius)


@dataclass(frozen=True)
class BorelCantelliReport:
    x: float
    N: int
    partial: float
    classification: str  # converges | diverges | inconclusive
    note: Optional[str] = None


def borel_cantelli_point(f: PiecewisePolyDensity, x: float, lengths,
                         N: int) -> BorelCantelliReport:
    """Partial sum of mu(B(x, r_n)) and its analytic classification."""
    if N < 1:
        raise ValueError("N must be >= 1")
    ell = lengths.prefix(N)
    masses = f.mu_ball_batch(x, 0.5 * ell)
    partial = float(math.fsum(masses.tolist()))
    vl, sl, vr, sr = f.one_sided(x)
    mean_val = 0.5 * (vl + vr)
    sum_v = lengths.sum_verdict()
    ell2_v = lengths.ell2_verdict()
    cls, note = "inconclusive", None
    if sum_v == "converges":
        cls = "converges"
        note = "terms <= (esssup f) l_n with summable lengths"
    elif sum_v == "diverges":
        if mean_val > 0.0:
            cls = "diverges"
            note = "terms >= mean_local/2 * l_n eventually"
        else:
            # f vanishes at x from both sides: terms are curve * r_n^2
            if ell2_v == "converges":
                cls = "converges"
            elif ell2_v == "diverges" and 0.5 * (sr - sl) > 0:
                cls = "diverges"
            note = "density vanishes at x; terms are exactly curve * r_n^2 locally"
    return BorelCantelliReport(mod1(x), N, partial, cls, note)

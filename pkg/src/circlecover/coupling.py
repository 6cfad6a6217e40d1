"""Two-part decompositions mu = mu_0 + mu_1 and coupled covering trials.

Each step draws a Bernoulli mark eps_j selecting which normalized part the
center comes from, so the marginal center law is the mixture.  The mark
stream and the part-1 stream are keyed independently of the part-0 stream;
two models sharing the same part 1 (the comparison experiment couples
mu and nu through their common restriction to an open set) therefore see
identical part-1 draws at identical steps, and with alpha_1 = 1 a coupled
trial is bit-identical to a plain one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng
from .arcset import ArcSet, mod1
from .coversim import (TrialConfig, TrialResult, Target, _finish_trial,
                       log_checkpoints, split_target)
from .density import PiecewisePolyDensity
from .sequences import LengthSequence

MASS_TOL = 1e-12


def _piece_rows(f: PiecewisePolyDensity):
    return [(float(f.bp[i]), float(f.bp[i + 1]),
             [float(f.c0[i]), float(f.c1[i])]) for i in range(f.npieces)]


def _split_at(pieces, cuts):
    """Refine a piece tiling of [0,1] so every cut becomes a boundary."""
    cuts = sorted({mod1(c) for c in cuts} - {0.0})
    out = []
    for frm, to, (a, b) in ((p[0], p[1], p[2]) for p in pieces):
        inner = [c for c in cuts if frm < c < to]
        lo = frm
        for c in inner + [to]:
            out.append((lo, c, [a + b * (lo - frm), b]))
            lo = c
    return out


def restrict_pieces(f: PiecewisePolyDensity, U: ArcSet):
    """Pieces of f * 1_U as a tiling of [0,1] (zero off U)."""
    cuts = []
    for s, ln in zip(U.starts, U.lengths):
        cuts.extend([s, mod1(s + ln)])
    out = []
    for frm, to, poly in _split_at(_piece_rows(f), cuts):
        mid = 0.5 * (frm + to)
        out.append((frm, to, poly if U.contains(mid) else [0.0, 0.0]))
    return out


def subtract_pieces(f: PiecewisePolyDensity, pieces):
    """Pieces of f - g where g is given as a piece tiling."""
    cuts = [p[0] for p in pieces]
    mine = _split_at(_piece_rows(f), cuts)
    other = _split_at(pieces, [p[0] for p in mine])
    if len(mine) != len(other):
        raise ValueError("piece tilings failed to align")
    out = []
    for (frm, to, pa), (frm2, _, pb) in zip(mine, other):
        if abs(frm - frm2) > 1e-15:
            raise ValueError("piece tilings failed to align")
        out.append((frm, to, [pa[0] - pb[0], pa[1] - pb[1]]))
    return out


def pieces_mass(pieces) -> float:
    return math.fsum(
        (to - frm) * (p[0] + 0.5 * p[1] * (to - frm)) for frm, to, p in pieces)


def _normalize_pieces(pieces, mass, name):
    rows = [(frm, to, [p[0] / mass, p[1] / mass]) for frm, to, p in pieces]
    return PiecewisePolyDensity.from_pieces(rows, name=name)


@dataclass(frozen=True)
class CoupledModel:
    base: PiecewisePolyDensity
    part0: Optional[PiecewisePolyDensity]  # normalized; None when alpha0 = 0
    part1: Optional[PiecewisePolyDensity]
    alpha1: float

    @staticmethod
    def from_sub_pieces(base: PiecewisePolyDensity, pieces1) -> "CoupledModel":
        """Decompose base into (base - g, g) for a sub-density g given as
        pieces; validates 0 <= g <= base pointwise within 1e-12."""
        pieces0 = subtract_pieces(base, pieces1)
        for frm, to, p in pieces0 + list(pieces1):
            w = to - frm
            if p[0] < -MASS_TOL or p[0] + p[1] * w < -MASS_TOL:
                raise ValueError("decomposition parts must stay nonnegative")
        a1 = pieces_mass(pieces1)
        a0 = pieces_mass(pieces0)
        if abs(a0 + a1 - 1.0) > MASS_TOL:
            raise ValueError("part masses must sum to 1")
        part0 = _normalize_pieces(pieces0, a0, "part0") if a0 > MASS_TOL else None
        part1 = _normalize_pieces(pieces1, a1, "part1") if a1 > MASS_TOL else None
        return CoupledModel(base, part0, part1, a1)

    @staticmethod
    def from_restriction(base: PiecewisePolyDensity, U: ArcSet) -> "CoupledModel":
        """part 1 = base restricted to U, part 0 = the rest."""
        return CoupledModel.from_sub_pieces(base, restrict_pieces(base, U))


def coupled_centers(model: CoupledModel, n: int, seed: int, trial: int = 0):
    """-> (marks, centers): marks are the Bernoulli(alpha1) selectors."""
    marks = rng.uniforms(seed, n, trial, rng.STREAM_MARKS) < model.alpha1
    x1 = (model.part1.inverse_cdf_bulk(
        rng.uniforms(seed, n, trial, rng.STREAM_CENTERS)) % 1.0
        if model.part1 is not None else np.zeros(n))
    x0 = (model.part0.inverse_cdf_bulk(
        rng.uniforms(seed, n, trial, rng.STREAM_ALT)) % 1.0
        if model.part0 is not None else np.zeros(n))
    return marks, np.where(marks, x1, x0)


def run_coupled_trial(model: CoupledModel, lengths: LengthSequence, n_max: int,
                      target: Target, seed: int, trial: int = 0,
                      checkpoints: tuple = ()) -> TrialResult:
    cfg = TrialConfig(model.base, lengths, n_max, target, seed, checkpoints, trial)
    arcs, points = split_target(target)
    cps = cfg.resolved_checkpoints()
    marks, centers = coupled_centers(model, n_max, seed, trial)
    radii = 0.5 * lengths.prefix(n_max)
    return _finish_trial(seed, trial, n_max, centers, radii, arcs, points,
                         cps, marks_ones=int(marks.sum()))


def subset_cover(centers: np.ndarray, radii: np.ndarray, mask: np.ndarray,
                 target: Target):
    """Covering verdict using only the masked steps.

    -> (covered, cover_step) with cover_step in original step numbering."""
    idx = np.nonzero(mask)[0]
    arcs, points = split_target(target)
    res = _finish_trial(0, 0, len(idx), centers[idx], radii[idx],
                        arcs, points, (1,))
    if res.cover_time is None:
        return False, None
    if res.cover_time == 0:
        return True, 0
    return True, int(idx[res.cover_time - 1] + 1)


def covered_by_checkpoints(result: TrialResult, checkpoints) -> np.ndarray:
    """Boolean indicator per checkpoint that the whole target is covered."""
    out = np.zeros(len(checkpoints), dtype=bool)
    for j, cp in enumerate(checkpoints):
        arcs_done = result.uncovered[j] == 0.0
        pts_done = all(0 < h <= cp for h in result.point_hits) \
            if result.point_hits else True
        out[j] = arcs_done and pts_done
    return out


def density_dominates_on(small: PiecewisePolyDensity,
                         large: PiecewisePolyDensity, U: ArcSet,
                         tol: float = 1e-12) -> bool:
    """Exact piecewise check that small <= large on U."""
    diff = subtract_pieces(large, restrict_pieces(small, ArcSet.full_circle()))
    for frm, to, p in _split_at(diff, [c for s, ln in zip(U.starts, U.lengths)
                                       for c in (s, mod1(s + ln))]):
        mid = 0.5 * (frm + to)
        if not U.contains(mid):
            continue
        w = to - frm
        if p[0] < -tol or p[0] + p[1] * w < -tol:
            return False
    return True


@dataclass(frozen=True)
class ComparisonReport:
    checkpoints: tuple
    trials: int
    p_small: tuple      # estimated P(K covered by N) under the dominated law
    p_large: tuple
    stderr_small: tuple
    stderr_large: tuple
    seed: int

    def sigma_diff(self):
        return tuple(math.hypot(a, b)
                     for a, b in zip(self.stderr_small, self.stderr_large))

    def rows(self):
        return [{
            "n": int(n), "p_small": ps, "p_large": pl,
            "stderr_small": ss, "stderr_large": sl, "trials": self.trials,
            "seed": self.seed,
        } for n, ps, pl, ss, sl in zip(self.checkpoints, self.p_small,
                                       self.p_large, self.stderr_small,
                                       self.stderr_large)]


def comparison_experiment(small: PiecewisePolyDensity,
                          large: PiecewisePolyDensity,
                          U: ArcSet, K: Target, lengths: LengthSequence,
                          n_max: int, trials: int, seed: int,
                          checkpoints: Sequence[int] = (),
                          threads: int = 1) -> ComparisonReport:
    """Coupled estimate of P(K covered by N) under two laws with
    small <= large on U and K inside U.

    Both models share the mark stream and the part-1 draws (the common
    component small|_U), so the coupling only differs where the laws do.
    Per-seed monotonicity holds for the marked-step covering; the full
    finite-N event is compared statistically.
    """
    if not density_dominates_on(small, large, U):
        raise ValueError("domination small <= large fails on U")
    arcs, points = split_target(K)
    if U.intersect(arcs).measure < arcs.measure - 1e-12 or \
            any(not U.contains(p) for p in points):
        raise ValueError("K must sit inside U")
    pieces1 = restrict_pieces(small, U)
    model_small = CoupledModel.from_sub_pieces(small, pieces1)
    model_large = CoupledModel.from_sub_pieces(large, pieces1)
    cps = tuple(sorted(int(c) for c in checkpoints)) or log_checkpoints(n_max)

    def one(i):
        r_s = run_coupled_trial(model_small, lengths, n_max, K, seed, i, cps)
        r_l = run_coupled_trial(model_large, lengths, n_max, K, seed, i, cps)
        return (covered_by_checkpoints(r_s, cps), covered_by_checkpoints(r_l, cps))

    if threads <= 1:
        pairs = [one(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(one, range(trials)))
    cov_s = np.array([p[0] for p in pairs], dtype=float)
    cov_l = np.array([p[1] for p in pairs], dtype=float)
    p_s, p_l = cov_s.mean(axis=0), cov_l.mean(axis=0)
    se = lambda p: np.sqrt(np.maximum(p * (1 - p), 1e-12) / trials)
    return ComparisonReport(cps, trials, tuple(map(float, p_s)),
                            tuple(map(float, p_l)),
                            tuple(map(float, se(p_s))),
                            tuple(map(float, se(p_l))), seed)


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a CDF (callable on
    arrays or scalars)."""
    x = np.sort(np.asarray(samples))
    n = len(x)
    try:
        F = np.asarray(cdf(x), dtype=np.float64)
        if F.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        F = np.array([cdf(v) for v in x])
    up = np.max(np.arange(1, n + 1) / n - F)
    dn = np.max(F - np.arange(0, n) / n)
    return float(max(up, dn))


def ks_critical_1pct(n: int) -> float:
    """Asymptotic 1% critical value for the one-sample KS statistic."""
    return 1.628 / math.sqrt(n)

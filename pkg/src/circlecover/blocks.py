"""Block-structured length sequences.

Two constructions drive the necessity-side counterexamples:

* ``block_sequence_A``: constant plateaus at level ln(n_k)/n_k whose block
  lengths grow so fast that the ratio n*l_n / (l_1+...+l_n) returns to ~1
  at every block boundary while sum(l_n^2) stays bounded by
  sum(ln^2 n_k / n_k).

* ``block_sequence_B``: plateaus alternate with c/n stretches (c > 1); each
  c/n stretch is extended until a certified lower bound on the weighted
  series partial sum at a = 1/c exceeds the block index, so the series
  diverges for every a >= 1/c even though the boundary ratios spike.

Schedules grow super-exponentially.  Blocks are materialized as exact
integers while that is representable and carried in log space beyond;
evaluation of l_n and of partial sums is exact for every index that fits
in machine range, which is all any simulation or series scan can reach.
Past the final scheduled block the last block's rule simply continues;
the analytic classifications describe the idealized infinite schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import digamma, polygamma

from .sequences import (CAP, CONVERGES, DIVERGES, UNKNOWN, LengthSequence,
                        SequenceSpecError)

RATIO_PUSH = 19.0       # ln n_{k+1} >= 19 * S_k pushes boundary ratios to ~0.95
LN_INT_CAP = 700.0      # materialize exact ints while ln n stays below this
MAX_POINTWISE = 60.0    # exact per-term series evaluation while ln N <= this


@dataclass(frozen=True)
class Block:
    kind: str                 # "plateau" | "harmonic"
    level: float              # plateau value, or the c of c/n
    ln_n: float               # log of the block length
    ln_end: float             # log of the cumulative end index N_k
    n: Optional[int] = None   # exact block length when representable
    end: Optional[int] = None
    s_end: float = 0.0        # certified (lower-bound) partial sum S_{N_k}
    ell2_end: float = 0.0     # certified (upper-bound) partial sum of squares
    shepp_log_lo: float = -math.inf  # certified log lower bound at the reference a
    note: str = ""


def _ln_add(ln_a: float, ln_b: float) -> float:
    """log(e^a + e^b) stably."""
    hi, lo = max(ln_a, ln_b), min(ln_a, ln_b)
    if lo == -math.inf:
        return hi
    return hi + math.log1p(math.exp(lo - hi))


class BlockSequence(LengthSequence):
    def __init__(self, blocks, variant: str, c: Optional[float], k_max: int):
        self.blocks = tuple(blocks)
        self.variant = variant
        self.c = c
        self.k_max = k_max

    # -- evaluation ---------------------------------------------------------

    def _block_for(self, n: int) -> Block:
        for b in self.blocks:
            if b.end is not None:
                if n <= b.end:
                    return b
            elif math.log(n) <= b.ln_end:
                return b
        return self.blocks[-1]  # rule of the last block continues

    def _block_value(self, b: Block, n: int) -> float:
        if b.kind == "plateau":
            v = b.level
        else:
            v = min(b.level / n, CAP)
        if v <= 0.0:
            raise ValueError(f"length underflows float range at n={n}")
        return v

    def value(self, n: int) -> float:
        if n < 1:
            raise ValueError("n must be >= 1")
        return self._block_value(self._block_for(n), n)

    def raw_prefix(self, N: int) -> np.ndarray:
        out = np.empty(N, dtype=np.float64)
        pos = 1
        for b in self.blocks:
            if pos > N:
                break
            endv = b.end if b.end is not None else N
            hi = min(endv, N)
            idx = np.arange(pos, hi + 1, dtype=np.float64)
            if b.kind == "plateau":
                out[pos - 1:hi] = b.level
            else:
                out[pos - 1:hi] = np.minimum(b.level / idx, CAP)
            pos = hi + 1
        if pos <= N:  # last block's rule continues
            b = self.blocks[-1]
            idx = np.arange(pos, N + 1, dtype=np.float64)
            if b.kind == "plateau":
                out[pos - 1:] = b.level
            else:
                out[pos - 1:] = np.minimum(b.level / idx, CAP)
        return out

    def partial_sum(self, N: int) -> float:
        total = 0.0
        pos = 1
        blocks = list(self.blocks)
        for i, b in enumerate(blocks):
            endv = b.end if b.end is not None else None
            if endv is None or endv >= N or (i == len(blocks) - 1):
                # N falls in this block (or in its indefinite continuation)
                hi = N
            else:
                hi = endv
            if b.kind == "plateau":
                total += (hi - pos + 1) * b.level
            else:
                total += _capped_harmonic_sum(b.level, pos, hi)
            pos = hi + 1
            if pos > N:
                break
        return total

    # -- classifications ------------------------------------------------------

    def sum_verdict(self):
        return DIVERGES

    def ell2_verdict(self):
        return CONVERGES

    def shepp_verdict(self, a):
        if self.variant == "B" and a >= 1.0 / self.c - 1e-15:
            return DIVERGES
        return UNKNOWN

    def shepp_all_above(self, m):
        if self.variant == "B" and m >= 1.0 / self.c - 1e-15:
            return True
        return None

    def s2_limsup(self):
        return 1.0

    def spec(self):
        if self.variant == "A":
            return f"blockA:{self.k_max}"
        return f"blockB:{self.k_max}:{self.c}"

    # -- reports --------------------------------------------------------------

    def boundary_ratios(self):
        """n l_n / S_n at every block end, computed from the closed forms."""
        out = []
        for b in self.blocks:
            if b.kind == "plateau":
                # N * (ln n / n) / S; group the near-cancelling logs first
                d = b.ln_end - b.ln_n
                out.append(math.exp(d + math.log(b.ln_n) - math.log(b.s_end)))
            else:
                out.append(b.level / b.s_end)  # N * (c/N) / S
        return out

    def schedule_report(self):
        rows = []
        ratios = self.boundary_ratios()
        for b, r in zip(self.blocks, ratios):
            rows.append({
                "kind": b.kind,
                "level_or_c": b.level,
                "ln_block_len": b.ln_n,
                "block_len": b.n,
                "end": b.end,
                "ln_end": b.ln_end,
                "boundary_ratio": r,
                "sum_at_end": b.s_end,
                "sumsq_at_end": b.ell2_end,
                "shepp_log_lower": b.shepp_log_lo,
                "note": b.note,
            })
        return rows


def _harmonic_diff(A: int, B: int, ln_A: float, ln_B: float) -> float:
    """sum over n in (A, B] of 1/n, exact for machine-size ints."""
    if B <= 10 ** 15:
        return float(digamma(float(B) + 1.0) - digamma(float(A) + 1.0))
    # digamma(x) = ln x - 1/(2x) + O(x^-2); corrections below float eps here
    return ln_B - ln_A


def _sq_harmonic_diff(A: int, B: int, ln_A: float, ln_B: float) -> float:
    """sum over n in (A, B] of 1/n^2."""
    if B <= 10 ** 15:
        return float(polygamma(1, float(A) + 1.0) - polygamma(1, float(B) + 1.0))
    return math.exp(-ln_A) - math.exp(-ln_B)


def _capped_harmonic_sum(c: float, lo: int, hi: int) -> float:
    """sum of min(c/n, CAP) over lo..hi, exact via digamma."""
    if hi < lo:
        return 0.0
    k0 = int(c / CAP)  # cap active for n <= k0
    total = 0.0
    if lo <= k0:
        capped_hi = min(hi, k0)
        total += (capped_hi - lo + 1) * CAP
        lo = capped_hi + 1
    if lo <= hi:
        total += c * float(digamma(hi + 1) - digamma(lo))
    return total


def _exact_shepp_log(seq_values: np.ndarray, a: float) -> float:
    S = np.cumsum(seq_values)
    n = np.arange(1, len(seq_values) + 1, dtype=np.float64)
    logterms = a * S - 2.0 * np.log(n)
    return float(np.logaddexp.reduce(logterms))


def block_sequence_A(k_max: int) -> BlockSequence:
    """Plateau-only schedule: level ln(n_k)/n_k, block length n_k."""
    if not 1 <= k_max <= 12:
        raise SequenceSpecError("k_max must be in 1..12")
    blocks = []
    n1 = 2
    lnn = math.log(n1)
    v = lnn / n1
    blocks.append(Block("plateau", v, lnn, lnn, n1, n1,
                        s_end=lnn, ell2_end=lnn * lnn / n1))
    for _ in range(2, k_max + 1):
        prev = blocks[-1]
        target = max(2.0 * prev.ln_n, RATIO_PUSH * prev.s_end)
        if target <= LN_INT_CAP:
            n_k = max(int(math.ceil(math.exp(target))),
                      (prev.n * prev.n) if prev.n is not None else 0)
            lnn = math.log(n_k)
            v = lnn / float(n_k)
        else:
            n_k, lnn = None, target
            v = math.exp(math.log(lnn) - lnn) if lnn < 744.0 + math.log(target) else 0.0
        # monotone plateau levels: ln(x)/x decreasing needs log-space compare
        if math.log(lnn) - lnn > math.log(prev.ln_n) - prev.ln_n + 1e-12:
            raise SequenceSpecError("schedule violates plateau monotonicity")
        end = prev.end + n_k if (prev.end is not None and n_k is not None) else None
        ln_end = _ln_add(prev.ln_end, lnn)
        blocks.append(Block(
            "plateau", v, lnn, ln_end, n_k, end,
            s_end=prev.s_end + lnn,
            ell2_end=prev.ell2_end + math.exp(2.0 * math.log(lnn) - lnn),
        ))
    return BlockSequence(blocks, "A", None, k_max)


def _min_plateau_ln(bound: float, ln_bound: float) -> float:
    """Smallest ln(n) with ln(n)/n <= bound (bound as value, ln_bound = log)."""
    # solve lnn - log(lnn) = -ln_bound by a few fixed-point steps
    x = max(1.0, -ln_bound)
    for _ in range(60):
        x_new = -ln_bound + math.log(max(x, 1.0))
        if abs(x_new - x) < 1e-12:
            x = x_new
            break
        x = x_new
    # nudge upward until the inequality holds in floats
    while x - math.log(x) < -ln_bound:
        x *= 1.0 + 1e-9
    return x


def block_sequence_B(k_max: int, c: float) -> BlockSequence:
    """Alternating c/n stretches (odd blocks) and plateaus (even blocks)."""
    if not 1 <= k_max <= 12:
        raise SequenceSpecError("k_max must be in 1..12")
    if c <= 1.0:
        raise SequenceSpecError("the c/n coefficient must exceed 1")
    a_ref = 1.0 / c
    blocks = []

    # block 1: c/n until the exact series partial at a_ref exceeds 1
    N1 = max(8, int(math.ceil(math.exp(c))) + 1)
    while True:
        vals = np.minimum(c / np.arange(1.0, N1 + 1.0), CAP)
        lg = _exact_shepp_log(vals, a_ref)
        if lg > 0.0 or N1 > 10_000_000:
            break
        N1 *= 2
    s1 = float(np.sum(vals))
    blocks.append(Block("harmonic", c, math.log(N1), math.log(N1), N1, N1,
                        s_end=s1,
                        ell2_end=float(np.sum(vals * vals)),
                        shepp_log_lo=lg))

    for k in range(2, k_max + 1):
        prev = blocks[-1]
        if k % 2 == 0:
            # plateau: level ln(n)/n must not exceed the last c/n value
            if prev.end is not None:
                bound = c / prev.end
                ln_bound = math.log(c) - prev.ln_end
            else:
                bound = math.exp(math.log(c) - prev.ln_end)
                ln_bound = math.log(c) - prev.ln_end
            base_ln = _min_plateau_ln(bound, ln_bound)
            target = max(base_ln, 2.0 * prev.ln_n, c + 0.1)
            note = ""
            if k == 2:
                target = max(target, RATIO_PUSH * prev.s_end)
            if target > base_ln + 1e-9 and base_ln == max(base_ln, 2.0 * prev.ln_n, c + 0.1):
                note = "growth pushed beyond the monotonicity minimum"
            if target <= LN_INT_CAP:
                n_k = int(math.ceil(math.exp(target)))
                lnn = math.log(n_k)
                v = lnn / float(n_k)
                while v > bound:  # clamp: enforce the join monotonicity
                    n_k *= 2
                    lnn = math.log(n_k)
                    v = lnn / float(n_k)
                    note = "clamped upward at the join to stay nonincreasing"
            else:
                n_k, lnn = None, target
                v = math.exp(math.log(lnn) - lnn) if lnn < 700.0 else 0.0
            end = prev.end + n_k if (prev.end is not None and n_k is not None) else None
            ln_end = _ln_add(prev.ln_end, lnn)
            gain_lo = a_ref * (prev.s_end + v) - 2.0 * _ln_add(prev.ln_end, 0.0)
            blocks.append(Block(
                "plateau", v, lnn, ln_end, n_k, end,
                s_end=prev.s_end + lnn,
                ell2_end=prev.ell2_end + math.exp(2.0 * math.log(lnn) - lnn),
                shepp_log_lo=_ln_add(prev.shepp_log_lo, gain_lo),
                note=note,
            ))
        else:
            # c/n stretch: extend until the certified partial exceeds k
            ln_A = prev.ln_end
            s_A = prev.s_end
            have = math.exp(prev.shepp_log_lo) if prev.shepp_log_lo < 700 else math.inf
            need = max(float(k) - min(have, float(k)), 0.0)
            # ln growth floor keeps ln_B representably distinct from ln_A
            floor = max(math.log(2.0), 0.02 * abs(ln_A))
            if have > k:
                ln_ratio = floor  # partial already certified
            else:
                # gain >= e^{a S_A} * ln((B+1)/(A+1)) / (A+1) with a*c = 1
                ln_needed_ratio = math.log(max(need, 1e-300)) + ln_A - a_ref * s_A
                if ln_needed_ratio > 690.0:
                    raise SequenceSpecError(
                        f"blockB schedule leaves float range at block {k}; "
                        f"reduce k_max")
                ln_ratio = max(math.exp(ln_needed_ratio) * 1.05, floor)
            ln_B = ln_A + ln_ratio
            B = int(math.ceil(math.exp(ln_B))) if ln_B <= LN_INT_CAP else None
            A = prev.end
            if B is not None and A is not None:
                ln_B = math.log(B)
                gain_lo = a_ref * s_A - math.log(A + 1.0) + \
                    math.log(math.log((B + 1.0) / (A + 1.0)))
                s_gain = c * _harmonic_diff(A, B, prev.ln_end, ln_B)
                e2_gain = c * c * _sq_harmonic_diff(A, B, prev.ln_end, ln_B)
                n_k, end = B - A, B
                lnn = math.log(n_k)
            else:
                gain_lo = a_ref * s_A - ln_A + math.log(ln_B - ln_A)
                s_gain = c * (ln_B - ln_A)  # lower bound of the true gain
                e2_gain = c * c * math.exp(-ln_A)  # upper bound
                n_k, end = None, None
                lnn = ln_B + math.log1p(-math.exp(min(ln_A - ln_B, -1e-300)))
            new_lo = _ln_add(prev.shepp_log_lo, gain_lo)
            if new_lo <= math.log(k):
                raise SequenceSpecError(
                    f"internal: certified series bound missed its target at block {k}")
            blocks.append(Block(
                "harmonic", c, lnn, ln_B, n_k, end,
                s_end=s_A + s_gain,
                ell2_end=prev.ell2_end + e2_gain,
                shepp_log_lo=new_lo,
            ))
    return BlockSequence(blocks, "B", c, k_max)

"""Decreasing length sequences and the series criteria built on them.

Families are classified analytically (closed forms per family); numeric
partial sums are diagnostics, never the deciding evidence.  Values are
capped just below 1 (CAP) so families like c/n with c >= 1 stay valid
circle-interval lengths; the cap only perturbs a fixed finite prefix and
no classification depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import digamma

from . import _accel

CAP = 1.0 - 2.0 ** -40  # largest admissible interval length
DIRECT_PARTIAL_MAX = 20_000_000

DIVERGES = "diverges"
CONVERGES = "converges"
UNKNOWN = "unknown"


class SequenceSpecError(ValueError):
    pass


class LengthSequence:
    """Base interface: ell(n) evaluation plus analytic classifications."""

    def value(self, n: int) -> float:
        raise NotImplementedError

    def raw_prefix(self, N: int) -> np.ndarray:
        raise NotImplementedError

    def prefix(self, N: int) -> np.ndarray:
        """ell_1..ell_N with the invariants checked: values in (0,1),
        nonincreasing."""
        if N < 1:
            raise ValueError("N must be >= 1")
        ell = self.raw_prefix(N)
        if len(ell) != N:
            raise SequenceSpecError("prefix evaluation underran")
        if np.any(ell <= 0.0) or np.any(ell >= 1.0):
            raise SequenceSpecError("lengths must lie in (0, 1)")
        if np.any(np.diff(ell) > 0.0):
            raise SequenceSpecError("lengths must be nonincreasing")
        return ell

    def partial_sum(self, N: int) -> float:
        if N > DIRECT_PARTIAL_MAX:
            raise ValueError("partial sum beyond direct-evaluation range")
        return float(_accel.kahan_cumsum(self.prefix(N))[-1])

    # classification hooks -------------------------------------------------
    def sum_verdict(self) -> str:
        return UNKNOWN

    def ell2_verdict(self) -> str:
        return UNKNOWN

    def shepp_verdict(self, a: float) -> str:
        return UNKNOWN

    def shepp_all_above(self, m: float) -> Optional[bool]:
        """Does the weighted series diverge for every a > m?  None = unknown."""
        return None

    def s2_limsup(self) -> Optional[float]:
        return None

    def is_constant(self) -> bool:
        return False

    def max_index(self) -> Optional[int]:
        """Largest evaluable n, or None when unbounded."""
        return None

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec()}>"


@dataclass(frozen=True, repr=False)
class Harmonic(LengthSequence):
    """ell_n = c/n (capped below 1)."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise SequenceSpecError("harmonic coefficient must be positive")

    def value(self, n):
        return min(self.c / n, CAP)

    def raw_prefix(self, N):
        return np.minimum(self.c / np.arange(1, N + 1, dtype=np.float64), CAP)

    def partial_sum(self, N):
        k0 = int(self.c / CAP)  # indices where the cap bites
        if N <= k0:
            return CAP * N
        # c*(H_N - H_k0) + k0*CAP, harmonic numbers via digamma
        return float(self.c * (digamma(N + 1) - digamma(k0 + 1)) + k0 * CAP)

    def sum_verdict(self):
        return DIVERGES

    def ell2_verdict(self):
        return CONVERGES

    def shepp_verdict(self, a):
        return DIVERGES if a * self.c >= 1.0 else CONVERGES

    def shepp_all_above(self, m):
        return m * self.c >= 1.0

    def s2_limsup(self):
        return 0.0

    def spec(self):
        return f"harmonic:{self.c}"


@dataclass(frozen=True, repr=False)
class Power(LengthSequence):
    """ell_n = a0 / n^t, t > 0 (capped below 1)."""

    a0: float
    t: float

    def __post_init__(self):
        if self.a0 <= 0 or self.t <= 0:
            raise SequenceSpecError("power family needs a0 > 0, t > 0")

    def value(self, n):
        return min(self.a0 / n ** self.t, CAP)

    def raw_prefix(self, N):
        return np.minimum(self.a0 / np.arange(1, N + 1, dtype=np.float64) ** self.t, CAP)

    def sum_verdict(self):
        return CONVERGES if self.t > 1.0 else DIVERGES

    def ell2_verdict(self):
        return CONVERGES if self.t > 0.5 else DIVERGES

    def shepp_verdict(self, a):
        if self.t > 1.0:
            return CONVERGES  # bounded exponent
        if self.t < 1.0:
            return DIVERGES  # exponent grows like n^(1-t)
        return Harmonic(self.a0).shepp_verdict(a)

    def shepp_all_above(self, m):
        if self.t > 1.0:
            return False
        if self.t < 1.0:
            return True
        return Harmonic(self.a0).shepp_all_above(m)

    def s2_limsup(self):
        if self.t > 1.0:
            return 0.0
        if self.t < 1.0:
            return 1.0 - self.t
        return 0.0

    def spec(self):
        return f"power:{self.a0}:{self.t}"


@dataclass(frozen=True, repr=False)
class Constant(LengthSequence):
    ell: float

    def __post_init__(self):
        if not 0.0 < self.ell < 1.0:
            raise SequenceSpecError("constant length must lie in (0, 1)")

    def value(self, n):
        return self.ell

    def raw_prefix(self, N):
        return np.full(N, self.ell)

    def partial_sum(self, N):
        return self.ell * N

    def sum_verdict(self):
        return DIVERGES

    def ell2_verdict(self):
        return DIVERGES

    def shepp_verdict(self, a):
        return DIVERGES if a > 0 else CONVERGES

    def shepp_all_above(self, m):
        return True

    def s2_limsup(self):
        return 1.0

    def is_constant(self):
        return True

    def spec(self):
        return f"const:{self.ell}"


class LogHarmonic(LengthSequence):
    """ell_n = 2/n - 4/(n ln n) from n = 16 on.

    The formula is positive only for ln n > 2 and nonincreasing only from
    n = 16; the head n < 16 is replaced by a decreasing ramp from 0.99,
    which leaves every series criterion untouched.
    """

    RAMP_START = 0.99
    N0 = 16

    def __init__(self):
        self._tail0 = self._raw(self.N0)

    @staticmethod
    def _raw(n):
        return 2.0 / n - 4.0 / (n * math.log(n))

    def value(self, n):
        if n >= self.N0:
            return self._raw(n)
        return self.RAMP_START + (self._tail0 - self.RAMP_START) * (n - 1) / (self.N0 - 1)

    def raw_prefix(self, N):
        n = np.arange(1, N + 1, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = 2.0 / n - 4.0 / (n * np.log(n))
        ramp = self.RAMP_START + (self._tail0 - self.RAMP_START) * (n - 1) / (self.N0 - 1)
        return np.where(n >= self.N0, tail, ramp)

    def sum_verdict(self):
        return DIVERGES

    def ell2_verdict(self):
        return CONVERGES

    def shepp_verdict(self, a):
        # partial sums are 2 ln n - 4 ln ln n + O(1): the weighted series
        # behaves like sum n^(2a-2) / (ln n)^(4a)
        return DIVERGES if a > 0.5 else CONVERGES

    def shepp_all_above(self, m):
        return m >= 0.5

    def s2_limsup(self):
        return 0.0

    def spec(self):
        return "logharmonic"

    def __repr__(self):
        return f"<LogHarmonic {self.spec()}>"


class Explicit(LengthSequence):
    """A finite table of lengths, optionally continued by a parametric tail."""

    def __init__(self, table: Sequence[float], tail: Optional[LengthSequence] = None):
        arr = np.asarray(table, dtype=np.float64)
        if arr.ndim != 1 or len(arr) == 0:
            raise SequenceSpecError("explicit table must be a nonempty vector")
        self.table = arr
        self.tail = tail
        if tail is not None and len(arr) > 0:
            if tail.value(len(arr) + 1) > arr[-1]:
                raise SequenceSpecError("declared tail jumps above the table")

    def value(self, n):
        if n <= len(self.table):
            return float(self.table[n - 1])
        if self.tail is None:
            raise ValueError(f"explicit sequence has no value at n={n}")
        return self.tail.value(n)

    def raw_prefix(self, N):
        if N <= len(self.table):
            return self.table[:N].copy()
        if self.tail is None:
            raise ValueError(f"explicit sequence has no value beyond n={len(self.table)}")
        tail = self.tail.raw_prefix(N)[len(self.table):]
        return np.concatenate([self.table, tail])

    def sum_verdict(self):
        return self.tail.sum_verdict() if self.tail else UNKNOWN

    def ell2_verdict(self):
        return self.tail.ell2_verdict() if self.tail else UNKNOWN

    def shepp_verdict(self, a):
        return self.tail.shepp_verdict(a) if self.tail else UNKNOWN

    def shepp_all_above(self, m):
        return self.tail.shepp_all_above(m) if self.tail else None

    def s2_limsup(self):
        return self.tail.s2_limsup() if self.tail else None

    def max_index(self):
        return None if self.tail else len(self.table)

    def spec(self):
        return f"explicit[{len(self.table)}]" + (f"+{self.tail.spec()}" if self.tail else "")


# -- series evaluation -------------------------------------------------------

def shepp_log_partials(seq: LengthSequence, a: float, checkpoints: Sequence[int]) -> np.ndarray:
    """log of sum_{n<=N} n^-2 exp(a S_n) at each checkpoint N (log-space)."""
    if a < 0:
        raise ValueError("a must be >= 0")
    cps = sorted(int(c) for c in checkpoints)
    if not cps or cps[0] < 1:
        raise ValueError("checkpoints must be positive")
    N = cps[-1]
    ell = seq.prefix(N)
    S = _accel.kahan_cumsum(ell)
    n = np.arange(1, N + 1, dtype=np.float64)
    logterms = a * S - 2.0 * np.log(n)
    logpartial = np.logaddexp.accumulate(logterms)
    return np.array([logpartial[c - 1] for c in cps])


def shepp_partial(seq: LengthSequence, a: float, N: int) -> float:
    """Partial Shepp sum; +inf when it overflows float range."""
    lg = float(shepp_log_partials(seq, a, [N])[0])
    return math.exp(lg) if lg < 709.0 else math.inf


def shepp_classify(seq: LengthSequence, a: float) -> str:
    if a < 0:
        raise ValueError("a must be >= 0")
    if a == 0:
        return CONVERGES  # sum n^-2
    return seq.shepp_verdict(a)


def ell2_partial(seq: LengthSequence, N: int) -> float:
    ell = seq.prefix(N)
    return float(_accel.kahan_cumsum(ell * ell)[-1])


def ell2_classify(seq: LengthSequence) -> str:
    v = seq.ell2_verdict()
    if v == UNKNOWN:
        raise ValueError("no closed-form square-sum classification for this sequence")
    return v


@dataclass(frozen=True)
class SquareDivergenceWitness:
    """Evidence that sum(l_n^2) = inf forces the weighted series to diverge:
    indices with l_n > n^(-2/3) make the series terms themselves blow up."""

    a: float
    N: int
    witness_indices: tuple
    witness_count: int
    log_terms_at_witnesses: tuple
    conclusion: str


def square_divergence_witness(seq: LengthSequence, a: float, N: int,
                              max_report: int = 16) -> SquareDivergenceWitness:
    ell = seq.prefix(N)
    n = np.arange(1, N + 1, dtype=np.float64)
    mask = ell > n ** (-2.0 / 3.0)
    idx = np.nonzero(mask)[0] + 1
    S = _accel.kahan_cumsum(ell)
    report_idx = idx[np.linspace(0, len(idx) - 1, min(max_report, len(idx))).astype(int)] \
        if len(idx) else np.array([], dtype=np.int64)
    logs = tuple(float(a * S[i - 1] - 2.0 * math.log(i)) for i in report_idx)
    if len(idx):
        concl = ("witness indices found: at such n the partial length sum "
                 "exceeds n^(1/3), so the series terms cannot vanish")
    else:
        concl = "no witness index up to N"
    return SquareDivergenceWitness(a, N, tuple(int(i) for i in report_idx),
                                   int(len(idx)), logs, concl)


def s2_ratio(seq: LengthSequence, n: int) -> float:
    """n l_n / (l_1 + ... + l_n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * seq.value(n) / seq.partial_sum(n)


@dataclass(frozen=True)
class S2Report:
    checkpoints: tuple
    ratios: tuple
    max_ratio: float
    analytic_limsup: Optional[float]


def s2_limsup_estimate(seq: LengthSequence, checkpoints: Sequence[int]) -> S2Report:
    cps = sorted(int(c) for c in checkpoints)
    ratios = tuple(s2_ratio(seq, c) for c in cps)
    return S2Report(tuple(cps), ratios, max(ratios), seq.s2_limsup())


@dataclass(frozen=True)
class SeriesDiagnostics:
    spec: str
    checkpoints: tuple
    sum_partials: tuple
    ell2_partials: tuple
    shepp_log_partials: dict  # a -> tuple of logs
    s2_ratios: tuple
    classifications: dict


def series_diagnostics(seq: LengthSequence, a_values: Sequence[float],
                       checkpoints: Sequence[int]) -> SeriesDiagnostics:
    cps = sorted(int(c) for c in checkpoints)
    N = cps[-1]
    ell = seq.prefix(N)
    S = _accel.kahan_cumsum(ell)
    S2 = _accel.kahan_cumsum(ell * ell)
    shepp = {a: tuple(float(v) for v in shepp_log_partials(seq, a, cps))
             for a in a_values}
    cls = {
        "sum": seq.sum_verdict(),
        "ell2": seq.ell2_verdict(),
        "s2_limsup": seq.s2_limsup(),
        "shepp": {a: shepp_classify(seq, a) for a in a_values},
    }
    return SeriesDiagnostics(
        seq.spec(), tuple(cps),
        tuple(float(S[c - 1]) for c in cps),
        tuple(float(S2[c - 1]) for c in cps),
        shepp,
        tuple(c * seq.value(c) / float(S[c - 1]) for c in cps),
        cls,
    )


def parse_sequence(text: str) -> LengthSequence:
    """CLI spec strings: harmonic:c | power:a:t | const:l | logharmonic |
    blockA:k | blockB:k:c | file:<path>."""
    from .blocks import block_sequence_A, block_sequence_B

    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "harmonic" and len(parts) == 2:
            return Harmonic(float(parts[1]))
        if kind == "power" and len(parts) == 3:
            return Power(float(parts[1]), float(parts[2]))
        if kind == "const" and len(parts) == 2:
            return Constant(float(parts[1]))
        if kind == "logharmonic" and len(parts) == 1:
            return LogHarmonic()
        if kind == "blockA" and len(parts) == 2:
            return block_sequence_A(int(parts[1]))
        if kind == "blockB" and len(parts) == 3:
            return block_sequence_B(int(parts[1]), float(parts[2]))
        if kind == "file" and len(parts) >= 2:
            path = text.split(":", 1)[1]
            with open(path) as fh:
                table = [float(line) for line in fh if line.strip()]
            return Explicit(table)
    except SequenceSpecError:
        raise
    except ValueError as exc:
        raise SequenceSpecError(f"bad sequence spec {text!r}: {exc}") from exc
    raise SequenceSpecError(f"unknown sequence spec {text!r}")

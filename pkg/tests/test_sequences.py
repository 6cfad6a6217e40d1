import math

import mpmath
import numpy as np
import pytest

from circlecover.sequences import (CAP, CONVERGES, DIVERGES, UNKNOWN,
                                   Constant, Explicit, Harmonic, LogHarmonic,
                                   Power, SequenceSpecError, ell2_classify,
                                   ell2_partial, parse_sequence, s2_ratio,
                                   s2_limsup_estimate, series_diagnostics,
                                   shepp_classify, shepp_log_partials,
                                   shepp_partial, square_divergence_witness)


def test_family_values():
    assert Harmonic(0.5).value(4) == 0.125
    assert Constant(0.3).value(10 ** 6) == 0.3
    assert Harmonic(2.0).value(1) == CAP  # capped just below 1
    lh = LogHarmonic()
    n = 100
    assert lh.value(n) == pytest.approx(2 / n - 4 / (n * math.log(n)))
    assert lh.value(8) > 0  # positive once ln n > 2


def test_prefix_monotone_and_in_range():
    for seq in (Harmonic(0.5), Harmonic(2.2), Power(1.0, 1.5), Constant(0.3),
                LogHarmonic(), Power(0.7, 0.4)):
        ell = seq.prefix(5000)
        assert np.all(ell > 0) and np.all(ell < 1)
        assert np.all(np.diff(ell) <= 0)


def test_construction_errors():
    with pytest.raises(SequenceSpecError):
        Constant(1.2)
    with pytest.raises(SequenceSpecError):
        Harmonic(-1.0)
    with pytest.raises(SequenceSpecError):
        Power(1.0, -0.5)
    with pytest.raises(SequenceSpecError):
        Explicit([])
    with pytest.raises(SequenceSpecError):
        Explicit([0.01], tail=Constant(0.5))  # tail jumps above the table


def test_shepp_partial_a0_is_basel_partial():
    # direct-summation oracle
    expect = sum(1.0 / n ** 2 for n in range(1, 11))
    assert shepp_partial(Harmonic(1.0), 0.0, 10) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(1.5497677311665408)


@pytest.mark.parametrize("seq,a", [
    (Harmonic(0.75), 1.0),
    (Harmonic(2.0), 0.5),
    (LogHarmonic(), 0.5),
    (Constant(0.3), 0.7),
    (Power(1.0, 1.5), 2.0),
])
def test_shepp_log_partial_matches_mpmath(seq, a):
    N = 1000
    ell = seq.prefix(N)
    with mpmath.workdps(60):
        S = mpmath.mpf(0)
        total = mpmath.mpf(0)
        for n in range(1, N + 1):
            S += mpmath.mpf(ell[n - 1])
            total += mpmath.exp(a * S) / (n * n)
        expect = float(mpmath.log(total))
    got = float(shepp_log_partials(seq, a, [N])[0])
    assert got == pytest.approx(expect, rel=1e-9, abs=1e-9)


def test_shepp_classification_table():
    # the six documented (family, a) verdicts
    assert shepp_classify(Harmonic(0.75), 1.0) == CONVERGES
    assert shepp_classify(Harmonic(2.0), 0.5) == DIVERGES
    assert shepp_classify(LogHarmonic(), 0.5) == CONVERGES
    assert shepp_classify(LogHarmonic(), 0.6) == DIVERGES
    assert shepp_classify(Constant(0.3), 0.01) == DIVERGES
    assert shepp_classify(Power(1.0, 2.0), 1.0) == CONVERGES
    # boundary case ac = 1 diverges
    assert shepp_classify(Harmonic(1.0), 1.0) == DIVERGES
    assert shepp_classify(Explicit([0.5, 0.4]), 1.0) == UNKNOWN


def _tail_bound(seq, a, N):
    """Closed-form tail bound for sum_{n>N} n^-2 exp(a S_n), valid for the
    convergent parameter ranges of each family."""
    S_N = seq.partial_sum(N)
    if isinstance(seq, Harmonic) or isinstance(seq, LogHarmonic):
        # l_n <= c/n beyond N (c = 2 for the log-harmonic family), so
        # S_n <= S_N + c ln(n/N) + c/N
        c = seq.c if isinstance(seq, Harmonic) else 2.0
        ac = a * c
        assert ac < 1.0
        return math.exp(a * S_N + ac / N) * N ** (-ac) * \
            (N + 1) ** (ac - 1.0) / (1.0 - ac) * (N + 1) / N
    if isinstance(seq, Power) and seq.t > 1.0:
        k0 = int(seq.a0 / CAP)
        s_inf = k0 * CAP + seq.a0 * float(mpmath.zeta(seq.t))
        return math.exp(a * s_inf) / N
    raise NotImplementedError


@pytest.mark.parametrize("seq,a,delta", [
    (Harmonic(2.0), 0.5, 0.05),    # ac = 1: partials grow like log
    (Harmonic(1.5), 1.0, 0.5),     # ac > 1: power growth
    (Constant(0.3), 0.5, 10.0),
    (LogHarmonic(), 0.6, 0.05),    # n^0.2 / ln^2.4 n: very slow growth
])
def test_divergent_classifications_show_growth(seq, a, delta):
    logs = shepp_log_partials(seq, a, [10 ** 3, 10 ** 4, 10 ** 5])
    assert logs[0] < logs[1] < logs[2]
    assert math.exp(min(logs[2] - logs[1], 50)) > 1 + delta


@pytest.mark.parametrize("seq,a", [
    (Harmonic(0.75), 1.0),
    (Harmonic(1.9), 0.5),
    (LogHarmonic(), 0.45),
    (Power(1.0, 2.0), 1.0),
])
def test_convergent_classifications_dominated_by_tail_bound(seq, a):
    lo, hi = shepp_log_partials(seq, a, [10 ** 4, 10 ** 5])
    observed_tail = math.exp(hi) - math.exp(lo)
    assert observed_tail <= _tail_bound(seq, a, 10 ** 4) * (1 + 1e-9)


def test_ell2_classification_and_partials():
    assert ell2_classify(Constant(0.3)) == DIVERGES
    assert ell2_classify(Harmonic(3.0)) == CONVERGES
    assert ell2_classify(Power(1.0, 0.4)) == DIVERGES
    assert ell2_classify(LogHarmonic()) == CONVERGES
    with pytest.raises(ValueError):
        ell2_classify(Explicit([0.5]))
    got = ell2_partial(Constant(0.3), 100)
    assert got == pytest.approx(100 * 0.09, rel=1e-12)


def test_square_divergence_forces_series_divergence():
    # whenever sum(l_n^2) diverges, the weighted series diverges for all a
    for seq in (Constant(0.3), Power(0.7, 0.4)):
        assert ell2_classify(seq) == DIVERGES
        for a in (0.01, 0.1, 1.0):
            assert shepp_classify(seq, a) == DIVERGES
        wit = square_divergence_witness(seq, 0.01, 2000)
        assert wit.witness_count > 0
        # at a = 1 the witness indices already make the terms blow up,
        # since the length partial sums there exceed n^(1/3)
        wit1 = square_divergence_witness(seq, 1.0, 2000)
        assert wit1.log_terms_at_witnesses[-1] > 0


def test_witness_absent_for_square_summable():
    wit = square_divergence_witness(Harmonic(0.5), 1.0, 2000)
    assert wit.witness_count == 0


def test_s2_ratio_values():
    # harmonic: ratio = 1/H_n; oracle by direct summation
    H = sum(1.0 / n for n in range(1, 10 ** 4 + 1))
    assert s2_ratio(Harmonic(0.5), 10 ** 4) == pytest.approx(1.0 / H, rel=1e-9)
    assert s2_ratio(Harmonic(0.5), 10 ** 4) == pytest.approx(0.1021, abs=2e-4)
    for n in (1, 7, 1000):
        assert s2_ratio(Constant(0.42), n) == pytest.approx(1.0, rel=1e-12)


def test_s2_limsup_estimates():
    rep = s2_limsup_estimate(Harmonic(1.0), [10, 100, 1000])
    assert rep.analytic_limsup == 0.0
    assert rep.max_ratio < 0.5
    rep2 = s2_limsup_estimate(Constant(0.2), [10, 100])
    assert rep2.analytic_limsup == 1.0
    assert rep2.max_ratio == pytest.approx(1.0)
    assert s2_limsup_estimate(Power(1.0, 0.25), [10]).analytic_limsup == 0.75


def test_explicit_with_tail_and_file(tmp_path):
    seq = Explicit([0.9, 0.8, 0.7], tail=Harmonic(2.0))
    assert seq.value(2) == 0.8
    assert seq.value(10) == 0.2
    assert seq.sum_verdict() == DIVERGES
    bare = Explicit([0.5, 0.4])
    with pytest.raises(ValueError):
        bare.value(3)
    p = tmp_path / "lens.txt"
    p.write_text("0.5\n0.25\n0.125\n")
    parsed = parse_sequence(f"file:{p}")
    assert list(parsed.prefix(3)) == [0.5, 0.25, 0.125]


def test_parse_sequence_specs():
    assert parse_sequence("harmonic:0.8").spec() == "harmonic:0.8"
    assert parse_sequence("power:1.0:1.5").spec() == "power:1.0:1.5"
    assert parse_sequence("const:0.3").spec() == "const:0.3"
    assert parse_sequence("logharmonic").spec() == "logharmonic"
    assert parse_sequence("blockA:2").spec() == "blockA:2"
    assert parse_sequence("blockB:2:2.0").spec() == "blockB:2:2.0"
    with pytest.raises(SequenceSpecError):
        parse_sequence("harmonic:x")
    with pytest.raises(SequenceSpecError):
        parse_sequence("nosuch:1")


def test_series_diagnostics_bundle():
    diag = series_diagnostics(Harmonic(1.0), [0.5, 1.0], [100, 1000])
    assert diag.checkpoints == (100, 1000)
    assert diag.classifications["shepp"][1.0] == DIVERGES
    assert diag.classifications["shepp"][0.5] == CONVERGES
    assert diag.sum_partials[0] < diag.sum_partials[1]
    assert all(r > 0 for r in diag.s2_ratios)

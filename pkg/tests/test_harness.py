import json
import math

import numpy as np
import pytest

from circlecover.arcset import ArcSet
from circlecover.density import PiecewisePolyDensity
from circlecover.harness import (SweepResult, block_report,
                                 criteria_independence, criteria_report,
                                 emit, fit_decay_exponent,
                                 phase_transition_sweep, read_jsonl,
                                 VERDICT_COVERED, VERDICT_NOT_COVERED,
                                 VERDICT_UNMET)
from circlecover.sequences import (Explicit, Harmonic, LogHarmonic, Power,
                                   parse_sequence)


def test_fit_decay_exponent_recovers_power_law():
    ns = [10, 100, 1000, 10000]
    vals = [3.0 * n ** -0.62 for n in ns]
    slope, err, _ = fit_decay_exponent(ns, vals)
    assert slope == pytest.approx(-0.62, abs=1e-9)
    assert err < 1e-9


def test_phase_transition_sweep_uniform(uniform):
    res = phase_transition_sweep(uniform, [0.5], [100, 316, 1000, 3162, 10000],
                                 trials=64, seed=3)
    fit = res.fits[0]
    assert fit["slope"] == pytest.approx(-0.5, abs=0.05)
    for cell in res.cells:
        assert abs(cell["mc_mean"] - cell["exact"]) <= \
            3.5 * cell["mc_stderr"] + 1e-9
    rows = res.rows()
    assert list(rows[0]) == list(SweepResult.COLUMNS)


def test_criteria_golden_verdicts():
    # composed by hand from the underlying classifications
    golden = {
        ("uniform", "harmonic:2.5"): VERDICT_COVERED,
        ("uniform", "harmonic:0.9"): VERDICT_NOT_COVERED,
        # ess inf 1 > 1/2, so the weighted series diverges at and above 1
        ("uniform", "logharmonic"): VERDICT_COVERED,
        ("uniform", "power:1.0:2.0"): VERDICT_NOT_COVERED,
        ("tent", "harmonic:0.75"): VERDICT_NOT_COVERED,
        ("tent", "harmonic:1.4"): VERDICT_COVERED,
        ("tent", "power:1.0:2.0"): VERDICT_NOT_COVERED,
        ("step:0.5:1.5:0.5", "harmonic:2.5"): VERDICT_COVERED,
        ("step:0.5:1.5:0.5", "harmonic:1.9"): VERDICT_NOT_COVERED,
        ("step:0.5:1.5:0.5", "logharmonic"): VERDICT_NOT_COVERED,
        ("fatcantor:2", "harmonic:4.0"): VERDICT_COVERED,
        ("fatcantor:2", "power:1.0:2.0"): VERDICT_NOT_COVERED,
    }
    for (dspec, sspec), want in golden.items():
        rep = criteria_report(PiecewisePolyDensity.parse(dspec),
                              parse_sequence(sspec))
        assert rep.verdict == want, (dspec, sspec, rep.verdict, want)


def test_criteria_uniform_logharmonic_details():
    # essential infimum 1 > 1/2: the series condition holds for a > 1/2,
    # and the capacity side (at a = 1) diverges too -> covered
    rep = criteria_report(PiecewisePolyDensity.uniform(), LogHarmonic())
    assert rep.subverdicts["series_condition"] == "yes"
    assert rep.subverdicts["capacity_condition"] == "yes"
    assert rep.verdict == VERDICT_COVERED


def test_criteria_inconclusive_for_unclassified_sequence():
    seq = Explicit([0.5, 0.4, 0.3])
    rep = criteria_report(PiecewisePolyDensity.step(), seq)
    assert rep.verdict == "inconclusive"


def test_criteria_tent_capacity_only_demo():
    out = criteria_independence("tent-capacity-only")
    rep = out["criteria"]
    assert rep["min_set"] == [[0.0, 0.0]]
    assert rep["ess_inf"] == pytest.approx(0.75)
    assert rep["verdict"] == VERDICT_NOT_COVERED
    # the point-capacity condition holds (sum of lengths diverges): the
    # length-sum partials grow without bound while the a=1 series is tight
    sums = out["length_sum_partials"]
    assert sums[-1] > sums[0] + 1.5
    logs = out["shepp_log_partials"]["1.0"]
    assert math.exp(logs[-1]) - math.exp(logs[0]) < 1.0


def test_criteria_step_series_only_demo():
    out = criteria_independence("step-series-only")
    rep = out["criteria"]
    assert rep["min_set"] == [[0.0, 0.5]]
    assert rep["subverdicts"]["series_condition"] == "yes"
    assert rep["subverdicts"]["capacity_condition"] == "no"
    assert rep["verdict"] == VERDICT_NOT_COVERED
    # a = 0.6 partials grow, a = 0.5 partials are tail-bounded
    grow = out["shepp_log_partials"]["0.6"]
    flat = out["shepp_log_partials"]["0.5"]
    assert grow[-1] - grow[0] > 2 * (flat[-1] - flat[0])
    with pytest.raises(ValueError):
        criteria_independence("nosuch")


def test_criteria_hypotheses_unmet_for_zero_infimum_interval():
    f = PiecewisePolyDensity.from_pieces(
        [(0.0, 0.5, [0.0]), (0.5, 1.0, [2.0])], name="vanishing")
    rep = criteria_report(f, Power(1.0, 2.0))
    assert rep.ess_inf == 0.0
    assert rep.verdict == VERDICT_UNMET


def test_criteria_zero_infimum_point_cases(tent):
    # f touching zero at one point with summable lengths: not covered
    f = PiecewisePolyDensity.from_pieces(
        [(0.0, 0.5, [0.0, 4.0]), (0.5, 1.0, [2.0, -4.0])], name="zero-tent")
    assert f.ess_inf() == 0.0
    rep = criteria_report(f, Power(1.0, 2.0))
    assert rep.verdict == VERDICT_NOT_COVERED
    rep2 = criteria_report(f, Power(0.9, 0.4))  # square sum diverges
    assert rep2.subverdicts["ball_mass_series"] == ["diverges"]
    assert rep2.verdict == VERDICT_COVERED


def test_block_report_contents():
    out = block_report(3, 2.0)
    A = out["ratio_condition_fails"]
    assert A["analytic_limsup"] == 1.0
    assert max(A["boundary_ratios"]) >= 0.9
    assert A["sumsq_bound"] < 1.0
    B = out["series_without_ratio_condition"]
    assert B["series_verdict_at_1_over_c"] == "diverges"
    assert B["certified_series_log_lower"] > math.log(3)
    assert max(B["boundary_ratios"]) > 0.9


def test_emit_csv_and_jsonl_round_trip(tmp_path, uniform):
    res = phase_transition_sweep(uniform, [0.5], [10, 100], trials=4, seed=0)
    csv_path = tmp_path / "sweep.csv"
    emit(res, "csv", str(csv_path))
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == ",".join(SweepResult.COLUMNS)
    assert len(lines) == 3  # header + 2 cells
    json_path = tmp_path / "sweep.jsonl"
    emit(res, "jsonl", str(json_path))
    back = read_jsonl(str(json_path))
    assert len(back) == 1 and back[0]["cells"] == list(res.record()["cells"])


def test_emit_empty_sweep_header_only(tmp_path):
    empty = SweepResult("uniform", "full", 0, 0, (), ())
    p = tmp_path / "empty.csv"
    emit(empty, "csv", str(p))
    assert p.read_text().strip() == ",".join(SweepResult.COLUMNS)


def test_emit_single_cell_records_seed_range(tmp_path, uniform):
    res = phase_transition_sweep(uniform, [0.3], [50], trials=8, seed=5)
    p = tmp_path / "one.csv"
    emit(res, "csv", str(p))
    lines = p.read_text().strip().split("\n")
    assert len(lines) == 2
    row = dict(zip(SweepResult.COLUMNS, lines[1].split(",")))
    assert row["seed_lo"] == "0" and row["seed_hi"] == "7"


def test_emit_rejects_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit({}, "xml", str(tmp_path / "x"))

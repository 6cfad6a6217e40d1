import json
import math

import numpy as np
import pytest

from circlecover import rng
from circlecover._accel import numpy_impl
import circlecover._accel as accel
from circlecover.arcset import ArcSet
from circlecover.capacity import SupportMeasure
from circlecover.coversim import (ResolutionError, TrialConfig,
                                  billard_moments, expected_uncovered_exact,
                                  log_checkpoints, point_cover_prob,
                                  run_trial, run_trials, survival_logs)
from circlecover.density import PiecewisePolyDensity
from circlecover.sequences import Constant, Harmonic, Power


HALF = ArcSet.from_arcs([(0.0, 0.5)])


def test_log_checkpoints_shape():
    cps = log_checkpoints(1000, 4)
    assert cps[0] == 1 and cps[-1] == 1000
    assert all(a < b for a, b in zip(cps, cps[1:]))


def test_zero_step_budget(uniform):
    r = run_trial(TrialConfig(uniform, Harmonic(0.5), 0, HALF, seed=1,
                              checkpoints=()))
    assert r.cover_time is None
    r2 = run_trial(TrialConfig(uniform, Harmonic(0.5), 0, ArcSet.empty(),
                               seed=1))
    assert r2.cover_time == 0


def test_trajectory_monotone_and_consistent(uniform, step):
    for f, target in ((uniform, "full"), (step, HALF)):
        r = run_trial(TrialConfig(f, Harmonic(0.9), 5000, target, seed=3,
                                  checkpoints=(1, 10, 100, 1000, 5000)))
        assert all(a >= b for a, b in zip(r.uncovered, r.uncovered[1:]))
        if r.cover_time is not None:
            assert r.uncovered[-1] == 0.0
            for cp, u in zip(r.checkpoints, r.uncovered):
                assert (u == 0.0) == (cp >= r.cover_time)
        else:
            assert r.uncovered[-1] > 0.0


def test_determinism_bit_for_bit(uniform):
    cfg = TrialConfig(uniform, Harmonic(0.6), 2000, "full", seed=9,
                      checkpoints=(10, 100, 2000))
    a, b = run_trial(cfg), run_trial(cfg)
    assert a == b


def test_parallel_reproduces_serial(uniform):
    cfg = TrialConfig(uniform, Harmonic(0.6), 1000, "full", seed=4,
                      checkpoints=(10, 1000))
    serial = run_trials(cfg, 12, threads=1)
    parallel = run_trials(cfg, 12, threads=8)
    assert serial == parallel


def test_draws_independent_of_horizon(uniform):
    # counter-based streams: extending the horizon preserves the prefix
    short = run_trial(TrialConfig(uniform, Harmonic(0.6), 1000, "full",
                                  seed=11, checkpoints=(10, 100, 1000)))
    longr = run_trial(TrialConfig(uniform, Harmonic(0.6), 4000, "full",
                                  seed=11, checkpoints=(10, 100, 1000, 4000)))
    assert short.uncovered == longr.uncovered[:3]


def test_numba_and_numpy_paths_agree(step):
    cfg = TrialConfig(step, Harmonic(0.9), 1500, HALF, seed=5,
                      checkpoints=(10, 100, 1500))
    r_fast = run_trial(cfg)
    saved = accel.cover_trajectory
    accel.cover_trajectory = numpy_impl.cover_trajectory
    try:
        r_ref = run_trial(cfg)
    finally:
        accel.cover_trajectory = saved
    assert r_fast == r_ref


def test_point_target_survival_matches_closed_form(uniform):
    # P(x uncovered after N) = prod (1 - l_n) for the uniform density
    seq, N, T = Harmonic(0.5), 200, 10_000
    x = 0.37
    alive = 0
    for i in range(T):
        r = run_trial(TrialConfig(uniform, seq, N, [x], seed=77, trial=i))
        alive += r.point_hits[0] == 0
    p_exact = math.exp(float(survival_logs(uniform, seq, x, [N])[0]))
    ell = seq.prefix(N)
    assert p_exact == pytest.approx(float(np.exp(np.sum(np.log1p(-ell)))), rel=1e-12)
    se = math.sqrt(p_exact * (1 - p_exact) / T)
    assert abs(alive / T - p_exact) <= 3 * se
    assert point_cover_prob(uniform, seq, x, N) == pytest.approx(1 - p_exact, rel=1e-9)


def test_expected_uncovered_uniform_product(uniform):
    got = expected_uncovered_exact(uniform, Harmonic(0.5), [4], "full")
    assert got[0] == pytest.approx(0.2734375, rel=1e-9)
    # translation invariance: any point's survival equals the mean
    got2 = expected_uncovered_exact(uniform, Harmonic(0.5), [10, 100], "full")
    prods = np.exp(survival_logs(uniform, Harmonic(0.5), 0.123, [10, 100]))
    assert np.allclose(got2, prods, rtol=1e-9)


def test_expected_uncovered_quadrature_vs_mc(step):
    seq = Harmonic(1.0)
    cps = (100, 1000)
    exact = expected_uncovered_exact(step, seq, cps, HALF)
    rs = run_trials(TrialConfig(step, seq, 1000, HALF, seed=13,
                                checkpoints=cps), 400)
    mc = np.array([r.uncovered for r in rs])
    for j in range(len(cps)):
        se = mc[:, j].std(ddof=1) / math.sqrt(len(rs))
        assert abs(mc[:, j].mean() - exact[j]) <= 3 * se


def test_expected_uncovered_resolution_refusal(step):
    with pytest.raises(ResolutionError):
        expected_uncovered_exact(step, Harmonic(1.0), [1000], HALF,
                                 resolution=4, rtol=1e-12)


def test_expected_uncovered_rejects_point_targets(uniform):
    with pytest.raises(ValueError):
        expected_uncovered_exact(uniform, Harmonic(0.5), [10], [0.3])


def test_billard_martingale_mean_is_one(uniform):
    sigma = SupportMeasure.atoms(np.linspace(0.05, 0.95, 12))
    est = billard_moments(uniform, Harmonic(0.5), sigma, 400, 3000, seed=5)
    assert abs(est.mean - 1.0) <= 3 * est.mean_stderr
    assert est.second_moment < 25.0  # bounded second moment regime


def test_billard_atom_second_moment_closed_form(uniform):
    seq = Harmonic(0.5)
    N = 150
    sigma = SupportMeasure.atoms([0.4])
    est = billard_moments(uniform, seq, sigma, N, 6000, seed=6)
    closed = math.exp(-float(survival_logs(uniform, seq, 0.4, [N])[0]))
    # E[M^2] = P(alive) / P(alive)^2 = prod 1/(1 - l_n)
    ell = seq.prefix(N)
    assert closed == pytest.approx(float(np.prod(1.0 / (1.0 - ell))), rel=1e-9)
    assert abs(est.second_moment - closed) <= 3 * est.second_stderr


def test_billard_requires_square_summable(uniform):
    sigma = SupportMeasure.atoms([0.5])
    with pytest.raises(ValueError):
        billard_moments(uniform, Constant(0.3), sigma, 100, 10, seed=1)


def test_trial_record_schema(uniform):
    r = run_trial(TrialConfig(uniform, Harmonic(2.0), 500, "full", seed=21,
                              checkpoints=(10, 500)))
    rec = r.to_record()
    assert list(rec.keys()) == ["seed", "cover_time", "trajectory"]
    assert json.dumps(rec)  # json-serializable
    assert rec["trajectory"][0]["n"] == 10


def test_mean_uncovered_tracks_oracle_for_canonical_configs(uniform, tent, step):
    # five canonical configs, 3 sigma agreement
    configs = [
        (uniform, Harmonic(0.5), "full"),
        (uniform, Harmonic(0.8), "full"),
        (step, Harmonic(1.0), HALF),
        (tent, Harmonic(0.7), "full"),
        (step, Power(0.9, 1.2), HALF),
    ]
    for f, seq, target in configs:
        cps = (50, 400)
        exact = expected_uncovered_exact(f, seq, cps, target)
        rs = run_trials(TrialConfig(f, seq, 400, target, seed=31,
                                    checkpoints=cps), 300)
        mc = np.array([r.uncovered for r in rs])
        for j in range(len(cps)):
            se = mc[:, j].std(ddof=1) / math.sqrt(len(rs)) + 1e-12
            assert abs(mc[:, j].mean() - exact[j]) <= 3.5 * se

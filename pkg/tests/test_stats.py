import math

import numpy as np
import pytest

from mfadvlab import dataio, nets, stats, theory
from conftest import WORKERS, small_config


def tiny_plan(**kw):
    base = dict(replicates=40, base_seed=3,
                config=small_config(d=12, K=2, L=2, N=48, sigma_w2=2.0, sigma_b2=0.01),
                inputs=[dataio.normalize_sqrt_d(np.arange(1.0, 13.0))],
                slope_entries=[(0, 0)], offset_entries=[0])
    base.update(kw)
    return stats.MCPlan(**base)


def test_plan_validation():
    with pytest.raises(ValueError):
        tiny_plan(replicates=1)
    with pytest.raises(ValueError):
        tiny_plan(slope_entries=[(5, 0)])
    with pytest.raises(ValueError):
        tiny_plan(offset_entries=[2])


def test_column_labels():
    plan = tiny_plan(slope_entries=[(0, 0), (1, 3)], offset_entries=[1])
    assert plan.column_labels() == ["J[0,0]@x0", "J[1,3]@x0", "a[1]@x0"]


def test_sample_entries_deterministic_and_parallel_equal():
    plan = tiny_plan()
    a = stats.sample_entries(plan, workers=1)
    b = stats.sample_entries(plan, workers=WORKERS)
    assert a.shape == (40, 2)
    np.testing.assert_array_equal(a, b)


def test_sample_entries_matches_direct_extraction():
    plan = tiny_plan()
    S = stats.sample_entries(plan)
    net = nets.sample_network(plan.config, stats.replicate_seed(plan.base_seed, 7))
    reg = nets.extract_linear_region(net, plan.inputs[0])
    assert S[7, 0] == reg.J[0, 0]
    assert S[7, 1] == reg.a[0]


def test_degenerate_identical_replicates():
    # the same network seed in every row gives identical rows
    plan = tiny_plan()
    net = nets.sample_network(plan.config, 5)
    reg = nets.extract_linear_region(net, plan.inputs[0])
    rows = np.tile([reg.J[0, 0], reg.a[0]], (2, 1))
    assert np.array_equal(rows[0], rows[1])


# -------------------------------------------------------------------- KS test

def test_ks_calibration_gaussian_passes():
    rng = np.random.default_rng(0)
    rep = stats.ks_test(rng.standard_normal(10_000) * 2.0 + 0.5, 0.5, 4.0)
    assert rep.passed


def test_ks_uniform_fails():
    rng = np.random.default_rng(1)
    rep = stats.ks_test(rng.uniform(-1, 1, 5000), 0.0, 1.0)
    assert not rep.passed


def test_ks_threshold_value():
    rng = np.random.default_rng(2)
    rep = stats.ks_test(rng.standard_normal(400), 0.0, 1.0)
    assert rep.ks_threshold_at_0_01 == pytest.approx(1.628 / 20.0)
    assert rep.passed == (rep.ks_statistic < rep.ks_threshold_at_0_01)


def test_ks_rejects_degenerate():
    with pytest.raises(ValueError):
        stats.ks_test(np.ones(100), 0.0, 1.0)
    with pytest.raises(ValueError):
        stats.ks_test(np.arange(10.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        stats.ks_test(np.arange(100.0), 0.0, 0.0)


def test_ks_statistic_hand_value():
    # two points at the standard normal median: D = |Phi(0) - 0| = 0.5
    assert stats.ks_statistic(np.array([0.0, 0.0]), 0.0, 1.0) == pytest.approx(0.5)


def test_ks_two_sample():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(2000)
    b = rng.standard_normal(2000)
    d, thr = stats.ks_two_sample(a, b)
    assert d < thr
    c = rng.standard_normal(2000) + 1.0
    d2, thr2 = stats.ks_two_sample(a, c)
    assert d2 > thr2
    assert thr == pytest.approx(1.628 * math.sqrt(2 / 2000))


# ---------------------------------------------------------------- correlation

def test_correlation_identical_and_errors():
    v = np.arange(10.0)
    assert stats.correlation(v, v) == pytest.approx(1.0)
    assert stats.correlation(v, -v) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        stats.correlation(v, np.ones(10))
    with pytest.raises(ValueError):
        stats.correlation(v, np.arange(9.0))


def test_correlation_of_scaled_inputs_decays_with_distance():
    # slope entries at x and c*x correlate more for c near 1; the bias term
    # is what makes positive rescaling move activation boundaries at all
    cfg = small_config(d=10, K=1, L=3, N=96, sigma_w2=2.0, sigma_b2=0.01)
    x = dataio.normalize_sqrt_d(np.random.default_rng(0).standard_normal(10))
    plan = stats.MCPlan(replicates=250, base_seed=17, config=cfg,
                        inputs=[x, 0.999 * x, 0.5 * x], slope_entries=[(0, 0)],
                        offset_entries=[])
    S = stats.sample_entries(plan, workers=WORKERS)
    near = stats.correlation(S[:, 0], S[:, 1])
    far = stats.correlation(S[:, 0], S[:, 2])
    assert near > far


# ------------------------------------------------------------- max-abs bound

def test_max_abs_gaussian_small_n_loose():
    frac = stats.max_abs_gaussian_check(2, 1.0, trials=400, seed=1)
    assert frac > 0.1


def test_max_abs_gaussian_zero_variance():
    assert stats.max_abs_gaussian_check(10, 0.0, trials=100) == 0.0


def test_max_abs_gaussian_scale_invariant():
    a = stats.max_abs_gaussian_check(100, 1.0, trials=300, seed=5)
    b = stats.max_abs_gaussian_check(100, 25.0, trials=300, seed=5)
    assert a == b


def test_max_abs_gaussian_validation():
    with pytest.raises(ValueError):
        stats.max_abs_gaussian_check(1, 1.0, trials=100)
    with pytest.raises(ValueError):
        stats.max_abs_gaussian_check(10, 1.0, trials=10)


# -------------------------------------------------- heavier distribution law

@pytest.mark.slow
def test_width_sweep_ks_trend():
    # the Gaussian fit improves with width: KS statistic nonincreasing over
    # the width ladder, one noise inversion allowed
    x = dataio.normalize_sqrt_d(np.random.default_rng(4).standard_normal(50))
    ks = []
    for N in (10, 100, 1000, 5000):
        cfg = nets.NetworkConfig(d=50, K=1, L=2, N=N, sigma_w2=2.0, sigma_b2=0.01)
        plan = stats.MCPlan(replicates=200, base_seed=29, config=cfg, inputs=[x],
                            slope_entries=[(0, 0)], offset_entries=[])
        S = stats.sample_entries(plan, workers=WORKERS)
        tp = theory.from_config(cfg)
        ks.append(stats.ks_statistic(S[:, 0], 0.0, tp.omega ** tp.L / tp.d))
    inversions = sum(1 for i in range(3) if ks[i + 1] > ks[i] + 1e-12)
    assert inversions <= 1
    assert ks[-1] < ks[0]


@pytest.mark.slow
def test_spectral_norm_rarely_exceeds_mp_edge():
    # fraction of replicates beyond 1.05x the (1 + sqrt(K/d)) omega^(L/2)
    # edge stays under 5%
    from mfadvlab.attack import operator_norm
    cfg = nets.NetworkConfig(d=500, K=100, L=2, N=4000, sigma_w2=2.0, sigma_b2=0.01)
    tp = theory.from_config(cfg)
    edge = (1 + math.sqrt(cfg.K / cfg.d)) * tp.omega ** (cfg.L / 2)
    x = dataio.normalize_sqrt_d(np.random.default_rng(5).standard_normal(cfg.d))
    exceed = 0
    reps = 40
    for r in range(reps):
        net = nets.sample_network(cfg, stats.replicate_seed(31, r))
        J = nets.extract_linear_region(net, x).J
        exceed += operator_norm(J, (2, 2)) > 1.05 * edge
    assert exceed / reps < 0.05

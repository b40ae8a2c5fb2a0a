import math

import numpy as np
import pytest

from mfadvlab import dataio, nets, theory, train
from mfadvlab.attack import AttackSpec
from mfadvlab.theory import INF
from conftest import small_config


@pytest.fixture(scope="module")
def tiny_data():
    ds = dataio.make_synthetic(n=240, side=4, classes=3, seed=1)
    return ds.images, ds.labels


def tiny_net(seed=2, **kw):
    base = dict(d=16, K=3, L=3, N=20, sigma_w2=2.0, sigma_b2=0.01, u=1.0, v=0.0)
    base.update(kw)
    return nets.sample_network(small_config(**base), seed)


# ------------------------------------------------------------------ gradients

def test_grad_standard_output_layer_closed_form():
    net = tiny_net()
    X = np.random.default_rng(0).standard_normal((4, 16))
    y = np.array([0, 1, 2, 0])
    cache = nets.forward_batch(net, X)
    probs = train.softmax(cache.out)
    grads, acc, loss = train.grad_standard(net, X, y, cache)
    dlogits = probs.copy()
    dlogits[np.arange(4), y] -= 1.0
    dlogits /= 4
    oracle, _ = nets.backprop_batch(net, X, dlogits, cache=cache)
    for l in range(3):
        np.testing.assert_allclose(grads.dW[l], oracle.dW[l], rtol=1e-12)
    assert 0.0 <= acc <= 1.0 and loss > 0


def test_grad_standard_rejects_bad_labels():
    net = tiny_net()
    X = np.zeros((2, 16))
    with pytest.raises(ValueError):
        train.grad_standard(net, X, np.array([0, 5]))


def test_grad_standard_finite_difference():
    net = tiny_net(seed=4)
    X = np.random.default_rng(1).standard_normal((3, 16))
    y = np.array([1, 0, 2])
    grads, _, _ = train.grad_standard(net, X, y)

    def loss():
        out = nets.forward_batch(net, X).out
        p = train.softmax(out)
        return float(-np.log(p[np.arange(3), y]).mean())

    h = 1e-5
    for (l, i, j) in [(0, 0, 3), (1, 5, 5), (2, 9, 1)]:
        keep = net.W[l][i, j]
        net.W[l][i, j] = keep + h
        up = loss()
        net.W[l][i, j] = keep - h
        dn = loss()
        net.W[l][i, j] = keep
        fd = (up - dn) / (2 * h)
        assert abs(fd - grads.dW[l][i, j]) <= 1e-4 * max(abs(fd), 1e-8)


def test_grad_adv_surrogate_closed_form():
    net = tiny_net()
    cfg = net.config
    g = train.grad_adv_surrogate(net, 0.3, (INF, INF))
    b = theory.beta((INF, INF), cfg.d, cfg.K)
    om = train.empirical_omega(net)
    coef = 0.3 * 0.5 * b * om ** (cfg.L / 2 - 1) / cfg.N
    for l in range(cfg.L):
        np.testing.assert_allclose(g.dW[l], coef * net.W[l], rtol=1e-12)
        assert not g.db[l].any()


def test_grad_adv_surrogate_zero_weights():
    net = tiny_net()
    for W in net.W:
        W[:] = 0.0
    g = train.grad_adv_surrogate(net, 0.3, (2, 2))
    assert all(not dw.any() for dw in g.dW)


def test_grad_adv_surrogate_depth_two_independent_of_omega():
    # L = 2 kills the omega exponent: gradient is (eps*alpha*beta/N) W
    net = tiny_net(L=2)
    cfg = net.config
    g = train.grad_adv_surrogate(net, 0.2, (2, INF))
    coef = 0.2 * 0.5 * 1.0 / cfg.N
    np.testing.assert_allclose(g.dW[0], coef * net.W[0], rtol=1e-12)


def test_one_surrogate_step_matches_evolution_slope():
    # a single SGD step changes sigma_w2 by -2*lr*rate*sigma_w2 + O(lr^2),
    # twice the linearized trajectory slope of the variance law per unit t
    net = tiny_net(seed=7, N=64)
    cfg = net.config
    lr = 1e-5
    sw0, _ = train.weight_variance(net)
    g = train.grad_adv_surrogate(net, 0.3, (INF, INF))
    for W, dW in zip(net.W, g.dW):
        W -= lr * dW
    sw1, _ = train.weight_variance(net)
    b = theory.beta((INF, INF), cfg.d, cfg.K)
    om0 = 0.5 * sw0
    rate = 0.3 * 0.5 * b * om0 ** (cfg.L / 2 - 1) / cfg.N
    assert (sw1 - sw0) / lr == pytest.approx(-2.0 * rate * sw0, rel=1e-4)


def test_grad_l2_closed_form_and_slope():
    net = tiny_net()
    cfg = net.config
    g = train.grad_l2(net)
    np.testing.assert_allclose(g.dW[1], net.W[1] / (cfg.L * cfg.N), rtol=1e-12)
    assert all(not db.any() for db in g.db)
    lr = 1e-5
    sw0, _ = train.weight_variance(net)
    for W, dW in zip(net.W, g.dW):
        W -= lr * dW
    sw1, _ = train.weight_variance(net)
    assert (sw1 - sw0) / lr == pytest.approx(-2.0 * sw0 / (cfg.L * cfg.N), rel=1e-6)


def test_grad_l2_zero_weights():
    net = tiny_net()
    for W in net.W:
        W[:] = 0.0
    assert all(not dw.any() for dw in train.grad_l2(net).dW)


# ------------------------------------------------------------ weight variance

def test_weight_variance_fresh_sample():
    cfg = nets.NetworkConfig(d=8, K=2, L=10, N=320, sigma_w2=2.0, sigma_b2=0.04)
    net = nets.sample_network(cfg, 23)
    sw, sb = train.weight_variance(net)
    assert sw == pytest.approx(2.0, rel=0.02)
    assert sb == pytest.approx(0.04, rel=0.1)


def test_weight_variance_scaling():
    net = tiny_net()
    sw0, _ = train.weight_variance(net)
    for W in net.W:
        W *= 0.5
    sw1, _ = train.weight_variance(net)
    assert sw1 == pytest.approx(0.25 * sw0, rel=1e-12)
    for W in net.W:
        W[:] = 0.0
    assert train.weight_variance(net)[0] == 0.0


# ----------------------------------------------------------------- fisher-rao

def test_fisher_rao_zero_weights():
    net = tiny_net()
    for W in net.W:
        W[:] = 0.0
    assert train.fisher_rao_diag(net, np.ones(16)) == 0.0


def test_fisher_rao_matches_per_output_backprop():
    net = tiny_net(seed=9)
    x = np.random.default_rng(3).standard_normal(16)
    fr = train.fisher_rao_diag(net, x)
    acc = [np.zeros_like(W) for W in net.W]
    for k in range(net.config.K):
        e = np.zeros(net.config.K)
        e[k] = 1.0
        g = nets.backprop(net, x, e)
        for l in range(net.config.L):
            acc[l] += g.dW[l] ** 2
    oracle = sum(float((W ** 2 * a).sum()) for W, a in zip(net.W, acc))
    assert fr == pytest.approx(oracle, rel=1e-10)


def test_fisher_rao_weight_scaling_homogeneity():
    # linear activation: f is degree-L homogeneous in the weights, so the
    # diagonal capacity scales as c^(2L)
    net = tiny_net(seed=10, u=1.0, v=1.0, sigma_b2=0.0)
    x = np.random.default_rng(4).standard_normal(16)
    f0 = train.fisher_rao_diag(net, x)
    for W in net.W:
        W *= 2.0
    f1 = train.fisher_rao_diag(net, x)
    assert f1 / f0 == pytest.approx(2.0 ** (2 * net.config.L), rel=1e-9)


# -------------------------------------------------------------- training loop

def test_train_zero_steps_trace(tiny_data):
    X, y = tiny_data
    spec = train.TrainSpec(mode=train.STANDARD, steps=0, batch=32, seed=0)
    tr = train.train(tiny_net(), X, y, spec)
    assert len(tr.rows) == 1 and tr.rows[0][0] == 0 and tr.rows[0][1] == 0.0


def test_train_deterministic_and_t_column(tiny_data):
    X, y = tiny_data
    spec = train.TrainSpec(mode=train.L2REG, lr=1e-3, steps=12, batch=24,
                           metric_every=3, seed=5)
    a = train.train(tiny_net(), X, y, spec)
    b = train.train(tiny_net(), X, y, spec)
    assert a.rows == b.rows
    for row in a.rows:
        assert row[1] == row[0] * 1e-3
    assert len(a.rows) == 1 + 4


def test_train_eps_zero_surrogate_equals_standard(tiny_data):
    X, y = tiny_data
    kw = dict(lr=1e-3, steps=10, batch=24, metric_every=2, seed=6)
    a = train.train(tiny_net(), X, y, train.TrainSpec(mode=train.STANDARD, **kw))
    b = train.train(tiny_net(), X, y, train.TrainSpec(mode=train.ADV_SURROGATE, eps=0.0, **kw))
    assert a.rows == b.rows


def test_train_adv_pgd_runs_and_decays_variance(tiny_data):
    X, y = tiny_data
    atk = AttackSpec(pair=(INF, INF), eps=0.3, iters=5, restarts=1, seed=0)
    spec = train.TrainSpec(mode=train.ADV_PGD, optimizer=train.ADAM, lr=1e-3,
                           steps=30, batch=32, metric_every=10, attack=atk, seed=7)
    tr = train.train(tiny_net(), X, y, spec)
    assert not tr.aborted
    sw = tr.column("sigma_w2")
    assert sw[-1] < sw[0]


def test_train_learns_synthetic(tiny_data):
    X, y = tiny_data
    spec = train.TrainSpec(mode=train.STANDARD, optimizer=train.ADAM, lr=1e-3,
                           steps=300, batch=32, metric_every=50, seed=8)
    tr = train.train(tiny_net(), X, y, spec)
    assert train.evaluate_accuracy(tr.net, X, y) > 0.9


def test_train_early_stop(tiny_data):
    X, y = tiny_data
    spec = train.TrainSpec(mode=train.STANDARD, optimizer=train.ADAM, lr=1e-3,
                           steps=4000, batch=32, metric_every=10,
                           early_stop_patience=50, seed=9)
    tr = train.train(tiny_net(), X, y, spec)
    assert tr.rows[-1][0] < 4000


def test_train_requires_nonempty_dataset():
    with pytest.raises(ValueError):
        train.train(tiny_net(), np.zeros((0, 16)), np.zeros(0, dtype=int),
                    train.TrainSpec(steps=1))


def test_trainspec_validation():
    with pytest.raises(ValueError):
        train.TrainSpec(mode="fancy")
    with pytest.raises(ValueError):
        train.TrainSpec(lr=0.0)
    with pytest.raises(ValueError):
        train.TrainSpec(mode=train.ADV_PGD)   # attack spec missing

"""Training loops with gradient-flow-faithful metrics.

Four modes: plain cross-entropy, l2 weight regularization (lambda fixed to
1/(2LN)), the closed-form adversarial-loss surrogate whose weight gradient is
(eps*alpha*beta*omega^(L/2-1)/N) W, and full PGD adversarial training.  Every
run logs the weight/bias variances, train accuracy, the diagonal-Fisher
capacity estimate and the depth gradient ratio on a fixed probe input.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import nets
from .attack import AttackSpec, pgd_attack_batch, _lq_rows, _q_subgradient_rows
from .theory import INF, beta as beta_pq, alpha as alpha_uv

log = logging.getLogger(__name__)

STANDARD = "standard"
L2REG = "l2_reg"
ADV_SURROGATE = "adv_surrogate"
ADV_PGD = "adv_pgd"

SGD = "sgd"
ADAM = "adam"


@dataclass(frozen=True)
class TrainSpec:
    mode: str = STANDARD
    optimizer: str = SGD
    lr: float = 1e-3
    steps: int = 100
    batch: int = 128
    metric_every: int = 10
    seed: int = 0
    eps: float = 0.0                     # surrogate / PGD budget
    pair: tuple = (INF, INF)
    attack: AttackSpec | None = None     # ADV_PGD only
    early_stop_patience: int = 0         # steps without accuracy improvement; 0 = off

    def __post_init__(self):
        if self.mode not in (STANDARD, L2REG, ADV_SURROGATE, ADV_PGD):
            raise ValueError(f"unknown train mode {self.mode!r}")
        if self.optimizer not in (SGD, ADAM):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.mode == ADV_PGD and self.attack is None:
            raise ValueError("ADV_PGD requires an AttackSpec")


@dataclass
class TrainTrace:
    """Metric rows logged during training; t = step * lr exactly."""

    columns = ("step", "t", "sigma_w2", "sigma_b2", "train_acc", "fr_diag", "chi_ratio")
    rows: list = field(default_factory=list)
    aborted: bool = False
    net: nets.Network | None = None      # parameters after the last update

    def add(self, step, lr, sigma_w2, sigma_b2, train_acc, fr_diag, chi_ratio):
        self.rows.append((step, step * lr, sigma_w2, sigma_b2, train_acc, fr_diag, chi_ratio))

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def weight_variance(net: nets.Network) -> tuple[float, float]:
    """Empirical (sigma_w2, sigma_b2): N * mean(W^2) over all weights, mean(b^2)."""
    cfg = net.config
    sw = sum(float((W ** 2).sum()) for W in net.W) / (cfg.L * cfg.N)
    sb = sum(float((b ** 2).sum()) for b in net.b) / (cfg.L * cfg.N)
    return sw, sb


def empirical_omega(net: nets.Network) -> float:
    a = alpha_uv(net.config.u, net.config.v)
    sw, _ = weight_variance(net)
    return a * sw if net.config.arch == nets.VANILLA else 1.0 + a * sw


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def grad_standard(net: nets.Network, X: np.ndarray, y: np.ndarray,
                  cache: nets.ForwardCache | None = None):
    """Mean softmax cross-entropy gradient over a labeled batch.

    Returns (ParameterGradients, batch accuracy, mean loss).
    """
    cfg = net.config
    y = np.asarray(y)
    if y.min() < 0 or y.max() >= cfg.K:
        raise ValueError(f"labels must lie in [0, {cfg.K})")
    if cache is None:
        cache = nets.forward_batch(net, X)
    probs = softmax(cache.out)
    n = X.shape[0]
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    grads, _ = nets.backprop_batch(net, X, dlogits, cache=cache)
    acc = float((cache.out.argmax(axis=1) == y).mean())
    loss = float(-np.log(probs[np.arange(n), y] + 1e-300).mean())
    return grads, acc, loss


def grad_adv_surrogate(net: nets.Network, eps: float, pair) -> nets.ParameterGradients:
    """Closed-form gradient of the loss bound eps * beta * omega^(L/2).

    Per weight: (eps*alpha*beta*omega^(L/2-1)/N) * W with omega recomputed
    from the current empirical weight variance; biases are untouched.
    """
    cfg = net.config
    b = beta_pq(pair, cfg.d, cfg.K)
    a = alpha_uv(cfg.u, cfg.v)
    om = empirical_omega(net)
    coef = eps * a * b * om ** (cfg.L / 2.0 - 1.0) / cfg.N
    dW = [coef * W for W in net.W]
    db = [np.zeros_like(bv) for bv in net.b]
    return nets.ParameterGradients(dW=dW, db=db)


def grad_l2(net: nets.Network) -> nets.ParameterGradients:
    """Gradient of the fixed-scale l2 penalty sum(W^2) / (2LN): W / (LN)."""
    cfg = net.config
    coef = 1.0 / (cfg.L * cfg.N)
    return nets.ParameterGradients(dW=[coef * W for W in net.W],
                                   db=[np.zeros_like(b) for b in net.b])


def fisher_rao_diag(net: nets.Network, x_in: np.ndarray) -> float:
    """Diagonal-Fisher capacity: sum_i w_i^2 sum_k (df_k/dw_i)^2 over weights.

    One backward sweep carries all K output rows at once; per layer the
    contribution factorizes as (sum_k dh^2) . W^2 . x_prev^2.
    """
    cfg = net.config
    cache = nets.forward(net, x_in)
    V = net.P_out
    total = 0.0
    for l in range(cfg.L - 1, -1, -1):
        g = nets.activation_slope(cache.h[l], cfg.u, cfg.v)
        if cfg.arch == nets.RESIDUAL:
            dh = (V @ net.P_short[l]) * g
        else:
            dh = V * g
        xprev = cache.x[l - 1] if l > 0 else cache.x0
        total += float((dh ** 2).sum(axis=0) @ (net.W[l] ** 2) @ (xprev ** 2))
        if cfg.arch == nets.RESIDUAL:
            V = V + dh @ net.W[l]
        else:
            V = dh @ net.W[l]
    return total


def chi_ratio(net: nets.Network, x_in: np.ndarray, out_grad: np.ndarray) -> float:
    chis = nets.chi_profile(net, x_in, out_grad)
    return float(chis[0] / chis[-1])


def evaluate_accuracy(net: nets.Network, X: np.ndarray, y: np.ndarray,
                      batch: int = 1024) -> float:
    correct = 0
    for i in range(0, X.shape[0], batch):
        out = nets.forward_batch(net, X[i:i + batch]).out
        correct += int((out.argmax(axis=1) == y[i:i + batch]).sum())
    return correct / X.shape[0]


class _Adam:
    def __init__(self, shapes, lr, b1=0.9, b2=0.999, delta=1e-8):
        self.lr, self.b1, self.b2, self.delta = lr, b1, b2, delta
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.delta)


def _add_grads(target: nets.ParameterGradients, extra: nets.ParameterGradients):
    for l in range(len(target.dW)):
        target.dW[l] += extra.dW[l]
        target.db[l] += extra.db[l]


def train(net: nets.Network, X: np.ndarray, y: np.ndarray, spec: TrainSpec) -> TrainTrace:
    """Run spec.steps updates on a private copy of the network parameters.

    The input network is not mutated; the trained parameters are written into
    a copy that replaces net.W / net.b lists (projections stay frozen).
    Deterministic for a fixed (spec, seed, dataset), including the shuffle
    order.  Returns the metric trace; the trained network is available as the
    trace's `net` attribute.
    """
    if X.shape[0] == 0:
        raise ValueError("dataset must be nonempty")
    cfg = net.config
    work = nets.Network(cfg, net.P_in, net.P_out,
                        [W.copy() for W in net.W], [b.copy() for b in net.b],
                        net.P_short, net.seed)
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(spec.seed, spawn_key=(17,))))
    n = X.shape[0]

    probe = X[0] * (math.sqrt(cfg.d) / np.linalg.norm(X[0])) if np.any(X[0]) else np.ones(cfg.d)
    probe_label = int(y[0])

    params = work.W + work.b
    opt = _Adam([p.shape for p in params], spec.lr) if spec.optimizer == ADAM else None

    trace = TrainTrace()
    acc_window: list[float] = []
    best_acc, best_acc_step = -1.0, 0
    order = rng.permutation(n)
    cursor = 0

    def log_row(step, acc):
        sw, sb = weight_variance(work)
        cache = nets.forward(work, probe)
        probs = softmax(cache.out)
        g = probs.copy()
        g[probe_label] -= 1.0
        trace.add(step, spec.lr, sw, sb, acc,
                  fisher_rao_diag(work, probe), chi_ratio(work, probe, g))

    first_batch = X[order[:min(spec.batch, n)]]
    first_labels = y[order[:min(spec.batch, n)]]
    init_out = nets.forward_batch(work, first_batch).out
    log_row(0, float((init_out.argmax(axis=1) == first_labels).mean()))

    for step in range(1, spec.steps + 1):
        if cursor + spec.batch > n:
            order = rng.permutation(n)
            cursor = 0
        idx = order[cursor:cursor + spec.batch]
        cursor += spec.batch
        Xb, yb = X[idx], y[idx]

        if spec.mode == ADV_PGD:
            q = spec.attack.pair[1]
            eta = pgd_attack_batch(work, Xb, spec.attack, rng)
            cache = nets.forward_batch(work, Xb)
            cache_adv = nets.forward_batch(work, Xb + eta)
            delta = cache_adv.out - cache.out
            u = _q_subgradient_rows(delta, q, rng)
            probs = softmax(cache.out)
            dlogits = probs.copy()
            dlogits[np.arange(len(yb)), yb] -= 1.0
            dlogits /= len(yb)
            # d/dtheta [ CE(f(x)) + ||f(x+eta) - f(x)||_q ]: the deviation term
            # contributes +u through the adversarial pass and -u through the
            # clean pass, fused with the CE gradient.
            grads, _ = nets.backprop_batch(work, Xb, dlogits - u / len(yb), cache=cache)
            grads_adv, _ = nets.backprop_batch(work, Xb + eta, u / len(yb), cache=cache_adv)
            _add_grads(grads, grads_adv)
            acc = float((cache.out.argmax(axis=1) == yb).mean())
            loss = float(-np.log(probs[np.arange(len(yb)), yb] + 1e-300).mean()
                         + _lq_rows(delta, q).mean())
        else:
            grads, acc, loss = grad_standard(work, Xb, yb)
            if spec.mode == L2REG:
                _add_grads(grads, grad_l2(work))
            elif spec.mode == ADV_SURROGATE and spec.eps > 0:
                _add_grads(grads, grad_adv_surrogate(work, spec.eps, spec.pair))

        if not math.isfinite(loss):
            log.warning("non-finite loss at step %d; aborting run", step)
            trace.aborted = True
            break

        gl = grads.dW + grads.db
        if opt is not None:
            opt.step(params, gl)
        else:
            for prm, g in zip(params, gl):
                prm -= spec.lr * g

        acc_window.append(acc)
        if step % spec.metric_every == 0 or step == spec.steps:
            window_acc = float(np.mean(acc_window))
            acc_window.clear()
            log_row(step, window_acc)
            if spec.early_stop_patience > 0:
                # a tenth of a point counts as progress; plain noise does not
                if window_acc > best_acc + 1e-3:
                    best_acc, best_acc_step = window_acc, step
                elif step - best_acc_step >= spec.early_stop_patience:
                    break

    trace.net = work
    return trace

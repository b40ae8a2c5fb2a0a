"""Random piecewise-linear networks: sampling, evaluation, differentiation.

A network maps R^d -> R^K through a frozen input projection, L trainable
affine+activation layers of width N (optionally with frozen random shortcut
projections), and a frozen output projection.  Because the activation is
piecewise linear, the map is exactly affine on the activation region of any
input: f(x) = J(x) x + a(x).  This module computes that local-linear form
exactly, along with reverse-mode gradients for the attack and training
harnesses.
"""

from dataclasses import dataclass, field
import math

import numpy as np

VANILLA = "vanilla"
RESIDUAL = "residual"

# Stream codes enumerate the parameter tensors of one network so that every
# tensor draws from its own seeded substream.
_STREAM_P_IN = 1
_STREAM_P_OUT = 2
_STREAM_W = 100
_STREAM_B = 200
_STREAM_P_SHORT = 300


@dataclass(frozen=True)
class NetworkConfig:
    """Hyperparameters of a random piecewise-linear network.

    The activation is phi(z) = u*z for z >= 0 and v*z for z < 0.  Weights are
    drawn N(0, sigma_w2/N), biases N(0, sigma_b2); the input/output/shortcut
    projections are N(0, 1/d), N(0, 1/N) and N(0, 1/N) respectively.
    """

    d: int
    K: int
    L: int
    N: int
    sigma_w2: float
    sigma_b2: float
    u: float = 1.0
    v: float = 0.0
    arch: str = VANILLA

    def __post_init__(self):
        for name in ("d", "K", "L", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.sigma_w2 < 0 or self.sigma_b2 < 0:
            raise ValueError("variances must be nonnegative")
        if self.u == 0 and self.v == 0:
            raise ValueError("activation slopes (u, v) must not both be zero")
        if self.arch not in (VANILLA, RESIDUAL):
            raise ValueError(f"arch must be '{VANILLA}' or '{RESIDUAL}'")


@dataclass
class Network:
    """Sampled parameter set.  Treat as immutable; all ops are pure."""

    config: NetworkConfig
    P_in: np.ndarray
    P_out: np.ndarray
    W: list
    b: list
    P_short: list | None
    seed: int


@dataclass
class ForwardCache:
    """Every intermediate of one forward pass (pre/post-activations)."""

    x0: np.ndarray          # projected input, length N
    h: list                 # pre-activations per layer
    x: list                 # post-activations per layer
    out: np.ndarray         # network output, length K


@dataclass
class LinearRegion:
    """Exact local-linear form f(x) = J x + a on the anchor's region."""

    J: np.ndarray           # K x d
    a: np.ndarray           # K


@dataclass
class ParameterGradients:
    """Gradients of a scalar objective w.r.t. the trainable parameters."""

    dW: list
    db: list
    dx_in: np.ndarray | None = None


def _stream(seed, code):
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(code,))))


def sample_network(config: NetworkConfig, seed: int) -> Network:
    """Draw a network with one independent RNG substream per tensor.

    The substreams are keyed by (seed, tensor-code), so the same (config,
    seed) reproduces bit-identical parameters and distinct tensors never
    share a stream even when sampled in parallel.
    """
    d, K, N, L = config.d, config.K, config.N, config.L
    P_in = _stream(seed, _STREAM_P_IN).standard_normal((N, d)) * math.sqrt(1.0 / d)
    P_out = _stream(seed, _STREAM_P_OUT).standard_normal((K, N)) * math.sqrt(1.0 / N)
    sw = math.sqrt(config.sigma_w2 / N)
    sb = math.sqrt(config.sigma_b2)
    W = [_stream(seed, _STREAM_W + l).standard_normal((N, N)) * sw for l in range(L)]
    b = [_stream(seed, _STREAM_B + l).standard_normal(N) * sb for l in range(L)]
    P_short = None
    if config.arch == RESIDUAL:
        P_short = [_stream(seed, _STREAM_P_SHORT + l).standard_normal((N, N)) * math.sqrt(1.0 / N)
                   for l in range(L)]
    return Network(config, P_in, P_out, W, b, P_short, seed)


def activation(h, u, v):
    return np.where(h >= 0, u * h, v * h)


def activation_slope(h, u, v):
    """Entrywise slope of the activation; ties at h = 0 take the positive slope."""
    return np.where(h >= 0, u, v)


def forward(net: Network, x_in: np.ndarray) -> ForwardCache:
    """Evaluate the network, caching every pre- and post-activation."""
    cfg = net.config
    x_in = np.asarray(x_in, dtype=np.float64)
    if x_in.shape != (cfg.d,):
        raise ValueError(f"x_in must have shape ({cfg.d},), got {x_in.shape}")
    x0 = net.P_in @ x_in
    hs, xs = [], []
    x = x0
    for l in range(cfg.L):
        h = net.W[l] @ x + net.b[l]
        if cfg.arch == RESIDUAL:
            x = x + net.P_short[l] @ activation(h, cfg.u, cfg.v)
        else:
            x = activation(h, cfg.u, cfg.v)
        hs.append(h)
        xs.append(x)
    return ForwardCache(x0=x0, h=hs, x=xs, out=net.P_out @ x)


def forward_batch(net: Network, X: np.ndarray) -> ForwardCache:
    """Batched forward pass; X has shape (n, d) and every cache entry (n, .)."""
    cfg = net.config
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cfg.d:
        raise ValueError(f"X must have shape (n, {cfg.d}), got {X.shape}")
    x0 = X @ net.P_in.T
    hs, xs = [], []
    x = x0
    for l in range(cfg.L):
        h = x @ net.W[l].T + net.b[l]
        if cfg.arch == RESIDUAL:
            x = x + activation(h, cfg.u, cfg.v) @ net.P_short[l].T
        else:
            x = activation(h, cfg.u, cfg.v)
        hs.append(h)
        xs.append(x)
    return ForwardCache(x0=x0, h=hs, x=xs, out=x @ net.P_out.T)


def extract_linear_region(net: Network, x_in: np.ndarray,
                          cache: ForwardCache | None = None) -> LinearRegion:
    """Exact input Jacobian and offset of the region containing x_in.

    J is accumulated output-to-input through the diagonal activation-slope
    matrices (for shortcut layers, through I + P D W per layer); a is the
    residual f(x_in) - J x_in, which pins the affine identity exactly at the
    anchor regardless of the tie convention at h = 0.
    """
    cfg = net.config
    if cache is None:
        cache = forward(net, x_in)
    M = net.P_out
    for l in range(cfg.L - 1, -1, -1):
        g = activation_slope(cache.h[l], cfg.u, cfg.v)
        if cfg.arch == RESIDUAL:
            M = M + ((M @ net.P_short[l]) * g) @ net.W[l]
        else:
            M = (M * g) @ net.W[l]
    J = M @ net.P_in
    a = cache.out - J @ np.asarray(x_in, dtype=np.float64)
    return LinearRegion(J=J, a=a)


def backprop(net: Network, x_in: np.ndarray, out_grad: np.ndarray,
             cache: ForwardCache | None = None) -> ParameterGradients:
    """Reverse-mode gradients of <out_grad, f(x_in)> for all W, b and x_in.

    Projections are frozen, so only weight/bias gradients are produced.
    Activation ties use the same slope convention as extract_linear_region.
    """
    cfg = net.config
    out_grad = np.asarray(out_grad, dtype=np.float64)
    if out_grad.shape != (cfg.K,):
        raise ValueError(f"out_grad must have shape ({cfg.K},), got {out_grad.shape}")
    if cache is None:
        cache = forward(net, x_in)
    dW = [None] * cfg.L
    db = [None] * cfg.L
    v = net.P_out.T @ out_grad          # d<g,f>/dx^(L)
    for l in range(cfg.L - 1, -1, -1):
        g = activation_slope(cache.h[l], cfg.u, cfg.v)
        if cfg.arch == RESIDUAL:
            dh = (net.P_short[l].T @ v) * g
        else:
            dh = v * g
        xprev = cache.x[l - 1] if l > 0 else cache.x0
        dW[l] = np.outer(dh, xprev)
        db[l] = dh
        if cfg.arch == RESIDUAL:
            v = v + net.W[l].T @ dh
        else:
            v = net.W[l].T @ dh
    return ParameterGradients(dW=dW, db=db, dx_in=net.P_in.T @ v)


def backprop_batch(net: Network, X: np.ndarray, out_grads: np.ndarray,
                   cache: ForwardCache | None = None,
                   need_param_grads: bool = True):
    """Batched reverse pass for sum_b <out_grads[b], f(X[b])>.

    Returns (ParameterGradients with summed dW/db or None, per-sample input
    gradients of shape (n, d)).  Used by the attack and training loops.
    """
    cfg = net.config
    if cache is None:
        cache = forward_batch(net, X)
    out_grads = np.asarray(out_grads, dtype=np.float64)
    dW = [None] * cfg.L if need_param_grads else None
    db = [None] * cfg.L if need_param_grads else None
    v = out_grads @ net.P_out           # (n, N)
    for l in range(cfg.L - 1, -1, -1):
        g = activation_slope(cache.h[l], cfg.u, cfg.v)
        if cfg.arch == RESIDUAL:
            dh = (v @ net.P_short[l]) * g
        else:
            dh = v * g
        if need_param_grads:
            xprev = cache.x[l - 1] if l > 0 else cache.x0
            dW[l] = dh.T @ xprev
            db[l] = dh.sum(axis=0)
        if cfg.arch == RESIDUAL:
            v = v + dh @ net.W[l]
        else:
            v = dh @ net.W[l]
    grads = ParameterGradients(dW=dW, db=db) if need_param_grads else None
    return grads, v @ net.P_in


def chi_profile(net: Network, x_in: np.ndarray, loss_grad_at_output: np.ndarray,
                cache: ForwardCache | None = None) -> np.ndarray:
    """Per-layer mean-squared gradients of <loss_grad_at_output, f>.

    Entry l is the mean over neurons of the squared gradient w.r.t. the
    post-activation x^(l); index 0 refers to the projected input x^(0).
    Returns an array of length L + 1.
    """
    cfg = net.config
    g = np.asarray(loss_grad_at_output, dtype=np.float64)
    if g.shape != (cfg.K,):
        raise ValueError(f"loss_grad_at_output must have shape ({cfg.K},), got {g.shape}")
    if cache is None:
        cache = forward(net, x_in)
    chis = np.empty(cfg.L + 1)
    v = net.P_out.T @ g
    chis[cfg.L] = np.mean(v ** 2)
    for l in range(cfg.L - 1, -1, -1):
        gphi = activation_slope(cache.h[l], cfg.u, cfg.v)
        if cfg.arch == RESIDUAL:
            dh = (net.P_short[l].T @ v) * gphi
            v = v + net.W[l].T @ dh
        else:
            v = net.W[l].T @ (v * gphi)
        chis[l] = np.mean(v ** 2)
    return chis

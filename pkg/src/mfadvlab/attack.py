"""lp-ball constrained attacks maximizing the lq output deviation.

Includes the Euclidean projections onto l1/l2/linf balls, the closed-form
(p, q) operator norms that are tractable, multi-restart projected gradient
ascent on ||f(x + eta) - f(x)||_q, and the one-step signed-gradient attack
for single-output networks.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import nets
from .theory import INF, SUPPORTED_PAIRS

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AttackSpec:
    pair: tuple
    eps: float
    iters: int = 50
    restarts: int = 3
    step_scale: float = 2.5        # step = step_scale * eps / iters, cosine-decayed
    seed: int = 0

    def __post_init__(self):
        p, q = self.pair
        if p not in (1, 2, INF) or q not in (1, 2, INF):
            raise ValueError(f"norms must lie in {{1, 2, inf}}, got ({p}, {q})")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.iters < 1 or self.restarts < 1:
            raise ValueError("iters and restarts must be >= 1")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")


@dataclass
class AttackResult:
    eta: np.ndarray
    loss: float
    trace: list = field(default_factory=list)   # per-restart best-so-far losses


def lp_norm(v: np.ndarray, p) -> float:
    if p == 1:
        return float(np.abs(v).sum())
    if p == 2:
        return float(np.linalg.norm(v))
    if p == INF:
        return float(np.abs(v).max()) if v.size else 0.0
    raise ValueError(f"unsupported norm order {p}")


def project_lp_ball(v: np.ndarray, p, eps: float) -> np.ndarray:
    """Euclidean projection of v onto the lp ball of radius eps."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    if p == INF:
        return np.clip(v, -eps, eps)
    if p == 2:
        n = np.linalg.norm(v)
        return v if n <= eps else v * (eps / n)
    if p == 1:
        if np.abs(v).sum() <= eps:
            return v.copy()
        return np.sign(v) * _project_simplex(np.abs(v), eps)
    raise ValueError(f"unsupported norm order {p}")


def _project_simplex(w: np.ndarray, radius: float) -> np.ndarray:
    # Sort-and-threshold projection onto {x >= 0, sum x = radius}.
    ws = np.sort(w)[::-1]
    cssw = np.cumsum(ws) - radius
    rho = np.nonzero(ws * np.arange(1, w.size + 1) > cssw)[0][-1]
    theta = cssw[rho] / (rho + 1.0)
    return np.maximum(w - theta, 0.0)


def sample_lp_ball(rng: np.random.Generator, d: int, p, eps: float) -> np.ndarray:
    """Uniform sample from the lp ball of radius eps."""
    if p == INF:
        return rng.uniform(-eps, eps, size=d)
    if p == 2:
        g = rng.standard_normal(d)
        g /= np.linalg.norm(g)
        return eps * g * rng.uniform() ** (1.0 / d)
    if p == 1:
        g = rng.standard_exponential(d) * rng.choice([-1.0, 1.0], size=d)
        g /= np.abs(g).sum()
        return eps * g * rng.uniform() ** (1.0 / d)
    raise ValueError(f"unsupported norm order {p}")


def operator_norm(J: np.ndarray, pair) -> float:
    """(p, q) operator norm of a K x d matrix for the tractable pairs.

    (2, 2) uses power iteration on J^T J (relative tolerance 1e-8, at most
    1e4 iterations); the other supported pairs are row/column norms.
    """
    p, q = pair
    if (p, q) not in SUPPORTED_PAIRS:
        raise ValueError(f"(p={p}, q={q}) operator norm is not tractable")
    J = np.asarray(J, dtype=np.float64)
    if (p, q) == (1, 1):
        return float(np.abs(J).sum(axis=0).max())
    if (p, q) == (1, 2):
        return float(np.sqrt((J ** 2).sum(axis=0)).max())
    if (p, q) == (1, INF):
        return float(np.abs(J).max())
    if (p, q) == (2, INF):
        return float(np.sqrt((J ** 2).sum(axis=1)).max())
    if (p, q) == (INF, INF):
        return float(np.abs(J).sum(axis=1).max())
    return _spectral_norm(J)


def _spectral_norm(J: np.ndarray, rel_tol: float = 1e-8, max_iter: int = 10_000) -> float:
    G = J.T @ J if J.shape[0] >= J.shape[1] else J @ J.T
    n = G.shape[0]
    # seeded random start: a structured start (e.g. all-ones) can be exactly
    # orthogonal to the top eigenvector and lock onto a lower eigenvalue
    rng = np.random.Generator(np.random.SFC64(0xC0FFEE))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v in the nullspace; restart from a random direction
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v_new = w / nw
        sigma_new = math.sqrt(nw)
        if abs(sigma_new - sigma) <= rel_tol * max(sigma_new, 1e-300):
            return sigma_new
        v, sigma = v_new, sigma_new
    return sigma


def _q_subgradient(delta: np.ndarray, q, rng: np.random.Generator) -> np.ndarray:
    """Ascent direction of ||.||_q at delta; random unit direction at 0."""
    if not np.any(delta):
        g = rng.standard_normal(delta.shape[-1])
        return g / np.linalg.norm(g)
    if q == 1:
        return np.sign(delta)
    if q == 2:
        return delta / np.linalg.norm(delta)
    out = np.zeros_like(delta)
    i = int(np.argmax(np.abs(delta)))
    out[i] = np.sign(delta[i])
    return out


def _p_step(grad: np.ndarray, p) -> np.ndarray:
    """Unit ascent step for the lp geometry."""
    if p == INF:
        return np.sign(grad)
    if p == 2:
        n = np.linalg.norm(grad)
        return grad / n if n > 0 else grad
    out = np.zeros_like(grad)
    i = int(np.argmax(np.abs(grad)))
    out[i] = np.sign(grad[i])
    return out


def pgd_attack(net: nets.Network, x_in: np.ndarray, spec: AttackSpec) -> AttackResult:
    """Multi-restart projected gradient ascent on ||f(x + eta) - f(x)||_q.

    The first restart starts at eta = 0 with one forced ascent step (the
    objective has zero gradient there); later restarts start uniformly in
    the eps-ball.  Cosine-decayed steps, projection after every step, best
    perturbation over all restarts returned with its loss recomputed from
    scratch.
    """
    cfg = net.config
    p, q = spec.pair
    x_in = np.asarray(x_in, dtype=np.float64)
    base = nets.forward(net, x_in).out
    if spec.eps == 0:
        return AttackResult(eta=np.zeros(cfg.d), loss=0.0, trace=[np.zeros(1)])

    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(spec.seed)))
    best_eta = np.zeros(cfg.d)
    best_loss = 0.0
    traces = []
    base_step = spec.step_scale * spec.eps / spec.iters

    for r in range(spec.restarts):
        if r == 0:
            g0 = rng.standard_normal(cfg.K)
            g0 /= np.linalg.norm(g0)
            _, gin = nets.backprop_batch(net, x_in[None, :], g0[None, :],
                                         need_param_grads=False)
            eta = project_lp_ball(base_step * _p_step(gin[0], p), p, spec.eps)
        else:
            eta = sample_lp_ball(rng, cfg.d, p, spec.eps)

        restart_best = 0.0
        trace = np.empty(spec.iters)
        ok = True
        for i in range(spec.iters):
            cache = nets.forward(net, x_in + eta)
            delta = cache.out - base
            loss = lp_norm(delta, q)
            if loss > restart_best:
                restart_best = loss
                if loss > best_loss:
                    best_loss, best_eta = loss, eta.copy()
            trace[i] = restart_best
            u = _q_subgradient(delta, q, rng)
            _, gin = nets.backprop_batch(net, (x_in + eta)[None, :], u[None, :],
                                         need_param_grads=False)
            if not np.all(np.isfinite(gin)):
                log.warning("non-finite attack gradient; aborting restart %d", r)
                trace = trace[: i + 1]
                ok = False
                break
            step = base_step * math.cos(math.pi * i / (2.0 * spec.iters))
            eta = project_lp_ball(eta + step * _p_step(gin[0], p), p, spec.eps)
        if ok:
            # score the post-projection iterate of the final step as well
            delta = nets.forward(net, x_in + eta).out - base
            loss = lp_norm(delta, q)
            if loss > best_loss:
                best_loss, best_eta = loss, eta.copy()
        traces.append(trace)

    final_loss = lp_norm(nets.forward(net, x_in + best_eta).out - base, q)
    return AttackResult(eta=best_eta, loss=final_loss, trace=traces)


def pgd_attack_batch(net: nets.Network, X: np.ndarray, spec: AttackSpec,
                     rng: np.random.Generator) -> np.ndarray:
    """Vectorized single-restart-style PGD for training batches.

    Returns per-sample perturbations of shape X.shape.  Each restart runs all
    samples in lockstep; the best perturbation per sample is kept.
    """
    p, q = spec.pair
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if spec.eps == 0:
        return np.zeros_like(X)
    base = nets.forward_batch(net, X).out
    best = np.zeros_like(X)
    best_loss = np.zeros(n)
    base_step = spec.step_scale * spec.eps / spec.iters

    for r in range(spec.restarts):
        if r == 0:
            g0 = rng.standard_normal(base.shape)
            g0 /= np.linalg.norm(g0, axis=1, keepdims=True)
            _, gin = nets.backprop_batch(net, X, g0, need_param_grads=False)
            eta = _project_rows(base_step * _p_step_rows(gin, p), p, spec.eps)
        else:
            eta = np.stack([sample_lp_ball(rng, d, p, spec.eps) for _ in range(n)])
        for i in range(spec.iters):
            cache = nets.forward_batch(net, X + eta)
            delta = cache.out - base
            loss = _lq_rows(delta, q)
            improved = loss > best_loss
            best_loss = np.where(improved, loss, best_loss)
            best[improved] = eta[improved]
            u = _q_subgradient_rows(delta, q, rng)
            _, gin = nets.backprop_batch(net, X + eta, u, cache=cache,
                                         need_param_grads=False)
            step = base_step * math.cos(math.pi * i / (2.0 * spec.iters))
            eta = _project_rows(eta + step * _p_step_rows(gin, p), p, spec.eps)
        delta = nets.forward_batch(net, X + eta).out - base
        loss = _lq_rows(delta, q)
        improved = loss > best_loss
        best_loss = np.where(improved, loss, best_loss)
        best[improved] = eta[improved]
    return best


def _lq_rows(D: np.ndarray, q) -> np.ndarray:
    if q == 1:
        return np.abs(D).sum(axis=1)
    if q == 2:
        return np.linalg.norm(D, axis=1)
    return np.abs(D).max(axis=1)


def _q_subgradient_rows(D: np.ndarray, q, rng: np.random.Generator) -> np.ndarray:
    zero = ~np.any(D, axis=1)
    if q == 1:
        out = np.sign(D)
    elif q == 2:
        n = np.linalg.norm(D, axis=1, keepdims=True)
        out = D / np.where(n > 0, n, 1.0)
    else:
        out = np.zeros_like(D)
        idx = np.argmax(np.abs(D), axis=1)
        rows = np.arange(D.shape[0])
        out[rows, idx] = np.sign(D[rows, idx])
    if np.any(zero):
        g = rng.standard_normal((int(zero.sum()), D.shape[1]))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        out[zero] = g
    return out


def _p_step_rows(G: np.ndarray, p) -> np.ndarray:
    if p == INF:
        return np.sign(G)
    if p == 2:
        n = np.linalg.norm(G, axis=1, keepdims=True)
        return G / np.where(n > 0, n, 1.0)
    out = np.zeros_like(G)
    idx = np.argmax(np.abs(G), axis=1)
    rows = np.arange(G.shape[0])
    out[rows, idx] = np.sign(G[rows, idx])
    return out


def _project_rows(E: np.ndarray, p, eps: float) -> np.ndarray:
    if p == INF:
        return np.clip(E, -eps, eps)
    if p == 2:
        n = np.linalg.norm(E, axis=1, keepdims=True)
        scale = np.minimum(1.0, eps / np.where(n > 0, n, 1.0))
        return E * scale
    return np.stack([project_lp_ball(row, 1, eps) for row in E])


def single_sign_attack(net: nets.Network, x_in: np.ndarray, eps: float):
    """One signed-gradient step against a single-output network.

    Moves opposite to the current output sign by eps * sign(J).  Reports a
    flip when the recomputed output changes sign, or when the magnitude
    comparison |J x + a| < |J eta| certifies a crossing within the anchor's
    linear region.
    """
    cfg = net.config
    if cfg.K != 1:
        raise ValueError("single_sign_attack requires a single-output network")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    x_in = np.asarray(x_in, dtype=np.float64)
    cache = nets.forward(net, x_in)
    region = nets.extract_linear_region(net, x_in, cache)
    f0 = cache.out[0]
    s = math.copysign(1.0, f0) if f0 != 0 else 1.0
    eta = -s * eps * np.sign(region.J[0])
    if eps == 0:
        return False, eta
    f1 = nets.forward(net, x_in + eta).out[0]
    crossed = abs(f0) < abs(float(region.J[0] @ eta))
    flipped = (np.sign(f1) != np.sign(f0)) or crossed
    return bool(flipped), eta

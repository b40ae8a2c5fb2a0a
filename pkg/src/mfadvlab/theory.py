"""Closed-form predictors for random piecewise-linear network behavior.

Pure scalar formulas only; no sampling happens here.  The Monte-Carlo
counterparts live in the stats/attack/train modules so that theory values can
serve as independent oracles.
"""

from dataclasses import dataclass
import math
import warnings

from .nets import VANILLA, RESIDUAL

INF = math.inf

#: (p, q) pairs with a closed-form loss bound; the remaining combinations of
#: {1, 2, inf}^2 reduce to NP-hard operator norms.
SUPPORTED_PAIRS = ((1, 1), (1, 2), (1, INF), (2, 2), (2, INF), (INF, INF))

ADV_VANILLA = "adv_vanilla"
ADV_RESIDUAL = "adv_residual"
L2_REG = "l2_reg"


class AssumptionWarning(UserWarning):
    """A predictor was evaluated outside the regime its derivation assumes."""


def _check_pair(pair):
    p, q = pair
    if (p, q) not in SUPPORTED_PAIRS:
        raise ValueError(f"unsupported norm pair (p={p}, q={q})")
    return p, q


def alpha(u: float, v: float) -> float:
    """Mean-squared activation slope under a symmetric input: (u^2 + v^2)/2."""
    return 0.5 * (u * u + v * v)


def omega(arch: str, alpha_: float, sigma_w2: float) -> float:
    """Per-layer signal multiplier; 1 is the order/chaos boundary."""
    if arch == VANILLA:
        return alpha_ * sigma_w2
    if arch == RESIDUAL:
        return 1.0 + alpha_ * sigma_w2
    raise ValueError(f"unknown arch {arch!r}")


@dataclass(frozen=True)
class TheoryParams:
    """Scalar inputs shared by the predictors below."""

    alpha: float
    omega: float
    arch: str
    L: int
    N: int
    d: int
    K: int = 1
    sigma_b2: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.omega < 0:
            raise ValueError("omega must be nonnegative")
        if self.arch == RESIDUAL and self.omega < 1:
            raise ValueError("residual omega is 1 + alpha*sigma_w2 >= 1")

    @property
    def sigma_w2(self) -> float:
        if self.arch == RESIDUAL:
            return (self.omega - 1.0) / self.alpha
        return self.omega / self.alpha


def from_config(cfg) -> TheoryParams:
    """Build TheoryParams from a NetworkConfig."""
    a = alpha(cfg.u, cfg.v)
    return TheoryParams(alpha=a, omega=omega(cfg.arch, a, cfg.sigma_w2), arch=cfg.arch,
                        L=cfg.L, N=cfg.N, d=cfg.d, K=cfg.K, sigma_b2=cfg.sigma_b2)


def beta(pair, d: int, K: int) -> float:
    """Norm-pair constant of the adversarial-loss bound eps * beta * omega^(L/2)."""
    p, q = _check_pair(pair)
    if (p, q) == (1, 1):
        return math.sqrt(2.0 * K * K / (math.pi * d))
    if (p, q) == (1, 2):
        return math.sqrt(K / d)
    if (p, q) == (1, INF):
        return math.sqrt(2.0 * math.log(K) / d)
    if (p, q) == (2, 2):
        return 1.0 + math.sqrt(K / d)
    if (p, q) == (2, INF):
        return 1.0
    return math.sqrt(2.0 * d / math.pi)          # (inf, inf)


_LAMBDA_P = {1: lambda d: float(d), 2: lambda d: math.sqrt(d), INF: lambda d: 1.0}
_LAMBDA_Q = {1: lambda K: 1.0 / K, 2: lambda K: 1.0 / math.sqrt(K), INF: lambda K: 1.0}


def beta_scaled(pair, d: int, K: int) -> float:
    """beta with the dimension-normalized budget/loss scale factors folded in.

    The input-side factor is d, sqrt(d), 1 for p = 1, 2, inf and the
    output-side factor 1/K, 1/sqrt(K), 1 for q = 1, 2, inf.
    """
    p, q = _check_pair(pair)
    return _LAMBDA_P[p](d) * _LAMBDA_Q[q](K) * beta(pair, d, K)


def adv_loss_bound(params: TheoryParams, pair, eps: float) -> float:
    """Upper bound on the lq output deviation over the lp eps-ball."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return eps * beta(pair, params.d, params.K) * params.omega ** (params.L / 2.0)


def naive_decomposition_bounds(params: TheoryParams, u: float = 1.0,
                               v: float = 0.0) -> tuple[float, float]:
    """Spectral-norm bounds obtained by decomposing the Jacobian layer-wise.

    Returns (mp_bound, frobenius_bound): the product of per-factor spectral
    norms with each random matrix bounded at its Marchenko-Pastur edge, and
    the cruder product of Frobenius norms.  Both are exponentially looser
    than the direct bound and exist for side-by-side comparison plots.  The
    activation slopes enter through max(|u|, |v|), which alpha alone does not
    determine, hence the explicit arguments.
    """
    p = params
    smax_L = max(abs(u), abs(v)) ** p.L
    mp = smax_L * (1.0 + math.sqrt(p.N / p.d)) * (1.0 + math.sqrt(p.K / p.N)) \
        * (2.0 ** p.L) * p.sigma_w2 ** (p.L / 2.0)
    fro = smax_L * math.sqrt(p.K) * p.N ** ((p.L + 1) / 2.0) * p.sigma_w2 ** (p.L / 2.0)
    return mp, fro


@dataclass(frozen=True)
class EvolutionSpec:
    """Which weight-variance trajectory to predict, and with what constants."""

    mode: str                      # ADV_VANILLA | ADV_RESIDUAL | L2_REG
    eps: float
    pair: tuple
    init: float                    # sigma_w2 at t = 0
    params: TheoryParams

    def __post_init__(self):
        if self.mode not in (ADV_VANILLA, ADV_RESIDUAL, L2_REG):
            raise ValueError(f"unknown evolution mode {self.mode!r}")
        if self.mode != L2_REG:
            _check_pair(self.pair)
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.mode == ADV_RESIDUAL and self.params.alpha * self.init > 0.2:
            warnings.warn("residual evolution assumes alpha*sigma_w2(0) << 1; "
                          f"got {self.params.alpha * self.init:.3g}", AssumptionWarning,
                          stacklevel=2)


def sigma_w2_at(spec: EvolutionSpec, t: float, exact: bool = False) -> float:
    """Weight variance at training time t under the chosen regularizer.

    The default is the linearized small-t law; exact=True evaluates the full
    solution of the underlying flow equation instead (useful as a
    cross-check, identical to first order in t/N).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    p = spec.params
    if t > p.N / 10.0:
        warnings.warn(f"t={t:.3g} is not small compared to N={p.N}; the linearized "
                      "evolution law degrades beyond t << N", AssumptionWarning,
                      stacklevel=2)
    s0 = spec.init
    if spec.mode == L2_REG:
        if exact:
            return s0 * math.exp(-t / (p.L * p.N))
        return s0 * (1.0 - t / (p.L * p.N))

    b = beta(spec.pair, p.d, p.K)
    Lp = p.L / 2.0 - 1.0
    if spec.mode == ADV_VANILLA:
        om0 = p.alpha * s0
        rate = spec.eps * p.alpha * b * om0 ** Lp / p.N
        if exact:
            if Lp == 0.0:
                return s0 * math.exp(-rate * t)
            # d sigma/dt = -(eps a^{L/2} b / N) sigma^{L/2}
            return s0 * (1.0 + rate * Lp * t) ** (-1.0 / Lp)
        return s0 * (1.0 - rate * t)

    # shortcut architecture
    rate = spec.eps * p.alpha * b / p.N
    if exact:
        c = p.alpha * Lp * s0
        return s0 / ((1.0 + c) * math.exp(rate * t) - c)
    return s0 * (1.0 - (1.0 + p.alpha * Lp * s0) * rate * t)


def trainability_interval(arch: str, M: float, m: float, L: int) -> tuple[float, float]:
    """Closed interval of alpha*sigma_w2 where depth-L gradients stay in [m, M]."""
    if not (0 <= m <= 1 <= M):
        raise ValueError(f"need 0 <= m <= 1 <= M, got m={m}, M={M}")
    if arch == VANILLA:
        return (m ** (1.0 / L), M ** (1.0 / L))
    if arch == RESIDUAL:
        return (0.0, M ** (1.0 / L) - 1.0)
    raise ValueError(f"unknown arch {arch!r}")


def untrainable_T_vanilla(params: TheoryParams, pair, eps: float, m: float) -> float:
    """Training time beyond which a vanilla net falls out of the trainable band.

    Assumes alpha*sigma_w2(0) = 1 (warns otherwise).  Returns +inf when eps = 0,
    since without adversarial pressure the variance never decays.
    """
    if not (0 <= m <= 1):
        raise ValueError("m must lie in [0, 1]")
    if abs(params.omega - 1.0) > 1e-9:
        warnings.warn(f"threshold derived at alpha*sigma_w2(0)=1; omega(0)={params.omega:.4g}",
                      AssumptionWarning, stacklevel=2)
    if eps == 0:
        return math.inf
    b = beta(pair, params.d, params.K)
    return (1.0 - m ** (1.0 / params.L)) * params.N / (eps * params.alpha * b)


def trainable_onset_T_residual(params: TheoryParams, pair, eps: float, M: float) -> float:
    """Time for a badly initialized shortcut net to decay into the trainable band.

    Requires the band to be violated at t = 0, i.e. alpha*sigma_w2(0) >
    M^(1/L) - 1.  Returns +inf when eps = 0.
    """
    if params.arch != RESIDUAL:
        raise ValueError("onset threshold applies to shortcut networks")
    s0 = params.sigma_w2
    gap = params.alpha * s0 - (M ** (1.0 / params.L) - 1.0)
    if gap < 0:
        raise ValueError("trainability condition already satisfied at t=0")
    if eps == 0:
        return math.inf
    b = beta(pair, params.d, params.K)
    return gap * params.N / (eps * params.alpha ** (params.L / 2.0 + 1.0) * b * s0 ** (params.L / 2.0))


def fisher_rao_expected(params: TheoryParams, pair, eps: float, t: float) -> float:
    """Expected diagonal-Fisher capacity at training time t.

    Vanilla nets require alpha*sigma_w2(0) = 1 and sigma_b2 = 0; shortcut nets
    require alpha*sigma_w2(0) << 1.  Violations warn and still compute.
    """
    p = params
    if p.sigma_b2 != 0:
        warnings.warn("capacity law assumes sigma_b2 = 0", AssumptionWarning, stacklevel=2)
    b = beta(pair, p.d, p.K)
    if p.arch == VANILLA:
        if abs(p.omega - 1.0) > 1e-9:
            warnings.warn(f"vanilla capacity law assumes alpha*sigma_w2(0)=1; omega={p.omega:.4g}",
                          AssumptionWarning, stacklevel=2)
        return p.L * p.K * (1.0 - eps * p.alpha * b * p.L * t / p.N)
    s0 = p.sigma_w2
    if p.alpha * s0 > 0.2:
        warnings.warn("shortcut capacity law assumes alpha*sigma_w2(0) << 1",
                      AssumptionWarning, stacklevel=2)
    c = p.alpha * s0
    decay = (2.0 * (p.L - 1) * c + 1.0) * (1.0 + (p.L / 2.0 - 1.0) * c) * eps * p.alpha * b * t / p.N
    return p.L * p.K * c * (1.0 + (p.L - 1) * c - decay)


def geometric_series(omega_: float, L: int) -> float:
    """sum_{k=1}^{L} omega^(k-1)."""
    if omega_ == 1.0:
        return float(L)
    return (omega_ ** L - 1.0) / (omega_ - 1.0)


def mean_squared_output(params: TheoryParams, x_norm2: float) -> float:
    """Expected squared output entry for an input of l2 norm x_norm2."""
    p = params
    return (p.omega ** p.L / p.d) * x_norm2 ** 2 \
        + p.alpha * p.sigma_b2 * geometric_series(p.omega, p.L)


def flip_probability(params: TheoryParams, eps: float) -> float:
    """Probability that one signed-gradient step flips a single-output net.

    Valid for K = 1 and inputs normalized to l2 norm sqrt(d).
    """
    if params.K != 1:
        raise ValueError("flip probability is defined for single-output networks")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    p = params
    wL = p.omega ** p.L
    denom = math.pi * (wL + p.alpha * p.sigma_b2 * geometric_series(p.omega, p.L))
    return math.erf(eps * math.sqrt(wL * p.d / denom))

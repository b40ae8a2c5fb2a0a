"""Monte-Carlo harness and goodness-of-fit instruments.

Replicates run on independent seeded substreams keyed by (base_seed,
replicate); results are assembled by replicate index, so every reduction is
order-fixed and reproducible regardless of worker count.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import nets
from .parallel import pmap

#: asymptotic Kolmogorov-Smirnov critical coefficient at significance 0.01
KS_COEFF_001 = 1.628


@dataclass
class MCPlan:
    """What to sample: a network config, probe inputs, and entries to record.

    For each replicate a fresh network is drawn, its local-linear form is
    extracted at every probe input, and the requested slope (i, j) and offset
    (i,) entries are recorded, one column per (input, entry) combination.
    """

    replicates: int
    base_seed: int
    config: nets.NetworkConfig
    inputs: list = field(default_factory=list)          # probe input vectors
    slope_entries: list = field(default_factory=list)   # (i, j) entries of J
    offset_entries: list = field(default_factory=list)  # i entries of a

    def __post_init__(self):
        if self.replicates < 2:
            raise ValueError("need at least 2 replicates")
        for (i, j) in self.slope_entries:
            if not (0 <= i < self.config.K and 0 <= j < self.config.d):
                raise ValueError(f"slope entry ({i}, {j}) out of bounds")
        for i in self.offset_entries:
            if not (0 <= i < self.config.K):
                raise ValueError(f"offset entry {i} out of bounds")

    def column_labels(self) -> list:
        labels = []
        for xi in range(len(self.inputs)):
            labels += [f"J[{i},{j}]@x{xi}" for (i, j) in self.slope_entries]
            labels += [f"a[{i}]@x{xi}" for i in self.offset_entries]
        return labels


@dataclass
class FitReport:
    sample_mean: float
    sample_var: float
    ks_statistic: float
    ks_threshold_at_0_01: float
    passed: bool


def replicate_seed(base_seed: int, r: int) -> int:
    """Derive the 64-bit network seed of replicate r from the plan seed."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(r,))
    return int(ss.generate_state(1, np.uint64)[0])


def _one_replicate(plan: MCPlan, r: int) -> np.ndarray:
    net = nets.sample_network(plan.config, replicate_seed(plan.base_seed, r))
    row = []
    for x in plan.inputs:
        region = nets.extract_linear_region(net, x)
        row += [region.J[i, j] for (i, j) in plan.slope_entries]
        row += [region.a[i] for i in plan.offset_entries]
    return np.array(row)


def sample_entries(plan: MCPlan, workers: int = 1) -> np.ndarray:
    """Sample matrix of shape (replicates, columns); see MCPlan.column_labels."""
    rows = pmap(_one_replicate, [(plan, r) for r in range(plan.replicates)], workers)
    return np.vstack(rows)


def normal_cdf(x: np.ndarray, mean: float, var: float) -> np.ndarray:
    s = math.sqrt(2.0 * var)
    return np.array([0.5 * (1.0 + math.erf((float(t) - mean) / s)) for t in np.atleast_1d(x)])


def ks_statistic(samples: np.ndarray, mean: float, var: float) -> float:
    """One-sample Kolmogorov-Smirnov distance to a Gaussian CDF."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.size
    F = normal_cdf(xs, mean, var)
    grid = np.arange(n, dtype=np.float64)
    return float(max((F - grid / n).max(), ((grid + 1.0) / n - F).max()))


def ks_test(samples: np.ndarray, mean: float, var: float) -> FitReport:
    """Gaussian goodness-of-fit via the KS distance at significance 0.01."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < 50:
        raise ValueError("KS test needs at least 50 samples")
    if var <= 0:
        raise ValueError("target variance must be positive")
    if np.var(samples) == 0:
        raise ValueError("degenerate (constant) sample")
    d = ks_statistic(samples, mean, var)
    thr = KS_COEFF_001 / math.sqrt(samples.size)
    return FitReport(sample_mean=float(samples.mean()), sample_var=float(np.var(samples)),
                     ks_statistic=d, ks_threshold_at_0_01=thr, passed=d < thr)


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Two-sample KS distance and its 0.01-level threshold."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n, m = a.size, b.size
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / n
    cdf_b = np.searchsorted(b, allv, side="right") / m
    d = float(np.abs(cdf_a - cdf_b).max())
    thr = KS_COEFF_001 * math.sqrt((n + m) / (n * m))
    return d, thr


def correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation coefficient."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size or a.size < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    if np.var(a) == 0 or np.var(b) == 0:
        raise ValueError("zero-variance input")
    return float(np.corrcoef(a, b)[0, 1])


def max_abs_gaussian_check(n: int, sigma2: float, trials: int, seed: int = 0,
                           workers: int = 1) -> float:
    """Fraction of trials where max|z_i| of n N(0, sigma2) draws exceeds
    sqrt(2 sigma2 ln n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if sigma2 == 0:
        return 0.0
    thr = math.sqrt(2.0 * sigma2 * math.log(n))
    chunks = pmap(_max_abs_chunk, [(n, sigma2, thr, seed, c) for c in range(trials)], workers)
    return float(np.mean(chunks))


def _max_abs_chunk(n, sigma2, thr, seed, trial):
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(trial,))))
    z = rng.standard_normal(n) * math.sqrt(sigma2)
    return float(np.abs(z).max() > thr)

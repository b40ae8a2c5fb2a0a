"""Numerical laboratory for adversarial training in random piecewise-linear
networks: exact local-linear representations, closed-form loss bounds,
weight-variance dynamics, trainability thresholds, and capacity decay, with
attack and training harnesses that check the theory at desk scale."""

__version__ = "0.1.0"

from .nets import (NetworkConfig, Network, ForwardCache, LinearRegion,
                   sample_network, forward, extract_linear_region, backprop,
                   chi_profile, VANILLA, RESIDUAL)
from .theory import (TheoryParams, EvolutionSpec, beta, beta_scaled,
                     adv_loss_bound, sigma_w2_at, trainability_interval,
                     untrainable_T_vanilla, trainable_onset_T_residual,
                     fisher_rao_expected, flip_probability, mean_squared_output,
                     naive_decomposition_bounds, INF)
from .attack import (AttackSpec, AttackResult, project_lp_ball, pgd_attack,
                     operator_norm, single_sign_attack)
from .train import (TrainSpec, TrainTrace, grad_standard,
                    grad_adv_surrogate, grad_l2, fisher_rao_diag,
                    weight_variance)
from .stats import MCPlan, FitReport, sample_entries, ks_test, correlation, max_abs_gaussian_check
from .dataio import Dataset, load_idx, normalize_sqrt_d, write_csv, read_config

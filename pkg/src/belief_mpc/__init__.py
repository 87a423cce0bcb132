"""Belief-space MPC for linear systems with bilinear observations.

The library couples an input-dependent Kalman filter with a
deterministic belief planner whose covariance terms make sensing part of
the control problem, plus separation-principle baselines and a seeded
experiment harness that emits reproducible CSV artifacts.
"""

__version__ = "0.1.0"

from . import rng
from .controllers import (B_MPC, INIT_RANDOM, INIT_SEP_WARM, SEP, SEP_MPC,
                          SEP_MPC_LBFGS, BmpcResult, ControllerSpec,
                          RiccatiTable, bmpc_action, riccati_backward,
                          sep_action, sep_mpc_action, sep_mpc_action_lbfgs,
                          sep_mpc_warm_start)
from .estimation import Belief, kalman_gain, kalman_update
from .experiments import (EXPERIMENT_RUNNERS, ExperimentConfig,
                          ExperimentResult, load_config_file,
                          run_counterfactual, run_decompose, run_h_sweep,
                          run_heatmap, run_init_study, run_kf_diag,
                          run_rho_sweep, run_runtime_study, run_synthetic_gap,
                          trial_seed)
from .linalg import NumericsError
from .optim import LbfgsConfig, MinimizeResult, minimize, random_init
from .planning import (PlanningProblem, gradient, objective,
                       objective_and_gradient, stage_cost, surrogate_step,
                       terminal_cost)
from .rollout import RolloutRecord, noise_fingerprint, rollout
from .systems import (NoiseRealization, SystemModel, make_double_integrator,
                      make_random_system, observation_matrix,
                      rescale_spectral_radius, sample_noise, simulate_step,
                      spectral_radius)

__all__ = [
    "B_MPC", "EXPERIMENT_RUNNERS", "SEP", "SEP_MPC", "SEP_MPC_LBFGS",
    "INIT_RANDOM", "INIT_SEP_WARM", "Belief", "BmpcResult", "ControllerSpec",
    "ExperimentConfig", "ExperimentResult", "LbfgsConfig", "MinimizeResult",
    "NoiseRealization", "NumericsError", "PlanningProblem", "RiccatiTable",
    "RolloutRecord", "SystemModel", "bmpc_action", "gradient", "kalman_gain",
    "kalman_update", "load_config_file", "make_double_integrator",
    "make_random_system", "minimize", "noise_fingerprint", "objective",
    "objective_and_gradient", "observation_matrix", "random_init",
    "rescale_spectral_radius", "riccati_backward", "rng", "rollout",
    "run_counterfactual", "run_decompose", "run_h_sweep", "run_heatmap",
    "run_init_study", "run_kf_diag", "run_rho_sweep", "run_runtime_study",
    "run_synthetic_gap", "sample_noise", "sep_action", "sep_mpc_action",
    "sep_mpc_action_lbfgs", "sep_mpc_warm_start", "simulate_step",
    "spectral_radius", "stage_cost", "surrogate_step", "terminal_cost",
    "trial_seed",
]

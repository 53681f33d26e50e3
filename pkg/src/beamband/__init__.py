"""Bandit-driven mmWave link-configuration simulator."""

from .backend import backend_name
from .bandits import (ArmEstimate, PolicyKind, PolicyState, RegretLedger,
                      kl_bernoulli, kl_ucb_index, new_policy, record_regret,
                      select_arm, ts_sample_and_select, ucb1_index, update)
from .envsim import (Codebook, EnvParams, LinkBudget, SweepResult, WorldState,
                     beam_gain_dbi, default_params, init_realization,
                     path_loss_db, slot_effective_rate, snr_db, step_mobility,
                     sweep)
from .scenarios import (Aggregate, RunTrace, ScenarioConfig, SlotRecord,
                        StaticEvaluation, aggregate, default_scenario_env,
                        evaluate_static_policies, make_config, run_scenario_i,
                        run_scenario_ii, run_scenario_iii, slots_to_reach)
from .tree import (Layer, PathSelection, TreeNode, backpropagate, build_tree,
                   select_best_k, select_path)

__version__ = "0.1.0"

from .approx_certify import default_certify_config, run_approx_certify
from .bounds_io import default_bounds_config, emit_bounds
from .config import build_dqn_config, build_env, default_study_config, merge
from .manifest import config_hash, read_csv, write_csv, write_manifest
from .plots import render_report_figures
from .policy_io import policy_from_json, policy_to_json
from .studies import (
    best_window,
    run_data_size_study,
    run_depth_sweep,
    run_recommender_study,
    run_reward_compare,
    stabilization_point,
)

__all__ = [
    "default_certify_config",
    "run_approx_certify",
    "default_bounds_config",
    "emit_bounds",
    "build_dqn_config",
    "build_env",
    "default_study_config",
    "merge",
    "config_hash",
    "read_csv",
    "write_csv",
    "write_manifest",
    "render_report_figures",
    "policy_from_json",
    "policy_to_json",
    "best_window",
    "run_data_size_study",
    "run_depth_sweep",
    "run_recommender_study",
    "run_reward_compare",
    "stabilization_point",
]

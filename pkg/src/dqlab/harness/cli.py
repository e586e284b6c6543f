"""Command-line front end.

Subcommands: approx, bounds, gen-data, fit-q, dqn,
study {depth,reward,datasize,recsys}, report.  Global flags: --config,
--seed, --out, --threads.  Exit codes: 0 success, 1 configuration error,
2 failed acceptance rows in approx or report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ..core import RngContract
from ..nets import TrainerConfig, widths_for_budget
from ..qlearn import HypothesisSpace, dqn_train, fitted_q_iteration
from .approx_certify import SCHEMA as CERT_SCHEMA
from .approx_certify import default_certify_config, run_approx_certify
from .bounds_io import SCHEMA as BOUNDS_SCHEMA
from .bounds_io import default_bounds_config, emit_bounds
from .config import (
    build_dqn_config,
    build_env,
    default_study_config,
    load_config,
    merge,
)
from .manifest import config_hash, read_csv, write_csv, write_manifest
from .plots import render_report_figures
from .policy_io import FEATURE_MAPS, policy_to_json
from .studies import (
    SCHEMAS,
    run_data_size_study,
    run_depth_sweep,
    run_recommender_study,
    run_reward_compare,
)


class ConfigError(Exception):
    pass


def _out_dir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _user_config(args) -> dict | None:
    if args.config is None:
        return None
    if not os.path.exists(args.config):
        raise ConfigError(f"config file not found: {args.config}")
    try:
        return load_config(args.config)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def cmd_approx(args) -> int:
    out = _out_dir(args)
    cfg = merge(default_certify_config(), _user_config(args))
    rows = run_approx_certify(cfg, args.seed, out_dir=out)
    h = config_hash(cfg, args.seed)
    schema, cols = CERT_SCHEMA
    write_csv(
        os.path.join(out, "approx_certify.csv"), schema, cols,
        [(r.d, r.N, r.s, r.tau, r.p, r.measured_error, r.bound, r.passed, r.spec_file)
         for r in rows],
        h,
    )
    outputs = ["approx_certify.csv"] + [r.spec_file for r in rows if r.spec_file]
    rate_cfg = cfg.get("rate_study")
    if rate_cfg:
        rate_rows = _run_rate_study(rate_cfg, args.seed)
        write_csv(
            os.path.join(out, "rate_study.csv"), "rate-study-v1",
            ["budget", "depth", "measured_error", "predicted_bound", "seed"],
            rate_rows, h,
        )
        outputs.append("rate_study.csv")
    write_manifest(out, "approx", cfg, args.seed, outputs)
    n_fail = sum(not r.passed for r in rows)
    print(f"approx: {len(rows)} rows, {n_fail} failed -> {out}/approx_certify.csv")
    return 2 if n_fail else 0


def _run_rate_study(cfg: dict, master_seed: int):
    from ..approx import (
        CubicPartition,
        PiecewiseSmoothSpec,
        Polynomial,
        empirical_rate_study,
    )

    part = CubicPartition(cfg["d"], cfg["N"])
    pieces = tuple(
        Polynomial(tuple((c, tuple(e)) for c, e in piece)) for piece in cfg["pieces"]
    )
    spec = PiecewiseSmoothSpec(
        part, tuple(cfg["support"]), pieces,
        smoothness=cfg["smoothness"], lipschitz=cfg["lipschitz"],
    )
    report = empirical_rate_study(
        spec,
        budgets=tuple(cfg["budgets"]),
        p=cfg.get("p", 1.0),
        seeds=tuple(cfg.get("seeds", [0])),
        rng=RngContract(master_seed),
        n_train=cfg.get("n_train", 4000),
        error_resolution=cfg.get("error_resolution", 256),
    )
    rows = [
        (r.budget, r.depth, r.measured_error, r.predicted_bound, r.seed)
        for r in report.rows
    ]
    if report.constructive is not None:
        c = report.constructive
        rows.append((c.budget, c.depth, c.measured_error, c.predicted_bound, c.seed))
    return rows


def cmd_bounds(args) -> int:
    out = _out_dir(args)
    cfg = merge(default_bounds_config(), _user_config(args))
    rows, detail = emit_bounds(cfg)
    h = config_hash(cfg, args.seed)
    schema, cols = BOUNDS_SCHEMA
    write_csv(os.path.join(out, "bounds.csv"), schema, cols, rows, h)
    with open(os.path.join(out, "bounds_report.json"), "w") as fh:
        json.dump(detail, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out, "bounds", cfg, args.seed, ["bounds.csv", "bounds_report.json"])
    print(f"bounds: {len(rows)} values -> {out}/bounds.csv")
    return 0


def cmd_gen_data(args) -> int:
    from ..core import save_dataset
    from ..envs import UniformBehavior, generate_dataset

    cfg = _user_config(args)
    if not cfg or "env" not in cfg or "m" not in cfg:
        raise ConfigError("gen-data needs a config with 'env' and 'm'")
    env = build_env(cfg["env"])
    behavior = cfg.get("behavior", "uniform")
    if behavior != "uniform":
        raise ConfigError("gen-data supports the uniform behavior policy")
    out = _out_dir(args)
    ds = generate_dataset(env, UniformBehavior(), cfg["m"], seed=args.seed)
    save_dataset(ds, os.path.join(out, "dataset.jsonl"))
    write_manifest(out, "gen-data", cfg, args.seed, ["dataset.jsonl"])
    print(f"gen-data: {len(ds)} trajectories -> {out}/dataset.jsonl")
    return 0


def _space_from(cfg: dict, clamp: float) -> HypothesisSpace:
    kind = cfg["kind"]
    if kind == "tabular":
        return HypothesisSpace(
            kind="tabular", clamp=clamp,
            n_state_cells=cfg["n_state_cells"], n_actions=cfg["n_actions"],
        )
    if kind == "linear":
        name = cfg.get("features", "affine")
        if name not in FEATURE_MAPS:
            raise ConfigError(f"unknown feature map {name!r}")
        return HypothesisSpace(
            kind="linear", clamp=clamp,
            features=FEATURE_MAPS[name], feature_dim=cfg.get("feature_dim", 0),
        )
    if kind in ("shallow", "deep"):
        return HypothesisSpace(kind=kind, clamp=clamp, widths=tuple(cfg["widths"]))
    raise ConfigError(f"unknown hypothesis kind {kind!r}")


def cmd_fit_q(args) -> int:
    from ..core import load_dataset

    cfg = _user_config(args)
    if not cfg or "dataset" not in cfg or "spaces" not in cfg:
        raise ConfigError("fit-q needs a config with 'dataset' and 'spaces'")
    ds = load_dataset(cfg["dataset"])
    T = ds.problem.horizon
    clamp = cfg.get("clamp", 2.0 * ds.problem.reward_bound)
    spaces_cfg = cfg["spaces"]
    if isinstance(spaces_cfg, dict):
        spaces_cfg = [spaces_cfg] * T
    spaces = [_space_from(sc, clamp) for sc in spaces_cfg]
    trainer = TrainerConfig(rng=RngContract(args.seed), **cfg.get("trainer", {}))
    res = fitted_q_iteration(ds, spaces, trainer, mode=cfg.get("mode", "markov"))
    out = _out_dir(args)
    feature_names = {
        t + 1: sc.get("features", "affine")
        for t, sc in enumerate(spaces_cfg) if sc["kind"] == "linear"
    }
    with open(os.path.join(out, "policy.json"), "w") as fh:
        fh.write(policy_to_json(res.policy, feature_names) + "\n")
    h = config_hash(cfg, args.seed)
    write_csv(
        os.path.join(out, "fitq.csv"), "fitq-v1", ["stage", "loss"],
        [(t + 1, loss) for t, loss in enumerate(res.stage_losses)], h,
    )
    write_manifest(out, "fit-q", cfg, args.seed, ["policy.json", "fitq.csv"])
    print(f"fit-q: {T} stages -> {out}/policy.json")
    return 0


def cmd_dqn(args) -> int:
    cfg = _user_config(args)
    if not cfg or "env" not in cfg:
        raise ConfigError("dqn needs a config with 'env'")
    env = build_env(cfg["env"])
    dqn_cfg = build_dqn_config(cfg.get("dqn", {}), args.seed, cfg.get("seed_index", 0))
    if "widths" in cfg:
        widths = tuple(cfg["widths"])
    else:
        input_dim = env.problem.state_dims[0] + env.problem.action_dims[0]
        widths = widths_for_budget(
            input_dim, cfg.get("depth", 3), cfg.get("param_budget", 700)
        )[1:]
    res = dqn_train(env, widths=widths, cfg=dqn_cfg)
    out = _out_dir(args)
    h = config_hash(cfg, args.seed)
    write_csv(
        os.path.join(out, "curve.csv"), "curve-v1",
        ["iteration", "samples_consumed", "train_loss", "eval_score", "eval_stderr", "seed"],
        [(p.iteration, p.samples_consumed, p.train_loss, p.eval_score, p.eval_stderr, p.seed)
         for p in res.curve],
        h,
    )
    with open(os.path.join(out, "policy.json"), "w") as fh:
        fh.write(policy_to_json(res.policy) + "\n")
    write_manifest(out, "dqn", cfg, args.seed, ["curve.csv", "policy.json"])
    print(f"dqn: {len(res.curve)} curve points -> {out}/curve.csv")
    return 0


def cmd_study(args) -> int:
    kind = args.kind
    cfg = merge(default_study_config(kind), _user_config(args))
    out = _out_dir(args)
    h = config_hash(cfg, args.seed)
    outputs = []
    if kind == "depth":
        rows, seg_rows, failures = run_depth_sweep(cfg, args.seed, args.threads)
        schema, cols = SCHEMAS["depth_sweep"]
        write_csv(os.path.join(out, "depth_sweep.csv"), schema, cols, rows, h)
        schema, cols = SCHEMAS["depth_segments"]
        write_csv(os.path.join(out, "depth_segments.csv"), schema, cols, seg_rows, h)
        outputs = ["depth_sweep.csv", "depth_segments.csv"]
    elif kind == "reward":
        rows, failures = run_reward_compare(cfg, args.seed, args.threads)
        schema, cols = SCHEMAS["reward_compare"]
        write_csv(os.path.join(out, "reward_compare.csv"), schema, cols, rows, h)
        outputs = ["reward_compare.csv"]
    elif kind == "datasize":
        rows, stab_rows, failures = run_data_size_study(cfg, args.seed, args.threads)
        schema, cols = SCHEMAS["data_size"]
        write_csv(os.path.join(out, "data_size.csv"), schema, cols, rows, h)
        schema, cols = SCHEMAS["data_size_stab"]
        write_csv(os.path.join(out, "data_size_stabilization.csv"), schema, cols, stab_rows, h)
        outputs = ["data_size.csv", "data_size_stabilization.csv"]
    elif kind == "recsys":
        rows, final_rows, failures = run_recommender_study(cfg, args.seed, args.threads)
        schema, cols = SCHEMAS["recommender"]
        write_csv(os.path.join(out, "recommender.csv"), schema, cols, rows, h)
        schema, cols = SCHEMAS["recommender_final"]
        write_csv(os.path.join(out, "recommender_final.csv"), schema, cols, final_rows, h)
        outputs = ["recommender.csv", "recommender_final.csv"]
    else:
        raise ConfigError(f"unknown study kind {kind!r}")
    write_manifest(out, f"study-{kind}", cfg, args.seed, outputs, failures)
    status = f"{len(failures)} failed cells" if failures else "all cells finished"
    print(f"study {kind}: {status} -> {out}")
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    figures = render_report_figures(out)
    summary_rows = []
    failed = 0
    for name in sorted(os.listdir(out)):
        if not name.endswith(".csv") or name == "report_summary.csv":
            continue
        cols, rows = read_csv(os.path.join(out, name))
        summary_rows.append((name, len(rows)))
        if "pass" in cols:
            idx = cols.index("pass")
            failed += sum(1 for r in rows if r[idx] != "true")
    write_csv(
        os.path.join(out, "report_summary.csv"), "report-summary-v1",
        ["file", "rows"], summary_rows, config_hash({"report": True}, args.seed),
    )
    print(f"report: {len(figures)} figures, {failed} failed rows -> {out}")
    return 2 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dqlab",
        description="Finite-horizon Q-learning laboratory: constructive "
        "approximation certification, bound reports, offline fitted-Q, DQN "
        "studies, and figure rendering.",
    )
    parser.add_argument("--config", help="JSON config file", default=None)
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="parallel cells")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("approx", help="certify the constructive approximants")
    sub.add_parser("bounds", help="evaluate the generalization-bound formulas")
    sub.add_parser("gen-data", help="generate an offline dataset")
    sub.add_parser("fit-q", help="batch fitted-Q iteration on a dataset")
    sub.add_parser("dqn", help="train a DQN on an environment")
    study = sub.add_parser("study", help="run an experiment grid")
    study.add_argument("kind", choices=["depth", "reward", "datasize", "recsys"])
    sub.add_parser("report", help="summarize an output directory and render figures")

    args = parser.parse_args(argv)
    handlers = {
        "approx": cmd_approx,
        "bounds": cmd_bounds,
        "gen-data": cmd_gen_data,
        "fit-q": cmd_fit_q,
        "dqn": cmd_dqn,
        "study": cmd_study,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError, FileNotFoundError) as exc:
        print(f"config error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

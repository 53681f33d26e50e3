"""Command-line entry point.

``beamband run`` executes one scenario for a set of policies and writes
``<prefix>.csv`` (one row per policy/realization/slot) plus ``<prefix>.meta``
(JSON: resolved config, seed, static baselines, tail-mean summary).
``beamband baselines`` evaluates the static arm grid only.

Every run first evaluates the scenario's static arms with matched seeds: the
genius mean anchors the regret column, and for Scenario I the genius/worst
traces are added to the CSV as their own labeled policies.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import traceback
from fractions import Fraction
from pathlib import Path

from .backend import backend_name
from .envsim import EnvParams, LinkBudget
from .scenarios import (EngineSpec, ScenarioConfig, aggregate,
                        default_scenario_env, evaluate_static_policies,
                        run_policy, run_scenario_i, run_scenario_ii,
                        run_scenario_iii, slots_to_reach)

TAIL_WINDOW = 100

_CONFIG_FIELDS = ("scenario", "periods_ms", "sector_counts", "ratio", "slots",
                  "realizations", "seed", "env")
_ENV_FIELDS = tuple(f for f in EnvParams.__dataclass_fields__ if f != "budget")
_BUDGET_FIELDS = tuple(LinkBudget.__dataclass_fields__)

_SCENARIO_POLICIES = {
    1: ("random", "ucb1", "klucb", "ts", "tsbeta"),
    2: ("random", "flat", "mcts"),
    3: ("random", "mcts"),
}
_DEFAULT_POLICIES = {1: ("ucb1", "ts", "random"), 2: ("mcts", "flat", "random"),
                     3: ("mcts",)}


def parse_ratio(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad ratio {text!r}: {exc}") from None
    return value


def validate_config(document: dict) -> tuple[ScenarioConfig | None, list[str]]:
    """Resolve a config document (defaults applied) or report each violated
    constraint with its field path."""
    problems: list[str] = []
    doc = dict(document)

    for key in doc:
        if key not in _CONFIG_FIELDS:
            problems.append(f"{key}: unknown field")

    scenario = doc.get("scenario")
    if scenario not in (1, 2, 3):
        problems.append(f"scenario: must be 1, 2 or 3, got {scenario!r}")
        return None, problems

    kwargs: dict = {}
    if "periods_ms" in doc:
        try:
            kwargs["periods_ms"] = tuple(float(p) for p in doc["periods_ms"])
        except (TypeError, ValueError):
            problems.append("periods_ms: must be a list of numbers")
    if "sector_counts" in doc:
        try:
            kwargs["sector_counts"] = tuple(int(n) for n in doc["sector_counts"])
        except (TypeError, ValueError):
            problems.append("sector_counts: must be a list of integers")
    if "ratio" in doc:
        try:
            kwargs["ratio"] = Fraction(str(doc["ratio"]))
        except (ValueError, ZeroDivisionError):
            problems.append(f"ratio: not a rational number: {doc['ratio']!r}")
    for key in ("slots", "realizations"):
        if key in doc:
            if not isinstance(doc[key], int) or isinstance(doc[key], bool):
                problems.append(f"{key}: must be an integer")
            else:
                kwargs[key] = doc[key]
    if "seed" in doc:
        seed = doc["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
            problems.append("seed: must be an unsigned 64-bit integer")
        else:
            kwargs["seed"] = seed

    env_doc = doc.get("env", {})
    if not isinstance(env_doc, dict):
        problems.append("env: must be an object")
        env_doc = {}
    env_over: dict = {}
    for key, value in env_doc.items():
        if key not in _ENV_FIELDS and key not in _BUDGET_FIELDS:
            problems.append(f"env.{key}: unknown field")
            continue
        env_over[key] = tuple(value) if isinstance(value, list) else value
    if not problems or env_over:
        try:
            kwargs["env"] = default_scenario_env(scenario, **env_over)
        except (ValueError, TypeError) as exc:
            problems.append(f"env: {exc}")

    if problems:
        return None, problems
    kwargs.setdefault("slots", 300 if scenario == 3 else 500)
    cfg = ScenarioConfig(scenario=scenario, **kwargs)
    problems = cfg.validate()
    return (cfg, problems) if not problems else (None, problems)


def _merged_document(args) -> dict:
    doc: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        doc.update(loaded)
    doc["scenario"] = args.scenario if args.scenario is not None else doc.get("scenario")
    for key in ("slots", "realizations", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    return doc


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("BEAMBAND_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValueError(f"BEAMBAND_THREADS: {exc}") from None
    return 1


def _config_json(cfg: ScenarioConfig) -> dict:
    env = dataclasses.asdict(cfg.env)
    return {
        "scenario": cfg.scenario,
        "periods_ms": list(cfg.periods_ms),
        "sector_counts": list(cfg.sector_counts),
        "ratio": str(cfg.ratio),
        "slots": cfg.slots,
        "realizations": cfg.realizations,
        "seed": cfg.seed,
        "node_policy": cfg.node_policy.value,
        "leaf_policy": cfg.leaf_policy.value,
        "env": env,
    }


def _arm_key(arm: tuple[float, int]) -> str:
    return f"{arm[0]:g}ms/{arm[1]}"


def write_csv(path: Path, runs: list[tuple[str, list]]) -> int:
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy_label", "realization_id", "slot_index",
                         "period_ms", "num_sectors", "R", "effective_rate_gbps",
                         "normalized_reward", "cumulative_regret"])
        for label, traces in runs:
            for trace in traces:
                cum = 0.0
                for t in range(len(trace)):
                    cum += float(trace.regret[t])
                    writer.writerow([
                        label, trace.realization_id, t,
                        float(trace.period_ms[t]), int(trace.num_sectors[t]),
                        float(trace.ratio[t]), float(trace.rate_gbps[t]),
                        float(trace.reward[t]), cum])
                    rows += 1
    return rows


def cmd_run(args) -> int:
    doc = _merged_document(args)
    cfg, problems = validate_config(doc)

    ratios = args.ratio or [Fraction(1, 2)]
    if cfg is not None and cfg.scenario == 3:
        for ratio in ratios:
            rcfg = dataclasses.replace(cfg, ratio=ratio)
            problems.extend(p for p in rcfg.validate() if p not in problems)
    elif cfg is not None and args.ratio:
        problems.append("ratio: only meaningful for scenario 3")

    policies = list(args.policy or ())
    if cfg is not None:
        allowed = _SCENARIO_POLICIES[cfg.scenario]
        if not policies:
            policies = list(_DEFAULT_POLICIES[cfg.scenario])
        for name in policies:
            if name not in allowed:
                problems.append(
                    f"policy: {name!r} not valid for scenario {cfg.scenario} "
                    f"(choose from {', '.join(allowed)})")
        if len(set(policies)) != len(policies):
            problems.append("policy: duplicate policy labels")

    if problems or cfg is None:
        for p in problems:
            print(f"config error - {p}", file=sys.stderr)
        return 2

    threads = _resolve_threads(args)
    out_prefix = Path(args.out)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)

    static_eval = evaluate_static_policies(cfg, threads=threads)
    norm_means = static_eval.norm_means

    runs: list[tuple[str, list]] = []
    for name in policies:
        if cfg.scenario == 1:
            traces = run_scenario_i(cfg, name, static_norm_means=norm_means,
                                    threads=threads)
            runs.append((name, traces))
        elif cfg.scenario == 2:
            traces = run_scenario_ii(cfg, name, static_norm_means=norm_means,
                                     threads=threads)
            runs.append((name, traces))
        elif name == "mcts":
            for ratio in ratios:
                rcfg = dataclasses.replace(cfg, ratio=ratio)
                label = f"mcts(R={ratio})"
                traces = run_scenario_iii(rcfg, "mcts", label=label,
                                          static_norm_means=norm_means,
                                          threads=threads)
                runs.append((label, traces))
        else:
            traces = run_scenario_iii(cfg, "random", static_norm_means=norm_means,
                                      threads=threads)
            runs.append(("random", traces))

    if cfg.scenario == 1:
        for label, arm in (("genius", static_eval.genius_arm),
                           ("worst", static_eval.worst_arm)):
            spec = EngineSpec(engine="static", arm=arm)
            runs.append((label, run_policy(cfg, spec, label,
                                           static_norm_means=norm_means,
                                           threads=threads)))

    csv_path = out_prefix.parent / (out_prefix.name + ".csv")
    rows = write_csv(csv_path, runs)

    summary = {}
    for label, traces in runs:
        agg = aggregate(traces, window=TAIL_WINDOW)
        summary[label] = {
            "tail_mean_gbps": agg.tail_mean_gbps,
            "slots_to_90pct_tail": slots_to_reach(agg.per_slot_mean_gbps, 0.9,
                                                  agg.tail_mean_gbps),
            "final_mean_cumulative_regret": float(agg.mean_cumulative_regret[-1]),
        }

    meta = {
        "tool": "beamband",
        "command": "run",
        "backend": backend_name(),
        "config": _config_json(cfg),
        "overrides": {k: v for k, v in doc.items() if k != "scenario"},
        "ratios": [str(r) for r in ratios] if cfg.scenario == 3 else None,
        "policies": [label for label, _ in runs],
        "tail_window": TAIL_WINDOW,
        "static_mean_gbps": {_arm_key(a): static_eval.mean_gbps[a]
                             for a in static_eval.arms},
        "genius_arm": list(static_eval.genius_arm),
        "worst_arm": list(static_eval.worst_arm),
        "genius_mean_gbps": static_eval.genius_mean_gbps,
        "worst_mean_gbps": static_eval.worst_mean_gbps,
        "summary": summary,
        "csv": csv_path.name,
        "rows": rows,
    }
    meta_path = out_prefix.parent / (out_prefix.name + ".meta")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    print(f"wrote {csv_path} ({rows} rows) and {meta_path}")
    return 0


def cmd_baselines(args) -> int:
    doc = _merged_document(args)
    cfg, problems = validate_config(doc)
    if problems or cfg is None:
        for p in problems:
            print(f"config error - {p}", file=sys.stderr)
        return 2
    threads = _resolve_threads(args)
    static_eval = evaluate_static_policies(cfg, threads=threads)
    print(f"{'arm':>14}  {'mean rate (Gbps)':>18}")
    for arm in static_eval.arms:
        tag = ""
        if arm == static_eval.genius_arm:
            tag = "  <- genius"
        if arm == static_eval.worst_arm:
            tag = "  <- worst"
        print(f"{_arm_key(arm):>14}  {static_eval.mean_gbps[arm]:>18.6f}{tag}")
    if args.out:
        out_prefix = Path(args.out)
        out_prefix.parent.mkdir(parents=True, exist_ok=True)
        meta = {
            "tool": "beamband",
            "command": "baselines",
            "backend": backend_name(),
            "config": _config_json(cfg),
            "static_mean_gbps": {_arm_key(a): static_eval.mean_gbps[a]
                                 for a in static_eval.arms},
            "genius_arm": list(static_eval.genius_arm),
            "worst_arm": list(static_eval.worst_arm),
        }
        path = out_prefix.parent / (out_prefix.name + ".meta")
        path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamband",
        description="Bandit-driven mmWave link-configuration simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", type=int, choices=(1, 2, 3))
        p.add_argument("--realizations", type=int)
        p.add_argument("--slots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--config", help="JSON config document")
        p.add_argument("--threads", type=int,
                       help="worker processes (default: BEAMBAND_THREADS or 1)")

    run = sub.add_parser("run", help="run a scenario and write CSV traces")
    common(run)
    run.add_argument("--policy", action="append",
                     help="policy to run (repeatable); scenario-dependent")
    run.add_argument("--ratio", action="append", type=parse_ratio,
                     help="sweep ratio p/q for scenario 3 (repeatable)")
    run.add_argument("--out", required=True, help="output path prefix")
    run.set_defaults(func=cmd_run)

    baselines = sub.add_parser("baselines",
                               help="evaluate the static arm grid only")
    common(baselines)
    baselines.add_argument("--out", help="optional output path prefix")
    baselines.set_defaults(func=cmd_baselines)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001 - contract: runtime failure exits 1
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())

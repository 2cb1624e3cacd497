"""Command-line entry point: single runs, sweeps, the tiny-instance check and graph dumps."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

from .conflict import ConflictGraph
from .experiments import (AXES, PROFILES, SweepConfig, evaluate_scenario, oracle_check, profile,
                          result_row, run_sweep, write_csv)
from .master import InfeasibleError, Objective, RmpMode, build_rmp, write_lp_text
from .model import Scenario, ScenarioConfig, ScenarioError, generate_scenario
from .pricing import PRICERS


def load_config(path: str | None, profile_name: str | None) -> ScenarioConfig:
    """Profile defaults overlaid with the keys of a JSON config file."""
    cfg = profile(profile_name or "desk")
    if path:
        with open(path) as fh:
            data = json.load(fh)
        merged = cfg.to_dict()
        merged.update(data)
        cfg = ScenarioConfig.from_dict(merged)
    cfg.validate()
    return cfg


def _apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    changes = {k: getattr(args, k) for k in ("seed", "epsilon", "pricer", "objective")
               if getattr(args, k, None) is not None}
    return replace(cfg, **changes)


def _scenario(args: argparse.Namespace, cfg: ScenarioConfig) -> Scenario:
    if getattr(args, "scenario_in", None):
        with open(args.scenario_in) as fh:
            return Scenario.from_json(fh.read())
    return generate_scenario(cfg, cfg.seed)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config, args.profile), args)
    scenario = _scenario(args, cfg)
    if args.scenario_out:
        with open(args.scenario_out, "w") as fh:
            fh.write(scenario.to_json())
    t0 = time.perf_counter()
    result, cg_rate, base_rate, gain = evaluate_scenario(
        scenario, cfg.epsilon, cfg.objective, cfg.pricer, rerun_exact=args.rerun_exact)
    row = result_row("none", 0, cfg.seed, result, cg_rate, base_rate, gain,
                     time.perf_counter() - t0)
    write_csv([row], sys.stdout)
    if args.trace:
        with open(args.trace, "w") as fh:
            result.write_trace_csv(fh)
    if args.dump_lp:
        with open(args.dump_lp, "w") as fh:
            mode = RmpMode(Objective(cfg.objective))
            write_lp_text(build_rmp(ConflictGraph(scenario), result.pool, mode).problem, fh)
    return 0


def _parse_values(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config, args.profile or "scaled"), args)
    sweep = SweepConfig(base=cfg, axis=args.axis, values=_parse_values(args.values),
                        seeds=args.seeds, max_iterations=args.max_iterations)
    rows = run_sweep(sweep, jobs=args.jobs)
    if args.out:
        with open(args.out, "w") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return 0 if all(r["status"] == "ok" for r in rows) else 2


def cmd_oracle_check(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    records = oracle_check(args.count, args.seed, args.epsilon)
    for r in records:
        print(f"seed={r.seed} tuples={r.n_tuples} star={r.delta_star:.9g} "
              f"upper={r.delta_u:.9g} lower={r.delta_l:.9g} exact={r.delta_exact:.9g} "
              f"baseline={r.baseline_delta:.9g} {'ok' if r.ok else 'MISMATCH'}")
    ok = all(r.ok for r in records)
    print(f"{'PASS' if ok else 'FAIL'} {sum(r.ok for r in records)}/{len(records)} "
          f"in {time.perf_counter() - t0:.1f} s")
    return 0 if ok else 1


def cmd_dump_graph(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config, args.profile), args)
    graph = ConflictGraph(_scenario(args, cfg))
    if args.out:
        with open(args.out, "w") as fh:
            graph.write_edge_list(fh)
    else:
        graph.write_edge_list(sys.stdout)
    return 0


def cmd_show_config(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config, args.profile), args)
    print(json.dumps(cfg.to_dict(), indent=2))
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file whose keys override the profile")
    p.add_argument("--profile", choices=sorted(PROFILES), help="base parameter set")
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--pricer", choices=sorted(PRICERS))
    p.add_argument("--objective", choices=[o.value for o in Objective])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallcell", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="solve one scenario and print a CSV row")
    _common(p)
    p.add_argument("--scenario-in", help="load a scenario JSON instead of generating one")
    p.add_argument("--scenario-out", help="write the generated scenario as JSON")
    p.add_argument("--trace", help="write the per-iteration bound trace as CSV")
    p.add_argument("--dump-lp", help="write the final master LP in text form")
    p.add_argument("--rerun-exact", action="store_true",
                   help="re-solve with epsilon = 0 when the verdict is borderline")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="vary one parameter over seeds and emit CSV")
    _common(p)
    p.add_argument("--axis", required=True, choices=sorted(AXES))
    p.add_argument("--values", required=True, help="comma-separated axis values (GB for cache_size)")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="compare column generation with full enumeration")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.03)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("dump-graph", help="write the conflict graph as an edge list")
    _common(p)
    p.add_argument("--scenario-in")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_graph)

    p = sub.add_parser("show-config", help="print the effective configuration")
    _common(p)
    p.set_defaults(func=cmd_show_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, InfeasibleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Profiles, metrics and parameter sweeps that reproduce the throughput trends."""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, TextIO

import numpy as np

from .baseline import baseline_schedule, baseline_throughput
from .colgen import CgResult, Verdict, run_column_generation
from .conflict import ConflictGraph
from .master import InfeasibleError, Objective, RmpMode
from .model import Scenario, ScenarioConfig, generate_scenario
from .oracle import solve_full_lp
from .pricing import get_pricer, solve_pricing_exact

CSV_COLUMNS = ["axis", "axis_value", "seed", "status", "delta_u", "delta_l", "verdict",
               "cg_rate_mbps", "baseline_rate_mbps", "gain_pct", "iterations", "pool_size",
               "runtime_ms"]

# axis name -> (config key, multiplier from the axis unit to the config unit)
AXES = {
    "cache_size": ("cache_bytes", 1e9),  # gigabytes
    "n_files": ("n_files", 1),
    "n_users": ("n_users", 1),
    "n_sbs": ("n_sbs", 1),
    "tx_range": ("tx_range_m", 1.0),  # metres
}

PROFILES: dict[str, ScenarioConfig] = {
    "table1": ScenarioConfig(),
    "scaled": ScenarioConfig(n_sbs=6, n_users=30, n_files=30, n_secondary_channels=4,
                             channels_per_sbs=2, channels_per_user=2),
    "desk": ScenarioConfig(radius_m=200.0, n_sbs=3, n_users=8, n_files=8,
                           n_secondary_channels=2, channels_per_sbs=1, channels_per_user=1,
                           cache_bytes=800e6, slot_s=600.0, pricer="exact"),
    "tiny": ScenarioConfig(radius_m=150.0, n_sbs=3, n_users=4, n_files=4,
                           n_secondary_channels=2, channels_per_sbs=1, channels_per_user=1,
                           cache_bytes=400e6, tx_range_m=80.0, slot_s=600.0, pricer="exact"),
}


def profile(name: str) -> ScenarioConfig:
    try:
        return replace(PROFILES[name])
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def avg_user_rate(delta: float, scenario: Scenario) -> float:
    """Average per-user rate in Mb/s when all demand is served in ``delta`` slots."""
    demand = scenario.demand_bits()
    if demand == 0:
        return 0.0
    if delta <= 0:
        raise RuntimeError("positive demand served in zero time")
    return demand / (len(scenario.users) * delta * scenario.slot_s) / 1e6


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class SweepConfig:
    base: ScenarioConfig = field(default_factory=lambda: profile("scaled"))
    axis: str = "cache_size"
    values: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    seeds: int = 5
    epsilon: float | None = None
    objective: str | None = None
    pricer: str | None = None
    max_iterations: int | None = None

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; choose from {sorted(AXES)}")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if any(v <= 0 for v in self.values) or list(self.values) != sorted(self.values):
            raise ValueError("axis values must be positive and sorted")
        self.epsilon = self.base.epsilon if self.epsilon is None else self.epsilon
        self.objective = self.base.objective if self.objective is None else self.objective
        self.pricer = self.base.pricer if self.pricer is None else self.pricer
        Objective(self.objective)
        get_pricer(self.pricer)

    def point_config(self, value: float) -> ScenarioConfig:
        key, unit = AXES[self.axis]
        v = value * unit
        if isinstance(getattr(self.base, key), int) and not isinstance(getattr(self.base, key), bool):
            v = int(round(v))
        return replace(self.base, **{key: v})

    def points(self) -> list[tuple[float, int]]:
        return [(value, self.base.seed + s) for value in self.values for s in range(self.seeds)]


def evaluate_scenario(scenario: Scenario, epsilon: float, objective: str, pricer: str,
                      max_iterations: int | None = None,
                      rerun_exact: bool = False) -> tuple[CgResult, float, float, float]:
    """Column generation plus baseline on a given scenario: (result, cg, base, gain)."""
    graph = ConflictGraph(scenario)
    mode = RmpMode(Objective(objective))
    result = run_column_generation(graph, epsilon, mode, get_pricer(pricer),
                                   max_iterations=max_iterations, rerun_exact=rerun_exact)
    if mode.objective is Objective.MIN_SCHEDULE:
        cg_rate = avg_user_rate(result.delta_u, scenario)
        base_rate = avg_user_rate(baseline_schedule(graph).delta, scenario)
    else:
        if result.verdict is Verdict.UNSUPPORTED:
            raise InfeasibleError("schedule: demand does not fit in one slot, "
                                  "so throughput is undefined")
        scale = len(scenario.users) * scenario.slot_s * 1e6
        cg_rate = result.delta_l / scale
        base_rate = baseline_throughput(graph) / scale
    gain = 100.0 * (cg_rate - base_rate) / base_rate if base_rate > 0 else 0.0
    return result, cg_rate, base_rate, gain


def solve_point(cfg: ScenarioConfig, seed: int, epsilon: float, objective: str, pricer: str,
                max_iterations: int | None = None) -> tuple[Scenario, CgResult, float, float, float]:
    """Generate a scenario and evaluate it: (scenario, result, cg, base, gain)."""
    scenario = generate_scenario(cfg, seed)
    return (scenario,) + evaluate_scenario(scenario, epsilon, objective, pricer, max_iterations)


def result_row(axis: str, value: float, seed: int, result: CgResult, cg_rate: float,
               base_rate: float, gain: float, runtime_s: float) -> dict[str, str]:
    return {"axis": axis, "axis_value": _fmt(value), "seed": str(seed), "status": "ok",
            "delta_u": _fmt(result.delta_u), "delta_l": _fmt(result.delta_l),
            "verdict": result.verdict.value, "cg_rate_mbps": _fmt(cg_rate),
            "baseline_rate_mbps": _fmt(base_rate), "gain_pct": _fmt(gain),
            "iterations": str(result.iterations), "pool_size": str(len(result.pool)),
            "runtime_ms": f"{1000.0 * runtime_s:.1f}"}


def error_row(axis: str, value: float, seed: int, exc: Exception, runtime_s: float) -> dict[str, str]:
    row = {col: "" for col in CSV_COLUMNS}
    row.update(axis=axis, axis_value=_fmt(value), seed=str(seed),
               status=f"error:{type(exc).__name__}", runtime_ms=f"{1000.0 * runtime_s:.1f}")
    return row


def evaluate_point(args: tuple) -> dict[str, str]:
    sweep, value, seed = args
    t0 = time.perf_counter()
    try:
        _, result, cg_rate, base_rate, gain = solve_point(
            sweep.point_config(value), seed, sweep.epsilon, sweep.objective, sweep.pricer,
            sweep.max_iterations)
    except Exception as exc:  # recorded per point; the sweep goes on
        return error_row(sweep.axis, value, seed, exc, time.perf_counter() - t0)
    return result_row(sweep.axis, value, seed, result, cg_rate, base_rate, gain,
                      time.perf_counter() - t0)


def run_sweep(sweep: SweepConfig, jobs: int = 1) -> list[dict[str, str]]:
    """One row per (axis value, seed), in that order regardless of ``jobs``."""
    tasks = [(sweep, value, seed) for value, seed in sweep.points()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(evaluate_point, tasks))
    return [evaluate_point(t) for t in tasks]


def write_csv(rows: Iterable[dict[str, str]], out: TextIO, header: bool = True) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    if header:
        writer.writeheader()
    for row in rows:
        writer.writerow(row)


def mean_rates(rows: Iterable[dict[str, str]]) -> dict[float, tuple[float, float]]:
    """Mean (column generation, baseline) rate per axis value over successful rows."""
    acc: dict[float, list[tuple[float, float]]] = {}
    for row in rows:
        if row["status"] == "ok":
            acc.setdefault(float(row["axis_value"]), []).append(
                (float(row["cg_rate_mbps"]), float(row["baseline_rate_mbps"])))
    return {v: tuple(np.mean(np.array(r), axis=0)) for v, r in sorted(acc.items())}


# -- tiny-instance equivalence ------------------------------------------------

@dataclass
class OracleRecord:
    seed: int
    n_tuples: int
    delta_star: float
    delta_u: float
    delta_l: float
    delta_exact: float
    baseline_delta: float
    ok: bool


def tiny_scenarios(count: int, seed: int = 0, max_tuples: int = 15,
                   cfg: ScenarioConfig | None = None) -> list[tuple[int, ConflictGraph]]:
    """Seeded tiny instances whose tuple count stays within ``max_tuples``."""
    cfg = cfg or profile("tiny")
    out = []
    s = seed
    while len(out) < count:
        graph = ConflictGraph(generate_scenario(cfg, s))
        if 0 < len(graph) <= max_tuples:
            out.append((s, graph))
        s += 1
        if s - seed > 100 * count:
            raise RuntimeError("could not draw enough tiny scenarios")
    return out


def oracle_check(count: int = 20, seed: int = 0, epsilon: float = 0.03,
                 tol: float = 1e-6) -> list[OracleRecord]:
    records = []
    for s, graph in tiny_scenarios(count, seed):
        star, _, _ = solve_full_lp(graph)
        approx = run_column_generation(graph, epsilon, pricer=solve_pricing_exact)
        exact = run_column_generation(graph, 0.0, pricer=solve_pricing_exact)
        base = baseline_schedule(graph).delta
        ok = (approx.delta_l - tol <= star <= approx.delta_u + tol
              and approx.delta_u <= (1 + epsilon + tol) * star + tol
              and abs(exact.delta_u - star) <= tol
              and base >= approx.delta_u - tol)
        records.append(OracleRecord(s, len(graph), star, approx.delta_u, approx.delta_l,
                                    exact.delta_u, base, ok))
    return records

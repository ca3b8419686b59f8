"""Benchmark harness: timed sweep points over ruleset size or node count.

Timing protocol per point: one untimed warm-up pass (pool spawn, allocator
warm-up), then ``repetitions`` timed passes on a persistent engine; the
reported delay is the median pass wall time divided by the packet count.
Comparison counters are pure functions of the inputs and must be identical
across repetitions; wall-clock fields are the only machine-dependent output.

Results CSV header:

    model,nodes,rules,batch,reps,avg_delay_ns,throughput_pps,total_comparisons,max_worker_comparisons
"""

from __future__ import annotations

import csv
import enum
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .engines import Engine, EngineConfig, ExecutionModel
from .model import Packet, Ruleset
from .rng import derive_seed
from .traffic import MatchMode, RulesetGenParams, TrafficProfile, generate_ruleset, generate_traffic

__all__ = [
    "BenchReport",
    "SweepAxis",
    "SweepSpec",
    "RESULTS_CSV_HEADER",
    "run_point",
    "run_sweep",
    "emit_csv",
]

RESULTS_CSV_HEADER = (
    "model",
    "nodes",
    "rules",
    "batch",
    "reps",
    "avg_delay_ns",
    "throughput_pps",
    "total_comparisons",
    "max_worker_comparisons",
)

_ALL_MODELS = (
    ExecutionModel.SEQUENTIAL,
    ExecutionModel.DATA_PARALLEL,
    ExecutionModel.FUNCTION_PARALLEL,
    ExecutionModel.HYBRID,
)


@dataclass(frozen=True)
class BenchReport:
    """One benchmark point; counters are machine-independent, timings are not."""

    model: str
    nodes: int
    ruleset_size: int
    batch_size: int
    repetitions: int
    avg_packet_delay_ns: float
    throughput_pps: float
    total_comparisons: int
    max_worker_comparisons: int


class SweepAxis(enum.Enum):
    RULES = "rules"
    NODES = "nodes"


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: vary rules or nodes, hold everything else fixed."""

    axis: SweepAxis
    axis_values: tuple[int, ...]
    rules: int = 2048
    nodes: int = 64
    batch: int = 4096
    seed: int = 0
    repetitions: int = 5
    models: tuple[ExecutionModel, ...] = _ALL_MODELS
    match_mode: MatchMode = MatchMode.WORST_CASE
    executor: str = "process"
    max_workers: int | None = None

    def __post_init__(self) -> None:
        if not self.axis_values:
            raise ValueError("axis_values must be nonempty")
        if any(b <= a for a, b in zip(self.axis_values, self.axis_values[1:])):
            raise ValueError(f"axis_values must be strictly increasing: {self.axis_values}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")


def run_point(
    ruleset: Ruleset,
    packets: Sequence[Packet],
    config: EngineConfig,
    repetitions: int = 5,
) -> BenchReport:
    """Benchmark one (ruleset, packets, config) point; median of repetitions."""
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    with Engine(config) as engine:
        engine.run(ruleset, packets)  # warm-up, untimed
        walls = []
        counters = None
        for _ in range(repetitions):
            _, stats = engine.run(ruleset, packets)
            walls.append(stats.wall_time_ns)
            rep_counters = (stats.total_comparisons, stats.max_worker_comparisons)
            if counters is None:
                counters = rep_counters
            elif counters != rep_counters:
                raise RuntimeError(
                    f"comparison counters changed across repetitions: {counters} vs {rep_counters}"
                )
    median_wall = statistics.median(walls)
    n = len(packets)
    return BenchReport(
        model=config.model.key,
        nodes=config.nodes,
        ruleset_size=len(ruleset),
        batch_size=n,
        repetitions=repetitions,
        avg_packet_delay_ns=(median_wall / n) if n else 0.0,
        throughput_pps=(n / (median_wall / 1e9)) if median_wall and n else 0.0,
        total_comparisons=counters[0],
        max_worker_comparisons=counters[1],
    )


def _sweep_workload(spec: SweepSpec, num_rules: int) -> tuple[Ruleset, list[Packet]]:
    ruleset = generate_ruleset(
        RulesetGenParams(count=num_rules, seed=derive_seed(spec.seed, 2 * num_rules))
    )
    profile = TrafficProfile(
        count=spec.batch,
        seed=derive_seed(spec.seed, 2 * num_rules + 1),
        match_mode=spec.match_mode,
    )
    companion = ruleset if spec.match_mode is MatchMode.WORST_CASE else None
    return ruleset, generate_traffic(profile, companion)


def run_sweep(spec: SweepSpec) -> list[BenchReport]:
    """All models x axis values, in that order, one report per point."""
    workloads: dict[int, tuple[Ruleset, list[Packet]]] = {}
    reports = []
    for model in spec.models:
        for value in spec.axis_values:
            num_rules = value if spec.axis is SweepAxis.RULES else spec.rules
            nodes = value if spec.axis is SweepAxis.NODES else spec.nodes
            if num_rules not in workloads:
                workloads[num_rules] = _sweep_workload(spec, num_rules)
            ruleset, packets = workloads[num_rules]
            config = EngineConfig(
                model=model,
                nodes=nodes,
                batch_size=spec.batch,
                executor=spec.executor,
                max_workers=spec.max_workers,
            )
            reports.append(run_point(ruleset, packets, config, spec.repetitions))
    return reports


def emit_csv(reports: Sequence[BenchReport], path: str | Path) -> None:
    """Write reports in stable column order, one row per report."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULTS_CSV_HEADER)
        for r in reports:
            writer.writerow(
                (
                    r.model,
                    r.nodes,
                    r.ruleset_size,
                    r.batch_size,
                    r.repetitions,
                    repr(r.avg_packet_delay_ns),
                    repr(r.throughput_pps),
                    r.total_comparisons,
                    r.max_worker_comparisons,
                )
            )

"""Parallel firewall execution models over a bounded worker pool.

Three parallel decompositions of first-match classification, all equivalent
to the sequential classifier packet for packet:

* data-parallel: packets are split into contiguous chunks, one logical
  firewall node per chunk, each node scanning the complete ruleset.
* function-parallel: the ruleset is split into contiguous partitions, every
  node sees every packet, scans only its partition, and reports its earliest
  local match; the coordinator picks the lowest global rule index.
* hybrid: both at once; every packet fans out into one scan subtask per rule
  lane, and all subtasks are scheduled across the pool together.

Logical nodes are tasks, not OS resources: an engine may run 64 nodes on a
4-worker pool. Workers only ever produce partition-local match indices; the
winning rule and verdict are decided by the coordinator after the batch
barrier, never by a worker.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .classifier import (
    ClassifyStats,
    CompiledRuleset,
    PacketArrays,
    classify_batch_sequential,
    compile_ruleset,
)
from .model import Action, MatchResult, Packet, Rule, Ruleset, rule_matches

__all__ = [
    "MAX_NODES",
    "ConfigError",
    "ExecutionModel",
    "EngineConfig",
    "RulePartition",
    "PartialMatch",
    "partition_bounds",
    "partition_rules",
    "scan_partition",
    "aggregate",
    "combine_partition_matches",
    "Engine",
    "run",
    "run_data_parallel",
    "run_function_parallel",
    "run_hybrid",
]

# Upper bound on logical nodes per engine, matching the per-block thread
# limit of the GPU generation this portable abstraction stands in for.
MAX_NODES = 512

_EXECUTORS = ("process", "thread", "serial")


class ConfigError(ValueError):
    """Invalid engine configuration."""


class ExecutionModel(Enum):
    SEQUENTIAL = "sequential"
    DATA_PARALLEL = "data"
    FUNCTION_PARALLEL = "function"
    HYBRID = "hybrid"

    @property
    def key(self) -> str:
        return self.value

    @classmethod
    def from_key(cls, key: str) -> "ExecutionModel":
        for model in cls:
            if model.value == key:
                return model
        raise ConfigError(f"unknown execution model {key!r} (expected one of "
                          f"{', '.join(m.value for m in cls)})")


@dataclass(frozen=True)
class EngineConfig:
    """Execution model selector plus worker-pool shape.

    ``nodes`` is the logical node count: packet chunks for data-parallel,
    rule partitions for function-parallel, rule lanes per packet for hybrid.
    ``batch_size`` is the number of packets per synchronous dispatch.
    ``executor`` picks the pool backend ("process", "thread", or "serial");
    ``max_workers`` bounds the pool (default: CPU count).
    """

    model: ExecutionModel
    nodes: int = 1
    batch_size: int = 4096
    executor: str = "process"
    max_workers: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.nodes <= MAX_NODES:
            raise ConfigError(f"nodes must be within 1..{MAX_NODES}, got {self.nodes}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.executor not in _EXECUTORS:
            raise ConfigError(f"executor must be one of {_EXECUTORS}, got {self.executor!r}")
        if self.max_workers is not None and self.max_workers < 1:
            raise ConfigError(f"max_workers must be >= 1, got {self.max_workers}")


@dataclass(frozen=True)
class RulePartition:
    """Contiguous slice of the ordered ruleset assigned to one node."""

    part_index: int
    global_offset: int
    rules: tuple[Rule, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class PartialMatch:
    """One node's verdict material for one packet.

    ``local_match`` is (global rule index, action) of the earliest match
    inside the node's partition, or None. ``comparisons`` counts the rules
    this node examined under early exit.
    """

    part_index: int
    local_match: tuple[int, Action] | None
    comparisons: int


def partition_bounds(total: int, parts: int) -> list[tuple[int, int]]:
    """Balanced contiguous [lo, hi) bounds; sizes differ by at most one."""
    if parts < 1:
        raise ConfigError(f"parts must be >= 1, got {parts}")
    base, extra = divmod(total, parts)
    bounds = []
    lo = 0
    for i in range(parts):
        hi = lo + base + (1 if i < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def partition_rules(ruleset: Ruleset, nodes: int) -> list[RulePartition]:
    """Split the ruleset into ``nodes`` balanced contiguous partitions."""
    return [
        RulePartition(part_index=i, global_offset=lo, rules=ruleset.rules[lo:hi])
        for i, (lo, hi) in enumerate(partition_bounds(len(ruleset), nodes))
    ]


def scan_partition(partition: RulePartition, packet: Packet) -> PartialMatch:
    """Early-exit scan of one partition, reporting the earliest local match."""
    for offset, rule in enumerate(partition.rules):
        if rule_matches(rule, packet):
            return PartialMatch(
                part_index=partition.part_index,
                local_match=(partition.global_offset + offset, rule.action),
                comparisons=offset + 1,
            )
    return PartialMatch(partition.part_index, None, len(partition.rules))


def aggregate(partials: Iterable[PartialMatch], num_rules: int) -> MatchResult:
    """Coordinator-side combination: the minimum global rule index wins.

    Only this step may decide a packet's fate; workers report partials and
    never act. A duplicate part_index signals a dispatch bug and raises.
    """
    seen: set[int] = set()
    best: tuple[int, Action] | None = None
    comparisons = 0
    for partial in partials:
        if partial.part_index in seen:
            raise ValueError(f"duplicate part_index {partial.part_index} in partials")
        seen.add(partial.part_index)
        comparisons += partial.comparisons
        if partial.local_match is not None:
            index, action = partial.local_match
            if not 0 <= index < num_rules:
                raise ValueError(f"match index {index} outside ruleset of {num_rules} rules")
            if best is None or index < best[0]:
                best = (index, action)
    if best is None:
        return MatchResult(Action.DROP, None, comparisons)
    return MatchResult(best[1], best[0], comparisons)


def combine_partition_matches(local_first: np.ndarray, num_rules: int) -> np.ndarray:
    """Vectorised form of aggregate(): per-packet minimum global index.

    ``local_first`` has one row per partition scan holding global rule
    indices or -1; the result holds the winning index per packet, or -1.
    """
    if local_first.size == 0:
        return np.full(local_first.shape[-1] if local_first.ndim > 1 else 0, -1, dtype=np.int64)
    masked = np.where(local_first >= 0, local_first, num_rules)
    best = masked.min(axis=0)
    return np.where(best < num_rules, best, -1)


def _scan_task(compiled: CompiledRuleset, pkts: PacketArrays, lo: int, hi: int) -> np.ndarray:
    # Runs on a pool worker; must stay a top-level function so process
    # executors can pickle it.
    return compiled.scan_range(pkts, lo, hi)


class Engine:
    """Reusable batch-synchronous runner for one EngineConfig.

    The pool is created lazily and kept alive across run() calls, so
    repeated benchmarking does not pay the spawn cost every pass. Not safe
    to call concurrently with itself; the ruleset and packets are shared
    read-only.
    """

    def __init__(self, config: EngineConfig) -> None:
        self.config = config
        self._pool: Executor | None = None

    @property
    def pool_width(self) -> int:
        return self.config.max_workers or os.cpu_count() or 1

    def _run_tasks(self, tasks: Sequence[tuple]) -> list[np.ndarray]:
        if self.config.executor == "serial":
            return [_scan_task(*args) for args in tasks]
        if self._pool is None:
            if self.config.executor == "thread":
                self._pool = ThreadPoolExecutor(max_workers=self.pool_width)
            else:
                self._pool = ProcessPoolExecutor(max_workers=self.pool_width)
        futures = [self._pool.submit(_scan_task, *args) for args in tasks]
        return [f.result() for f in futures]

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self) -> "Engine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def run(self, ruleset: Ruleset, packets: Sequence[Packet]) -> tuple[list[MatchResult], ClassifyStats]:
        """Classify packets under the configured model, batch-synchronously.

        Results are positional: results[i] belongs to packets[i] regardless
        of scheduling order, and all results of a dispatch are complete
        before the next dispatch starts.
        """
        if self.config.model is ExecutionModel.SEQUENTIAL:
            return classify_batch_sequential(ruleset, packets)

        start = time.perf_counter_ns()
        compiled = compile_ruleset(ruleset)
        pkts = PacketArrays.from_packets(packets)
        total_packets = len(pkts)
        first = np.full(total_packets, -1, dtype=np.int64)
        comparisons = np.zeros(total_packets, dtype=np.int64)
        max_worker = 0
        for lo in range(0, total_packets, self.config.batch_size):
            hi = min(lo + self.config.batch_size, total_packets)
            round_first, round_comps, round_max = self._dispatch(compiled, pkts.slice(lo, hi))
            first[lo:hi] = round_first
            comparisons[lo:hi] = round_comps
            max_worker = max(max_worker, round_max)
        results = compiled.build_results(first, comparisons)
        stats = ClassifyStats(
            total_comparisons=int(comparisons.sum()),
            packets_processed=total_packets,
            wall_time_ns=time.perf_counter_ns() - start,
            max_worker_comparisons=max_worker,
        )
        return results, stats

    def _dispatch(self, compiled: CompiledRuleset, pkts: PacketArrays):
        model = self.config.model
        if model is ExecutionModel.DATA_PARALLEL:
            return self._dispatch_data(compiled, pkts)
        if model is ExecutionModel.FUNCTION_PARALLEL:
            return self._dispatch_function(compiled, pkts)
        if model is ExecutionModel.HYBRID:
            return self._dispatch_hybrid(compiled, pkts)
        raise ConfigError(f"unsupported model {model}")

    def _dispatch_data(self, compiled: CompiledRuleset, pkts: PacketArrays):
        # One node per contiguous packet chunk, full ruleset each: identical
        # per-packet work to sequential, only distributed.
        num_rules = compiled.num_rules
        batch = len(pkts)
        chunks = [(lo, hi) for lo, hi in partition_bounds(batch, self.config.nodes) if hi > lo]
        outputs = self._run_tasks([(compiled, pkts.slice(lo, hi), 0, num_rules) for lo, hi in chunks])
        first = np.full(batch, -1, dtype=np.int64)
        for (lo, hi), out in zip(chunks, outputs):
            first[lo:hi] = out
        comps = np.where(first >= 0, first + 1, num_rules)
        max_worker = int(comps.max()) if batch else 0
        return first, comps, max_worker

    def _dispatch_function(self, compiled: CompiledRuleset, pkts: PacketArrays):
        # Every node sees the whole batch and scans only its rule partition;
        # nodes scan speculatively (no cross-node cancellation).
        batch = len(pkts)
        parts = [(lo, hi) for lo, hi in partition_bounds(compiled.num_rules, self.config.nodes) if hi > lo]
        return self._scan_partitions(compiled, pkts, parts, batch)

    def _dispatch_hybrid(self, compiled: CompiledRuleset, pkts: PacketArrays):
        # Per-packet tasks each fan out into `nodes` rule lanes; packet tasks
        # are grouped into pool-width chunks so every (chunk x lane) subtask
        # can be in flight at once.
        batch = len(pkts)
        lanes = [(lo, hi) for lo, hi in partition_bounds(compiled.num_rules, self.config.nodes) if hi > lo]
        chunk_count = max(1, min(batch, self.pool_width))
        chunks = [(lo, hi) for lo, hi in partition_bounds(batch, chunk_count) if hi > lo]
        tasks = [
            (compiled, pkts.slice(clo, chi), llo, lhi)
            for clo, chi in chunks
            for llo, lhi in lanes
        ]
        outputs = self._run_tasks(tasks)
        first = np.full(batch, -1, dtype=np.int64)
        comps = np.zeros(batch, dtype=np.int64)
        max_worker = 0
        num_lanes = len(lanes)
        for ci, (clo, chi) in enumerate(chunks):
            rows = outputs[ci * num_lanes : (ci + 1) * num_lanes]
            c_first, c_comps, c_max = self._combine_rows(compiled, rows, lanes, chi - clo)
            first[clo:chi] = c_first
            comps[clo:chi] = c_comps
            max_worker = max(max_worker, c_max)
        return first, comps, max_worker

    def _scan_partitions(self, compiled, pkts, parts, batch):
        if not parts:
            return (
                np.full(batch, -1, dtype=np.int64),
                np.zeros(batch, dtype=np.int64),
                0,
            )
        outputs = self._run_tasks([(compiled, pkts, lo, hi) for lo, hi in parts])
        return self._combine_rows(compiled, outputs, parts, batch)

    def _combine_rows(self, compiled, rows, parts, batch):
        if not parts:
            return np.full(batch, -1, dtype=np.int64), np.zeros(batch, dtype=np.int64), 0
        local = np.stack(rows)
        first = combine_partition_matches(local, compiled.num_rules)
        lows = np.array([lo for lo, _ in parts], dtype=np.int64)[:, None]
        sizes = np.array([hi - lo for lo, hi in parts], dtype=np.int64)[:, None]
        per_task = np.where(local >= 0, local - lows + 1, sizes)
        comps = per_task.sum(axis=0)
        max_worker = int(per_task.max()) if batch else 0
        return first, comps, max_worker


def run(ruleset: Ruleset, packets: Sequence[Packet], config: EngineConfig):
    """One-shot dispatch to the configured model."""
    with Engine(config) as engine:
        return engine.run(ruleset, packets)


def _run_checked(ruleset, packets, config, expected: ExecutionModel):
    if config.model is not expected:
        raise ConfigError(f"config.model is {config.model.key!r}, expected {expected.key!r}")
    return run(ruleset, packets, config)


def run_data_parallel(ruleset: Ruleset, packets: Sequence[Packet], config: EngineConfig):
    return _run_checked(ruleset, packets, config, ExecutionModel.DATA_PARALLEL)


def run_function_parallel(ruleset: Ruleset, packets: Sequence[Packet], config: EngineConfig):
    return _run_checked(ruleset, packets, config, ExecutionModel.FUNCTION_PARALLEL)


def run_hybrid(ruleset: Ruleset, packets: Sequence[Packet], config: EngineConfig):
    return _run_checked(ruleset, packets, config, ExecutionModel.HYBRID)

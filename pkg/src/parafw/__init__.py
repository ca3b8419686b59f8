"""parafw: parallel packet-filtering engine with first-match semantics.

Sequential, data-parallel, function-parallel, and hybrid execution models
over a portable worker pool, plus seeded traffic/ruleset generation and a
benchmark harness. See FirewallClassifier for the estimator-style API.
"""

from .model import (
    Action,
    CidrMatcher,
    MatchResult,
    Packet,
    PortRange,
    Protocol,
    Rule,
    RuleParseError,
    Ruleset,
    format_rule,
    load_ruleset,
    parse_rule,
    rule_matches,
    save_ruleset,
)
from .classifier import ClassifyStats, classify, classify_batch_sequential
from .engines import (
    Engine,
    EngineConfig,
    ExecutionModel,
    ConfigError,
    PartialMatch,
    RulePartition,
    aggregate,
    partition_rules,
    run,
    run_data_parallel,
    run_function_parallel,
    run_hybrid,
    scan_partition,
)
from .traffic import (
    MatchMode,
    RulesetGenParams,
    TrafficFormatError,
    TrafficGenerationError,
    TrafficProfile,
    generate_ruleset,
    generate_traffic,
    load_traffic,
    save_traffic,
)
from .bench import BenchReport, SweepAxis, SweepSpec, emit_csv, run_point, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BenchReport",
    "CidrMatcher",
    "ClassifyStats",
    "ConfigError",
    "Engine",
    "EngineConfig",
    "ExecutionModel",
    "FirewallClassifier",
    "MatchMode",
    "MatchResult",
    "Packet",
    "PartialMatch",
    "PortRange",
    "Protocol",
    "Rule",
    "RuleParseError",
    "RulePartition",
    "Ruleset",
    "RulesetGenParams",
    "SweepAxis",
    "SweepSpec",
    "TrafficFormatError",
    "TrafficGenerationError",
    "TrafficProfile",
    "aggregate",
    "classify",
    "classify_batch_sequential",
    "emit_csv",
    "format_rule",
    "generate_ruleset",
    "generate_traffic",
    "load_ruleset",
    "load_traffic",
    "parse_rule",
    "partition_rules",
    "rule_matches",
    "run",
    "run_data_parallel",
    "run_function_parallel",
    "run_hybrid",
    "run_point",
    "run_sweep",
    "save_ruleset",
    "save_traffic",
    "scan_partition",
]


def __getattr__(name):
    # FirewallClassifier pulls in scikit-learn; import it only on demand so
    # the CLI does not pay the sklearn import cost.
    if name == "FirewallClassifier":
        from .estimator import FirewallClassifier

        return FirewallClassifier
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

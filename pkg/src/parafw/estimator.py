"""scikit-learn style front end for the filtering engines.

``fit`` binds the security policy (the ruleset plays the role of the model
state), ``predict`` classifies packets into ACCEPT/DROP labels. All engine
knobs are constructor parameters, so the estimator clones and grid-searches
like any other.

    >>> clf = FirewallClassifier(model="hybrid", nodes=8)
    >>> clf.fit("rules.txt").predict(packets)
    array(['ACCEPT', 'DROP', ...], dtype=object)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .engines import EngineConfig, ExecutionModel, run
from .model import MatchResult
from .validation import as_packets, as_ruleset

__all__ = ["FirewallClassifier"]


class FirewallClassifier(BaseEstimator):
    """First-match packet classifier with selectable execution model.

    Parameters
    ----------
    model : str, one of "sequential", "data", "function", "hybrid"
    nodes : int, logical firewall nodes (chunks, partitions, or lanes)
    batch_size : int, packets per synchronous dispatch
    executor : str, pool backend ("process", "thread", "serial")
    max_workers : int or None, pool width (None = CPU count)
    """

    def __init__(
        self,
        model: str = "sequential",
        nodes: int = 1,
        batch_size: int = 4096,
        executor: str = "process",
        max_workers: int | None = None,
    ) -> None:
        self.model = model
        self.nodes = nodes
        self.batch_size = batch_size
        self.executor = executor
        self.max_workers = max_workers

    def _config(self) -> EngineConfig:
        return EngineConfig(
            model=ExecutionModel.from_key(self.model),
            nodes=self.nodes,
            batch_size=self.batch_size,
            executor=self.executor,
            max_workers=self.max_workers,
        )

    def fit(self, X, y=None) -> "FirewallClassifier":
        """Bind the ruleset: a Ruleset, a sequence of Rule, or a file path."""
        self._config()  # surface bad parameters at fit time
        self.ruleset_ = as_ruleset(X)
        self.n_rules_ = len(self.ruleset_)
        return self

    def match(self, X) -> list[MatchResult]:
        """Full per-packet results (verdict, matched rule index, comparisons)."""
        check_is_fitted(self, "ruleset_")
        results, _ = run(self.ruleset_, as_packets(X), self._config())
        return results

    def predict(self, X) -> np.ndarray:
        """ACCEPT/DROP label per packet, in input order."""
        return np.array([r.verdict.value for r in self.match(X)], dtype=object)

"""Input coercion and validation for the estimator API.

Accepts the domain types directly, paths to the on-disk formats, or plain
numeric arrays so the classifier composes with array-based pipelines.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .model import MAX_PORT, Packet, Protocol, Rule, Ruleset, load_ruleset
from .traffic import load_traffic

__all__ = ["as_ruleset", "as_packets"]

_CONCRETE_PROTOS = {int(Protocol.ICMP), int(Protocol.TCP), int(Protocol.UDP)}


def as_ruleset(rules) -> Ruleset:
    """Coerce to a Ruleset: pass through, wrap a Rule sequence, or load a file."""
    if isinstance(rules, Ruleset):
        return rules
    if isinstance(rules, (str, os.PathLike)):
        return load_ruleset(rules)
    if isinstance(rules, Sequence) and all(isinstance(r, Rule) for r in rules):
        return Ruleset(tuple(rules))
    raise ValueError(
        "rules must be a Ruleset, a sequence of Rule, or a path to a ruleset file; "
        f"got {type(rules).__name__}"
    )


def _packets_from_array(X) -> list[Packet]:
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise ValueError(
            f"packet array must have shape (n, 5) with columns "
            f"(proto, src_ip, src_port, dst_ip, dst_port); got shape {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.integer):
        converted = arr.astype(np.int64)
        if not np.array_equal(converted, arr):
            raise ValueError("packet array must contain integers")
        arr = converted
    packets = []
    for i, (proto, src_ip, src_port, dst_ip, dst_port) in enumerate(arr.tolist()):
        if proto not in _CONCRETE_PROTOS:
            raise ValueError(
                f"row {i}: protocol {proto} is not one of the supported IANA "
                f"numbers {sorted(_CONCRETE_PROTOS)}"
            )
        if not 0 <= src_port <= MAX_PORT or not 0 <= dst_port <= MAX_PORT:
            raise ValueError(f"row {i}: port outside 0..{MAX_PORT}")
        packets.append(
            Packet(
                id=i,
                proto=Protocol(proto),
                src_ip=int(src_ip),
                src_port=int(src_port),
                dst_ip=int(dst_ip),
                dst_port=int(dst_port),
            )
        )
    return packets


def as_packets(X) -> list[Packet]:
    """Coerce to a packet list: Packet sequence, traffic CSV path, or (n, 5) array."""
    if isinstance(X, (str, os.PathLike)):
        return load_traffic(X)
    if isinstance(X, Sequence) and all(isinstance(p, Packet) for p in X):
        return list(X)
    return _packets_from_array(X)

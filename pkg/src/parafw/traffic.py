"""Seeded synthetic traffic and ruleset generation, plus packet-batch CSV I/O.

All generation runs on the pinned xorshift64* stream (:mod:`parafw.rng`), so a
profile with a given seed yields the identical packet sequence on every
platform, byte for byte. Draw order is part of the contract:

* per packet: src_ip, src_port, dst_ip, dst_port (protocol is fixed);
* per rule: action, then per field wildcard-coin + value draws in the order
  proto, src (prefix length, then base), sport (two ports, sorted), dst,
  dport.

Traffic CSV format: header ``id,proto,src_ip,src_port,dst_ip,dst_port``,
protocols in {tcp, udp, icmp}, dotted-quad IPs, decimal ports.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .classifier import compile_ruleset
from .model import (
    CIDR_WILDCARD,
    MAX_PORT,
    PORT_WILDCARD,
    CidrMatcher,
    Packet,
    PortRange,
    Protocol,
    Rule,
    RuleParseError,
    Ruleset,
    Action,
    ip_to_text,
    text_to_ip,
)
from .rng import Xorshift64Star

__all__ = [
    "MatchMode",
    "TrafficProfile",
    "RulesetGenParams",
    "TrafficFormatError",
    "TrafficGenerationError",
    "generate_traffic",
    "generate_ruleset",
    "save_traffic",
    "load_traffic",
    "TRAFFIC_CSV_HEADER",
]

TRAFFIC_CSV_HEADER = ("id", "proto", "src_ip", "src_port", "dst_ip", "dst_port")

_WORST_CASE_ATTEMPTS = 10000

_PROTO_NAMES = {Protocol.TCP: "tcp", Protocol.UDP: "udp", Protocol.ICMP: "icmp"}
_NAME_PROTOS = {v: k for k, v in _PROTO_NAMES.items()}

# Fixed candidate order for non-wildcard protocol draws.
_CONCRETE_PROTOS = (Protocol.TCP, Protocol.UDP, Protocol.ICMP)


class TrafficFormatError(ValueError):
    """Malformed traffic CSV content."""


class TrafficGenerationError(RuntimeError):
    """Requested traffic cannot be constructed (e.g. worst-case impossible)."""


class MatchMode(enum.Enum):
    UNIFORM = "uniform"
    WORST_CASE = "worst_case"


@dataclass(frozen=True)
class TrafficProfile:
    """Shape of a homogeneous synthetic packet batch."""

    count: int
    seed: int
    proto: Protocol = Protocol.TCP
    src_subnet: CidrMatcher = CIDR_WILDCARD
    dst_subnet: CidrMatcher = CIDR_WILDCARD
    sport_range: PortRange = PORT_WILDCARD
    dport_range: PortRange = PORT_WILDCARD
    match_mode: MatchMode = MatchMode.UNIFORM

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if self.proto == Protocol.ANY:
            raise ValueError("traffic protocol must be concrete, not ANY")


@dataclass(frozen=True)
class RulesetGenParams:
    """Shape of a random ruleset; one wildcard probability applies per field."""

    count: int
    seed: int
    wildcard_probability: float = 0.1
    action_split: float = 0.5

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if not 0.0 <= self.wildcard_probability <= 1.0:
            raise ValueError(f"wildcard_probability outside 0..1: {self.wildcard_probability}")
        if not 0.0 <= self.action_split <= 1.0:
            raise ValueError(f"action_split outside 0..1: {self.action_split}")


def _draw_ip(rng: Xorshift64Star, subnet: CidrMatcher) -> int:
    span = 1 << (32 - subnet.prefix_len)
    return subnet.base + rng.randbelow(span)


def _draw_packet(rng: Xorshift64Star, profile: TrafficProfile, packet_id: int) -> Packet:
    return Packet(
        id=packet_id,
        proto=profile.proto,
        src_ip=_draw_ip(rng, profile.src_subnet),
        src_port=rng.randint(profile.sport_range.lo, profile.sport_range.hi),
        dst_ip=_draw_ip(rng, profile.dst_subnet),
        dst_port=rng.randint(profile.dport_range.lo, profile.dport_range.hi),
    )


def _uncovered_dport(ruleset: Ruleset, allowed: PortRange) -> int | None:
    """Lowest port in ``allowed`` outside every non-wildcard dport range."""
    covered = sorted(
        (r.dport.lo, r.dport.hi) for r in ruleset if not r.dport.is_wildcard
    )
    candidate = allowed.lo
    for lo, hi in covered:
        if candidate < lo:
            break
        candidate = max(candidate, hi + 1)
    if candidate > allowed.hi:
        return None
    return candidate


def generate_traffic(profile: TrafficProfile, ruleset: Ruleset | None = None) -> list[Packet]:
    """Generate ``profile.count`` packets; ids run 0..count-1.

    UNIFORM draws every field uniformly within the profile. WORST_CASE needs
    the companion ruleset and produces packets matching none of its rules
    (forcing full-ruleset scans): rejection sampling up to 10000 attempts per
    packet, then one constructed candidate using the lowest destination port
    no non-wildcard rule covers. Raises TrafficGenerationError when no
    non-matching packet exists within the profile.
    """
    rng = Xorshift64Star(profile.seed)
    if profile.match_mode is MatchMode.UNIFORM:
        return [_draw_packet(rng, profile, i) for i in range(profile.count)]

    if ruleset is None:
        raise ValueError("WORST_CASE generation requires the companion ruleset")
    compiled = compile_ruleset(ruleset)
    packets: list[Packet] = []
    for i in range(profile.count):
        packet = None
        for _ in range(_WORST_CASE_ATTEMPTS):
            candidate = _draw_packet(rng, profile, i)
            if compiled.first_match(candidate) < 0:
                packet = candidate
                break
        if packet is None:
            port = _uncovered_dport(ruleset, profile.dport_range)
            if port is not None:
                candidate = Packet(
                    id=i,
                    proto=profile.proto,
                    src_ip=_draw_ip(rng, profile.src_subnet),
                    src_port=rng.randint(profile.sport_range.lo, profile.sport_range.hi),
                    dst_ip=_draw_ip(rng, profile.dst_subnet),
                    dst_port=port,
                )
                if compiled.first_match(candidate) < 0:
                    packet = candidate
            if packet is None:
                raise TrafficGenerationError(
                    f"no non-matching packet exists within the profile (packet {i})"
                )
        packets.append(packet)
    return packets


def _draw_cidr(rng: Xorshift64Star, wildcard_probability: float) -> CidrMatcher:
    if rng.chance(wildcard_probability):
        return CIDR_WILDCARD
    prefix_len = rng.randint(8, 32)
    return CidrMatcher(rng.randbelow(1 << 32), prefix_len)


def _draw_ports(rng: Xorshift64Star, wildcard_probability: float) -> PortRange:
    if rng.chance(wildcard_probability):
        return PORT_WILDCARD
    a = rng.randint(0, MAX_PORT)
    b = rng.randint(0, MAX_PORT)
    return PortRange(min(a, b), max(a, b))


def generate_ruleset(params: RulesetGenParams) -> Ruleset:
    """Generate ``params.count`` random rules, deterministic per seed."""
    rng = Xorshift64Star(params.seed)
    rules = []
    for _ in range(params.count):
        action = Action.ACCEPT if rng.chance(params.action_split) else Action.DROP
        if rng.chance(params.wildcard_probability):
            proto = Protocol.ANY
        else:
            proto = _CONCRETE_PROTOS[rng.randbelow(len(_CONCRETE_PROTOS))]
        rules.append(
            Rule(
                action=action,
                proto=proto,
                src=_draw_cidr(rng, params.wildcard_probability),
                sport=_draw_ports(rng, params.wildcard_probability),
                dst=_draw_cidr(rng, params.wildcard_probability),
                dport=_draw_ports(rng, params.wildcard_probability),
            )
        )
    return Ruleset(tuple(rules))


def save_traffic(packets: Sequence[Packet], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRAFFIC_CSV_HEADER)
        for p in packets:
            writer.writerow(
                (
                    p.id,
                    _PROTO_NAMES[p.proto],
                    ip_to_text(p.src_ip),
                    p.src_port,
                    ip_to_text(p.dst_ip),
                    p.dst_port,
                )
            )


def _parse_port(text: str, lineno: int, field: str) -> int:
    try:
        port = int(text)
    except ValueError:
        raise TrafficFormatError(f"line {lineno}: invalid {field} {text!r}") from None
    if not 0 <= port <= MAX_PORT:
        raise TrafficFormatError(f"line {lineno}: {field} {port} outside 0..{MAX_PORT}")
    return port


def load_traffic(path: str | Path) -> list[Packet]:
    """Load a traffic CSV; the first malformed row aborts with its line number."""
    packets: list[Packet] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != TRAFFIC_CSV_HEADER:
            raise TrafficFormatError(
                f"line 1: expected header {','.join(TRAFFIC_CSV_HEADER)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise TrafficFormatError(f"line {lineno}: expected 6 columns, got {len(row)}")
            id_text, proto_text, src_text, sport_text, dst_text, dport_text = row
            try:
                packet_id = int(id_text)
            except ValueError:
                raise TrafficFormatError(f"line {lineno}: invalid id {id_text!r}") from None
            proto = _NAME_PROTOS.get(proto_text)
            if proto is None:
                raise TrafficFormatError(f"line {lineno}: unknown protocol {proto_text!r}")
            try:
                src_ip = text_to_ip(src_text)
                dst_ip = text_to_ip(dst_text)
            except RuleParseError as exc:
                raise TrafficFormatError(f"line {lineno}: {exc}") from None
            packets.append(
                Packet(
                    id=packet_id,
                    proto=proto,
                    src_ip=src_ip,
                    src_port=_parse_port(sport_text, lineno, "src_port"),
                    dst_ip=dst_ip,
                    dst_port=_parse_port(dport_text, lineno, "dst_port"),
                )
            )
    return packets

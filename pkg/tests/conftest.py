"""Shared test helpers: an independent brute-force oracle and workload builders.

The oracle deliberately avoids the package's matching code paths: field
membership goes through the stdlib ipaddress module and plain comparisons,
and classification scans every rule (no early exit) taking the minimum
matching index. Comparison counts follow from the first-match contract:
matched_index + 1, or the full ruleset size on a miss.
"""

from __future__ import annotations

import ipaddress

from parafw.model import (
    Action,
    CidrMatcher,
    MatchResult,
    Packet,
    PortRange,
    Protocol,
    Rule,
    Ruleset,
)


def oracle_rule_matches(rule: Rule, packet: Packet) -> bool:
    if rule.proto != Protocol.ANY and rule.proto != packet.proto:
        return False
    src_net = ipaddress.ip_network((rule.src.base, rule.src.prefix_len))
    if ipaddress.ip_address(packet.src_ip) not in src_net:
        return False
    if not rule.sport.lo <= packet.src_port <= rule.sport.hi:
        return False
    dst_net = ipaddress.ip_network((rule.dst.base, rule.dst.prefix_len))
    if ipaddress.ip_address(packet.dst_ip) not in dst_net:
        return False
    return rule.dport.lo <= packet.dst_port <= rule.dport.hi


def oracle_classify(ruleset: Ruleset, packet: Packet) -> MatchResult:
    """Test every rule, take the minimum matching index; default deny."""
    matching = [i for i, rule in enumerate(ruleset) if oracle_rule_matches(rule, packet)]
    if not matching:
        return MatchResult(Action.DROP, None, len(ruleset))
    index = min(matching)
    return MatchResult(ruleset[index].action, index, index + 1)


class BruteForceOracle:
    """oracle_classify with per-rule networks built once, for large sweeps."""

    def __init__(self, ruleset: Ruleset) -> None:
        self.ruleset = ruleset
        self._nets = [
            (
                ipaddress.ip_network((rule.src.base, rule.src.prefix_len)),
                ipaddress.ip_network((rule.dst.base, rule.dst.prefix_len)),
            )
            for rule in ruleset
        ]

    def classify(self, packet: Packet) -> MatchResult:
        src = ipaddress.ip_address(packet.src_ip)
        dst = ipaddress.ip_address(packet.dst_ip)
        matching = [
            i
            for i, (rule, (src_net, dst_net)) in enumerate(zip(self.ruleset, self._nets))
            if (rule.proto == Protocol.ANY or rule.proto == packet.proto)
            and src in src_net
            and rule.sport.lo <= packet.src_port <= rule.sport.hi
            and dst in dst_net
            and rule.dport.lo <= packet.dst_port <= rule.dport.hi
        ]
        if not matching:
            return MatchResult(Action.DROP, None, len(self.ruleset))
        index = min(matching)
        return MatchResult(self.ruleset[index].action, index, index + 1)


def verdict_pairs(results) -> list[tuple[Action, int | None]]:
    return [(r.verdict, r.matched_index) for r in results]


def make_rule(
    action: Action = Action.ACCEPT,
    proto: Protocol = Protocol.ANY,
    src: str | CidrMatcher = "*",
    sport: tuple[int, int] | None = None,
    dst: str | CidrMatcher = "*",
    dport: tuple[int, int] | None = None,
) -> Rule:
    def cidr(spec):
        if isinstance(spec, CidrMatcher):
            return spec
        if spec == "*":
            return CidrMatcher(0, 0)
        base, _, plen = spec.partition("/")
        return CidrMatcher(int(ipaddress.IPv4Address(base)), int(plen))

    def ports(spec):
        if spec is None:
            return PortRange(0, 65535)
        return PortRange(*spec)

    return Rule(action, proto, cidr(src), ports(sport), cidr(dst), ports(dport))


def make_packet(
    packet_id: int = 0,
    proto: Protocol = Protocol.TCP,
    src_ip: str = "10.1.2.3",
    src_port: int = 5555,
    dst_ip: str = "8.8.8.8",
    dst_port: int = 80,
) -> Packet:
    return Packet(
        id=packet_id,
        proto=proto,
        src_ip=int(ipaddress.IPv4Address(src_ip)),
        src_port=src_port,
        dst_ip=int(ipaddress.IPv4Address(dst_ip)),
        dst_port=dst_port,
    )

"""Rule, packet, and verdict types plus the ruleset text format.

A ruleset is an ordered list of 5-tuple rules; index 0 has the highest
priority. Classification is first-match: the lowest-index matching rule
decides the packet, and a packet matching no rule is dropped (default deny).

Ruleset file grammar (UTF-8, one rule per line, ``#`` starts a comment):

    <ACTION> <proto> <src> <sport> <dst> <dport>

    ACTION  := ACCEPT | DROP
    proto   := tcp | udp | icmp | any
    src/dst := a.b.c.d/len | *
    ports   := lo-hi | n | *

Example::

    ACCEPT tcp 10.0.0.0/8 * * 80-80
    DROP   any *          * * *
"""

from __future__ import annotations

import enum
import ipaddress
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

__all__ = [
    "Action",
    "Protocol",
    "CidrMatcher",
    "PortRange",
    "Rule",
    "Ruleset",
    "Packet",
    "MatchResult",
    "RuleParseError",
    "rule_matches",
    "parse_rule",
    "format_rule",
    "load_ruleset",
    "save_ruleset",
    "ip_to_text",
    "text_to_ip",
]

MAX_PORT = 65535
_MASK32 = 0xFFFFFFFF


class RuleParseError(ValueError):
    """Raised for malformed rule lines or ruleset/traffic field values."""


class Action(enum.Enum):
    ACCEPT = "ACCEPT"
    DROP = "DROP"


class Protocol(enum.IntEnum):
    """IP protocol selector; values are the IANA protocol numbers.

    ANY (0) is only meaningful in rules and matches every packet protocol.
    """

    ANY = 0
    ICMP = 1
    TCP = 6
    UDP = 17


_PROTO_TOKEN = {Protocol.ANY: "any", Protocol.ICMP: "icmp", Protocol.TCP: "tcp", Protocol.UDP: "udp"}
_TOKEN_PROTO = {v: k for k, v in _PROTO_TOKEN.items()}


def text_to_ip(text: str) -> int:
    """Dotted quad to 32-bit unsigned integer."""
    try:
        return int(ipaddress.IPv4Address(text))
    except ipaddress.AddressValueError as exc:
        raise RuleParseError(f"invalid IPv4 address {text!r}") from exc


def ip_to_text(ip: int) -> str:
    return str(ipaddress.IPv4Address(ip))


@dataclass(frozen=True)
class CidrMatcher:
    """IPv4 prefix matcher. prefix_len 0 is the wildcard (matches everything).

    Host bits below the prefix are zeroed on construction, so two matchers
    describing the same prefix always compare equal.
    """

    base: int
    prefix_len: int

    def __post_init__(self) -> None:
        if not 0 <= self.prefix_len <= 32:
            raise RuleParseError(f"CIDR prefix length {self.prefix_len} outside 0..32")
        if not 0 <= self.base <= _MASK32:
            raise RuleParseError(f"IPv4 address {self.base:#x} outside 32-bit range")
        object.__setattr__(self, "base", self.base & self.mask)

    @property
    def mask(self) -> int:
        # prefix_len 0 handled separately: a 32-bit shift by 32 is undefined
        # in most fixed-width implementations, so never rely on it.
        if self.prefix_len == 0:
            return 0
        return (_MASK32 << (32 - self.prefix_len)) & _MASK32

    @property
    def is_wildcard(self) -> bool:
        return self.prefix_len == 0

    def matches(self, ip: int) -> bool:
        return (ip & self.mask) == self.base


CIDR_WILDCARD = CidrMatcher(0, 0)


@dataclass(frozen=True)
class PortRange:
    """Inclusive port interval; (0, 65535) is the wildcard."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not 0 <= self.lo <= MAX_PORT or not 0 <= self.hi <= MAX_PORT:
            raise RuleParseError(f"port range {self.lo}-{self.hi} outside 0..{MAX_PORT}")
        if self.lo > self.hi:
            raise RuleParseError(f"inverted port range {self.lo}-{self.hi}")

    @property
    def is_wildcard(self) -> bool:
        return self.lo == 0 and self.hi == MAX_PORT

    def contains(self, port: int) -> bool:
        return self.lo <= port <= self.hi


PORT_WILDCARD = PortRange(0, MAX_PORT)


@dataclass(frozen=True)
class Rule:
    """One 5-tuple filtering rule: match fields plus the action to take."""

    action: Action
    proto: Protocol
    src: CidrMatcher
    sport: PortRange
    dst: CidrMatcher
    dport: PortRange

    def matches(self, packet: Packet) -> bool:
        return rule_matches(self, packet)


@dataclass(frozen=True)
class Ruleset:
    """Ordered rule sequence; the tuple index is the rule's global priority."""

    rules: tuple[Rule, ...] = ()

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __getitem__(self, index: int) -> Rule:
        return self.rules[index]


@dataclass(frozen=True)
class Packet:
    """Concrete 5-tuple instance; ``id`` identifies it within a batch."""

    id: int
    proto: Protocol
    src_ip: int
    src_port: int
    dst_ip: int
    dst_port: int

    def __post_init__(self) -> None:
        if self.proto == Protocol.ANY:
            raise ValueError("packet protocol must be concrete, not ANY")
        if not 0 <= self.src_ip <= _MASK32 or not 0 <= self.dst_ip <= _MASK32:
            raise ValueError("packet IP outside 32-bit range")
        if not 0 <= self.src_port <= MAX_PORT or not 0 <= self.dst_port <= MAX_PORT:
            raise ValueError(f"packet port outside 0..{MAX_PORT}")


@dataclass(frozen=True)
class MatchResult:
    """Outcome of classifying one packet.

    ``comparisons`` counts rules examined. The sequential classifier and the
    data-parallel engine examine ``matched_index + 1`` rules (early exit) or
    the whole ruleset on a miss; partition-scanning engines sum the rules
    examined by every worker lane, so their counts may differ while the
    (verdict, matched_index) pair never does.
    """

    verdict: Action
    matched_index: int | None
    comparisons: int

    def __post_init__(self) -> None:
        if self.matched_index is None and self.verdict is not Action.DROP:
            raise ValueError("no matched rule implies DROP (default deny)")


def rule_matches(rule: Rule, packet: Packet) -> bool:
    """True iff every rule field matches; wildcard fields match all values."""
    return (
        (rule.proto == Protocol.ANY or rule.proto == packet.proto)
        and rule.src.matches(packet.src_ip)
        and rule.sport.contains(packet.src_port)
        and rule.dst.matches(packet.dst_ip)
        and rule.dport.contains(packet.dst_port)
    )


def _parse_cidr(token: str) -> CidrMatcher:
    if token == "*":
        return CIDR_WILDCARD
    base_text, sep, len_text = token.partition("/")
    if not sep:
        raise RuleParseError(f"expected 'a.b.c.d/len' or '*', got {token!r}")
    try:
        prefix_len = int(len_text)
    except ValueError:
        raise RuleParseError(f"invalid prefix length {len_text!r}") from None
    return CidrMatcher(text_to_ip(base_text), prefix_len)


def _parse_ports(token: str) -> PortRange:
    if token == "*":
        return PORT_WILDCARD
    lo_text, sep, hi_text = token.partition("-")
    try:
        lo = int(lo_text)
        hi = int(hi_text) if sep else lo
    except ValueError:
        raise RuleParseError(f"invalid port token {token!r}") from None
    return PortRange(lo, hi)


def _parse_field(parse, token: str, field: str):
    try:
        return parse(token)
    except RuleParseError as exc:
        raise RuleParseError(f"{field}: {exc}") from None


def parse_rule(line: str) -> Rule:
    """Parse one rule line; raises RuleParseError naming the bad field."""
    fields = line.split()
    if len(fields) != 6:
        raise RuleParseError(f"expected 6 fields (action proto src sport dst dport), got {len(fields)}")
    action_tok, proto_tok, src_tok, sport_tok, dst_tok, dport_tok = fields
    try:
        action = Action(action_tok)
    except ValueError:
        raise RuleParseError(f"field 1: unknown action {action_tok!r} (expected ACCEPT or DROP)") from None
    proto = _TOKEN_PROTO.get(proto_tok)
    if proto is None:
        raise RuleParseError(f"field 2: unknown protocol {proto_tok!r} (expected tcp, udp, icmp or any)")
    return Rule(
        action=action,
        proto=proto,
        src=_parse_field(_parse_cidr, src_tok, "field 3 (src)"),
        sport=_parse_field(_parse_ports, sport_tok, "field 4 (sport)"),
        dst=_parse_field(_parse_cidr, dst_tok, "field 5 (dst)"),
        dport=_parse_field(_parse_ports, dport_tok, "field 6 (dport)"),
    )


def _format_cidr(matcher: CidrMatcher) -> str:
    if matcher.is_wildcard:
        return "*"
    return f"{ip_to_text(matcher.base)}/{matcher.prefix_len}"


def _format_ports(ports: PortRange) -> str:
    if ports.is_wildcard:
        return "*"
    return f"{ports.lo}-{ports.hi}"


def format_rule(rule: Rule) -> str:
    """Inverse of parse_rule: parse_rule(format_rule(r)) == r."""
    return " ".join(
        (
            rule.action.value,
            _PROTO_TOKEN[rule.proto],
            _format_cidr(rule.src),
            _format_ports(rule.sport),
            _format_cidr(rule.dst),
            _format_ports(rule.dport),
        )
    )


def _strip_comment(line: str) -> str:
    text, _, _ = line.partition("#")
    return text.strip()


def load_ruleset(path: str | Path) -> Ruleset:
    """Load rules in file order; the first malformed line aborts the load."""
    rules: list[Rule] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = _strip_comment(raw)
            if not line:
                continue
            try:
                rules.append(parse_rule(line))
            except RuleParseError as exc:
                raise RuleParseError(f"{path}: line {lineno}: {exc}") from None
    return Ruleset(tuple(rules))


def save_ruleset(ruleset: Ruleset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for rule in ruleset:
            handle.write(format_rule(rule) + "\n")

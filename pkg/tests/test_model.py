from __future__ import annotations

import ipaddress

import pytest

from parafw.model import (
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
    ip_to_text,
    load_ruleset,
    parse_rule,
    rule_matches,
    save_ruleset,
    text_to_ip,
)
from parafw.rng import Xorshift64Star
from parafw.traffic import RulesetGenParams, TrafficProfile, generate_ruleset, generate_traffic

from conftest import make_packet, make_rule, oracle_rule_matches


def test_rule_matches_prefix_and_wildcards():
    rule = make_rule(Action.ACCEPT, Protocol.TCP, src="10.0.0.0/8", dport=(80, 80))
    assert rule_matches(rule, make_packet(src_ip="10.1.2.3", dst_port=80))


def test_rule_matches_protocol_mismatch():
    rule = make_rule(Action.DROP, Protocol.UDP)
    assert not rule_matches(rule, make_packet(proto=Protocol.TCP))


def test_rule_matches_all_wildcard():
    rule = make_rule(Action.ACCEPT, Protocol.ANY)
    for packet in (
        make_packet(),
        make_packet(proto=Protocol.ICMP, src_ip="0.0.0.0", dst_ip="255.255.255.255"),
        make_packet(src_port=0, dst_port=65535),
    ):
        assert rule_matches(rule, packet)


def test_cidr_membership_is_prefix_equality():
    rng = Xorshift64Star(1001)
    for _ in range(2000):
        prefix_len = rng.randint(0, 32)
        matcher = CidrMatcher(rng.randbelow(1 << 32), prefix_len)
        ip = rng.randbelow(1 << 32)
        if prefix_len == 0:
            expected = True
        else:
            expected = (ip >> (32 - prefix_len)) == (matcher.base >> (32 - prefix_len))
        assert matcher.matches(ip) == expected
        # second route through the stdlib
        net = ipaddress.ip_network((matcher.base, prefix_len))
        assert matcher.matches(ip) == (ipaddress.ip_address(ip) in net)


def test_cidr_normalizes_host_bits():
    matcher = CidrMatcher(text_to_ip("10.1.2.3"), 8)
    assert ip_to_text(matcher.base) == "10.0.0.0"
    # idempotent: rebuilding from the normalized parts changes nothing
    assert CidrMatcher(matcher.base, matcher.prefix_len) == matcher


def test_cidr_prefix_zero_is_wildcard():
    matcher = CidrMatcher(text_to_ip("192.168.1.1"), 0)
    assert matcher.is_wildcard
    assert matcher.base == 0
    assert matcher.matches(0) and matcher.matches(0xFFFFFFFF)


def test_cidr_rejects_bad_prefix():
    with pytest.raises(RuleParseError):
        CidrMatcher(0, 33)


def test_port_range_validation():
    with pytest.raises(RuleParseError):
        PortRange(2, 1)
    with pytest.raises(RuleParseError):
        PortRange(0, 70000)
    assert PortRange(0, 65535).is_wildcard
    assert not PortRange(1, 65535).is_wildcard


def test_packet_rejects_any_protocol():
    with pytest.raises(ValueError):
        Packet(id=0, proto=Protocol.ANY, src_ip=0, src_port=0, dst_ip=0, dst_port=0)


def test_match_result_default_deny_invariant():
    with pytest.raises(ValueError):
        MatchResult(Action.ACCEPT, None, 0)


def test_wildcard_dominance():
    # widening any field of a matching rule must keep it matching
    params = RulesetGenParams(count=400, seed=5, wildcard_probability=0.2)
    rules = list(generate_ruleset(params))
    packets = generate_traffic(TrafficProfile(count=400, seed=6))
    wild = make_rule()
    checked = 0
    for rule, packet in zip(rules, packets):
        if not rule_matches(rule, packet):
            continue
        checked += 1
        relaxations = [
            Rule(rule.action, Protocol.ANY, rule.src, rule.sport, rule.dst, rule.dport),
            Rule(rule.action, rule.proto, wild.src, rule.sport, rule.dst, rule.dport),
            Rule(rule.action, rule.proto, rule.src, wild.sport, rule.dst, rule.dport),
            Rule(rule.action, rule.proto, rule.src, rule.sport, wild.dst, rule.dport),
            Rule(rule.action, rule.proto, rule.src, rule.sport, rule.dst, wild.dport),
        ]
        for relaxed in relaxations:
            assert rule_matches(relaxed, packet)
    assert checked > 0


def test_rule_matches_agrees_with_stdlib_oracle():
    rules = list(generate_ruleset(RulesetGenParams(count=500, seed=11, wildcard_probability=0.3)))
    packets = generate_traffic(TrafficProfile(count=500, seed=12))
    for rule, packet in zip(rules, packets):
        assert rule_matches(rule, packet) == oracle_rule_matches(rule, packet)


def test_parse_rule_basic():
    rule = parse_rule("ACCEPT tcp 10.0.0.0/8 * * 80-80")
    assert rule == make_rule(Action.ACCEPT, Protocol.TCP, src="10.0.0.0/8", dport=(80, 80))


def test_parse_rule_all_wildcard():
    rule = parse_rule("DROP any * * * *")
    assert rule == make_rule(Action.DROP, Protocol.ANY)


def test_parse_rule_normalizes_cidr_base():
    rule = parse_rule("ACCEPT tcp 10.1.2.3/8 * * 80")
    assert ip_to_text(rule.src.base) == "10.0.0.0"
    assert rule.dport == PortRange(80, 80)


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("ACCEPT tcp * * *", "6 fields"),
        ("PERMIT tcp * * * *", "field 1"),
        ("ACCEPT gre * * * *", "field 2"),
        ("ACCEPT tcp 10.0.0.0/40 * * *", "0..32"),
        ("ACCEPT tcp 10.0.0.300/8 * * *", "field 3"),
        ("ACCEPT tcp 10.0.0.0 * * *", "field 3"),
        ("ACCEPT tcp * 99999 * *", "0..65535"),
        ("ACCEPT tcp * 90-80 * *", "inverted"),
        ("ACCEPT tcp * * * 80-x", "field 6"),
    ],
)
def test_parse_rule_errors(line, fragment):
    with pytest.raises(RuleParseError) as excinfo:
        parse_rule(line)
    assert fragment in str(excinfo.value)


def test_format_rule_wildcards():
    assert format_rule(make_rule(Action.ACCEPT, Protocol.ANY)) == "ACCEPT any * * * *"


def test_format_rule_concrete():
    rule = make_rule(
        Action.DROP, Protocol.TCP, src="192.168.0.0/16", sport=(1024, 65535),
        dst="10.0.0.1/32", dport=(22, 22),
    )
    assert format_rule(rule) == "DROP tcp 192.168.0.0/16 1024-65535 10.0.0.1/32 22-22"


def test_parse_format_round_trip_random_rules():
    ruleset = generate_ruleset(RulesetGenParams(count=1000, seed=99, wildcard_probability=0.25))
    for rule in ruleset:
        assert parse_rule(format_rule(rule)) == rule


def test_save_load_round_trip(tmp_path):
    ruleset = generate_ruleset(RulesetGenParams(count=2048, seed=3))
    path = tmp_path / "rules.txt"
    save_ruleset(ruleset, path)
    loaded = load_ruleset(path)
    assert len(loaded) == 2048
    assert loaded == ruleset


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("")
    assert len(load_ruleset(path)) == 0


def test_load_comments_and_blanks_only(tmp_path):
    path = tmp_path / "comments.txt"
    path.write_text("# a comment\n\n   \n# another\n")
    assert len(load_ruleset(path)) == 0


def test_load_inline_comment_and_order(tmp_path):
    path = tmp_path / "rules.txt"
    path.write_text("DROP tcp * * * 22  # no ssh\nACCEPT any * * * *\n")
    ruleset = load_ruleset(path)
    assert len(ruleset) == 2
    assert ruleset[0].action is Action.DROP
    assert ruleset[1].action is Action.ACCEPT


def test_load_reports_first_malformed_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("ACCEPT any * * * *\nACCEPT bogus * * * *\nDROP any * * * *\n")
    with pytest.raises(RuleParseError) as excinfo:
        load_ruleset(path)
    assert "line 2" in str(excinfo.value)


def test_ruleset_is_ordered_and_hashable():
    rules = (make_rule(Action.ACCEPT), make_rule(Action.DROP))
    ruleset = Ruleset(rules)
    assert list(ruleset) == list(rules)
    assert ruleset[1].action is Action.DROP
    hash(ruleset)  # immutable types are shareable and usable as dict keys

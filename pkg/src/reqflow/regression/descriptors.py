"""Test descriptors and the two small text formats that carry them.

A regression is described by two artifacts generated from the same set of
derived testcases:

* the session file, which names the session, pins the seed, and lists the
  tests per execution group (``formal`` or ``sim``);
* the descriptor file, which records per test the scenario to run and the
  coverpoints it declares.

Both use one token alphabet: double-quoted strings, unsigned integers,
identifiers, and the punctuation ``{ } = ; ,``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from reqflow.configspec import ConfigError, IpConfiguration
from reqflow.dut.ecc import build_ecc


class SessionError(ValueError):
    """Malformed session or descriptor text."""


class GenerationError(ValueError):
    """A testcase cannot be mapped onto any runnable scenario."""


RUNNERS = ("exhaustive", "sim")
GROUPS = ("formal", "sim")

EXHAUSTIVE_SCENARIOS = ("bus_decode_exhaustive", "ecc_exhaustive")
SIM_SCENARIOS = ("burst_rw", "fault_sweep", "power_cycle", "random_rw")
SCENARIOS = EXHAUSTIVE_SCENARIOS + SIM_SCENARIOS

SIM_RUN_COUNT = 4

_ADDR_CLASSES = ("low", "mid", "top", "oob")


@dataclass(frozen=True)
class TestDescriptor:
    """Everything the runner needs to execute one generated test."""

    name: str
    runner: str
    scenario: str
    count: int
    coverpoints: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise SessionError("test name must be non-empty")
        if self.runner not in RUNNERS:
            raise SessionError(f"unknown runner {self.runner!r}")
        if self.scenario not in SCENARIOS:
            raise SessionError(f"unknown scenario {self.scenario!r}")
        expected = "exhaustive" if self.scenario in EXHAUSTIVE_SCENARIOS else "sim"
        if self.runner != expected:
            raise SessionError(
                f"scenario {self.scenario!r} requires runner {expected!r}, "
                f"got {self.runner!r}"
            )
        if self.runner == "exhaustive":
            if self.count != 1:
                raise SessionError("exhaustive tests run exactly once")
        elif self.count < 1:
            raise SessionError("sim tests need count >= 1")
        seen: set[str] = set()
        for point, bins in self.coverpoints:
            if not point or point in seen:
                raise SessionError(f"bad coverpoint name {point!r}")
            seen.add(point)
            if not bins:
                raise SessionError(f"coverpoint {point!r} declares no bins")
            if len(set(bins)) != len(bins):
                raise SessionError(f"coverpoint {point!r} repeats a bin")


@dataclass(frozen=True)
class SessionTest:
    name: str
    group: str
    runner: str
    count: int


@dataclass(frozen=True)
class SessionSpec:
    name: str
    seed: int
    tests: tuple[SessionTest, ...]


# --- tokenizer ---------------------------------------------------------

_TOKEN_RE = re.compile(
    r'"(?P<str>[^"\n]*)"'
    r"|(?P<num>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[{}=;,])"
)
_WS_RE = re.compile(r"[ \t\r\n]+")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        ws = _WS_RE.match(text, pos)
        if ws:
            pos = ws.end()
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            line = text.count("\n", 0, pos) + 1
            raise SessionError(f"line {line}: unexpected character {text[pos]!r}")
        line = text.count("\n", 0, pos) + 1
        kind = m.lastgroup or "punct"
        value = m.group(kind) if kind != "punct" else m.group("punct")
        tokens.append((kind, value, line))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> tuple[str, str, int] | None:
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return None

    def take(self, kind: str, value: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise SessionError(f"unexpected end of input, wanted {value or kind}")
        got_kind, got_value, line = tok
        if got_kind != kind or (value is not None and got_value != value):
            wanted = value or kind
            raise SessionError(f"line {line}: expected {wanted}, got {got_value!r}")
        self.index += 1
        return got_value

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        got_kind, got_value, _ = tok
        return got_kind == kind and (value is None or got_value == value)

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise SessionError(f"line {tok[2]}: trailing input {tok[1]!r}")


# --- session file grammar ----------------------------------------------


def parse_session(text: str) -> SessionSpec:
    """Parse a session file into its name, seed, and flat test list."""
    p = _Parser(text)
    p.take("ident", "session")
    name = p.take("str")
    if not name:
        raise SessionError("session name must be non-empty")
    p.take("punct", "{")
    p.take("ident", "seed")
    p.take("punct", "=")
    seed = int(p.take("num"))
    if seed >= 1 << 64:
        raise SessionError("seed exceeds 64 bits")
    p.take("punct", ";")
    tests: list[SessionTest] = []
    names: set[str] = set()
    while p.at("ident", "group"):
        p.take("ident", "group")
        group = p.take("str")
        if group not in GROUPS:
            raise SessionError(f"unknown group {group!r}")
        p.take("punct", "{")
        while p.at("ident", "test"):
            test = _parse_session_test(p, group)
            if test.name in names:
                raise SessionError(f"duplicate test {test.name!r}")
            names.add(test.name)
            tests.append(test)
        p.take("punct", "}")
    p.take("punct", "}")
    p.done()
    return SessionSpec(name=name, seed=seed, tests=tuple(tests))


def _parse_session_test(p: _Parser, group: str) -> SessionTest:
    p.take("ident", "test")
    name = p.take("str")
    p.take("punct", "{")
    p.take("ident", "runner")
    p.take("punct", "=")
    runner = p.take("ident")
    if runner not in RUNNERS:
        raise SessionError(f"unknown runner {runner!r}")
    p.take("punct", ";")
    p.take("ident", "count")
    p.take("punct", "=")
    count = int(p.take("num"))
    p.take("punct", ";")
    p.take("punct", "}")
    if count < 1:
        raise SessionError(f"test {name!r}: count must be positive")
    if (group == "formal") != (runner == "exhaustive"):
        raise SessionError(f"test {name!r}: runner {runner} not allowed in group {group}")
    return SessionTest(name=name, group=group, runner=runner, count=count)


def render_session(name: str, seed: int, tests: Sequence[SessionTest]) -> str:
    """Render a session file; groups in formal-then-sim order, tests sorted
    by name, empty groups omitted."""
    lines = [f'session "{name}" {{', f"  seed = {seed};"]
    for group in GROUPS:
        members = sorted((t for t in tests if t.group == group), key=lambda t: t.name)
        if not members:
            continue
        lines.append(f'  group "{group}" {{')
        for t in members:
            lines.append(f'    test "{t.name}" {{')
            lines.append(f"      runner = {t.runner};")
            lines.append(f"      count = {t.count};")
            lines.append("    }")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- descriptor file grammar --------------------------------------------


def parse_descriptors(text: str) -> tuple[str, tuple[TestDescriptor, ...]]:
    """Parse a descriptor file into (config_tag, descriptors)."""
    p = _Parser(text)
    p.take("ident", "config_tag")
    p.take("punct", "=")
    tag = p.take("str")
    if not re.fullmatch(r"[0-9a-f]{16}", tag):
        raise SessionError(f"bad config_tag {tag!r}")
    p.take("punct", ";")
    found: list[TestDescriptor] = []
    names: set[str] = set()
    while p.at("ident", "test"):
        desc = _parse_descriptor(p)
        if desc.name in names:
            raise SessionError(f"duplicate test {desc.name!r}")
        names.add(desc.name)
        found.append(desc)
    p.done()
    return tag, tuple(found)


def _parse_descriptor(p: _Parser) -> TestDescriptor:
    p.take("ident", "test")
    name = p.take("str")
    p.take("punct", "{")
    p.take("ident", "runner")
    p.take("punct", "=")
    runner = p.take("ident")
    p.take("punct", ";")
    p.take("ident", "scenario")
    p.take("punct", "=")
    scenario = p.take("ident")
    p.take("punct", ";")
    p.take("ident", "count")
    p.take("punct", "=")
    count = int(p.take("num"))
    p.take("punct", ";")
    points: list[tuple[str, tuple[str, ...]]] = []
    while p.at("ident", "cover"):
        p.take("ident", "cover")
        point = p.take("str")
        p.take("punct", "{")
        p.take("ident", "bins")
        p.take("punct", "=")
        bins = [p.take("ident")]
        while p.at("punct", ","):
            p.take("punct", ",")
            bins.append(p.take("ident"))
        p.take("punct", ";")
        p.take("punct", "}")
        points.append((point, tuple(bins)))
    p.take("punct", "}")
    try:
        return TestDescriptor(
            name=name,
            runner=runner,
            scenario=scenario,
            count=count,
            coverpoints=tuple(points),
        )
    except SessionError as exc:
        raise SessionError(f"test {name!r}: {exc}") from exc


def render_descriptors(config_tag: str, descriptors: Sequence[TestDescriptor]) -> str:
    lines = [f'config_tag = "{config_tag}";']
    for desc in sorted(descriptors, key=lambda d: d.name):
        lines.append(f'test "{desc.name}" {{')
        lines.append(f"  runner = {desc.runner};")
        lines.append(f"  scenario = {desc.scenario};")
        lines.append(f"  count = {desc.count};")
        for point, bins in desc.coverpoints:
            lines.append(f'  cover "{point}" {{')
            lines.append(f"    bins = {', '.join(bins)};")
            lines.append("  }")
        lines.append("}")
    return "\n".join(lines) + "\n"


# --- generation ----------------------------------------------------------


def declared_coverpoints(
    scenario: str, cfg: IpConfiguration
) -> tuple[tuple[str, tuple[str, ...]], ...]:
    """The coverpoints a scenario declares under a given configuration.

    Every bin listed here is reachable by the scenario, so a clean full run
    reports 100% coverage.
    """
    if scenario == "ecc_exhaustive":
        scheme = build_ecc(cfg.ecc, cfg.data_width)
        weights = tuple(
            f"w{i}" for i in range(1, scheme.t_correct + scheme.t_detect + 1)
        )
        outcomes: tuple[str, ...] = ("detected",)
        if scheme.t_correct:
            outcomes = ("corrected", "detected")
        return (("weight", weights), ("outcome", outcomes))
    if scenario == "bus_decode_exhaustive":
        return (
            ("op", ("read", "write")),
            ("burst", tuple(sorted(cfg.ahb_bursts))),
            ("addr_class", _ADDR_CLASSES),
            ("power", ("active",) + tuple(sorted(cfg.lp_modes))),
        )
    if scenario == "burst_rw":
        return (
            ("burst", tuple(sorted(cfg.ahb_bursts))),
            ("region", ("low", "high")),
        )
    if scenario == "random_rw":
        return (
            ("op", ("idle", "read", "write")),
            ("region", ("low", "mid", "high")),
            ("response", ("error", "okay")),
        )
    if scenario == "power_cycle":
        wake = []
        if "retention" in cfg.lp_modes:
            wake.append("retention_intact")
        if "shutdown" in cfg.lp_modes:
            wake.append("shutdown_invalidated")
        return (
            ("mode", ("active",) + tuple(sorted(cfg.lp_modes))),
            ("wake", tuple(wake)),
        )
    if scenario == "fault_sweep":
        scheme = build_ecc(cfg.ecc, cfg.data_width)
        weights = tuple(
            f"w{i}" for i in range(1, scheme.t_correct + scheme.t_detect + 1)
        )
        flags: tuple[str, ...] = ("detected",)
        if scheme.t_correct:
            flags = ("corrected", "detected")
        return (("weight", weights), ("flag", flags))
    raise GenerationError(f"unknown scenario {scenario!r}")


def _pick_scenario(domain: str, title: str, cfg: IpConfiguration) -> str | None:
    """Map a testcase onto a scenario by domain and title keywords.

    Returns None when the testcase does not apply to this configuration
    (an ECC suite on an ecc=none part has nothing to exercise).
    """
    lowered = title.lower()
    if domain == "formal":
        if "ecc" in lowered:
            if cfg.ecc == "none":
                return None
            return "ecc_exhaustive"
        if "bus" in lowered or "decode" in lowered:
            return "bus_decode_exhaustive"
        raise GenerationError(
            f"no exhaustive scenario applies to formal testcase titled {title!r}"
        )
    if "burst" in lowered:
        return "burst_rw"
    if "power" in lowered:
        if not cfg.lp_modes:
            return None
        return "power_cycle"
    if "fault" in lowered:
        if cfg.ecc == "none":
            return None
        return "fault_sweep"
    return "random_rw"


def generate_tests(
    testcases: Iterable, cfg: IpConfiguration, session_seed: int
) -> tuple[tuple[TestDescriptor, ...], str]:
    """Turn derived testcases into descriptors plus a rendered session file.

    ``testcases`` are requirement-store items: id, title, domain, and the
    config tag they were derived for. Tests are named by testcase id and
    sorted by name. Returns (descriptors, session_text).
    """
    if not 0 <= session_seed < 1 << 64:
        raise GenerationError("session seed must fit in 64 bits")
    tag = None
    descriptors: list[TestDescriptor] = []
    session_tests: list[SessionTest] = []
    for tc in testcases:
        if tc.kind != "testcase":
            raise GenerationError(f"{tc.id} is not a testcase")
        if tc.config_tag is None:
            raise GenerationError(f"{tc.id} is a superset item, derive it first")
        if tag is None:
            tag = tc.config_tag
        elif tc.config_tag != tag:
            raise GenerationError("testcases span multiple config tags")
        scenario = _pick_scenario(tc.domain, tc.title, cfg)
        if scenario is None:
            continue
        runner = "exhaustive" if scenario in EXHAUSTIVE_SCENARIOS else "sim"
        count = 1 if runner == "exhaustive" else SIM_RUN_COUNT
        descriptors.append(
            TestDescriptor(
                name=tc.id,
                runner=runner,
                scenario=scenario,
                count=count,
                coverpoints=declared_coverpoints(scenario, cfg),
            )
        )
        group = "formal" if runner == "exhaustive" else "sim"
        session_tests.append(
            SessionTest(name=tc.id, group=group, runner=runner, count=count)
        )
    if tag is None:
        raise GenerationError("no testcases to generate from")
    if tag != cfg.config_tag():
        raise ConfigError(
            f"testcases derived for {tag} but configuration hashes to "
            f"{cfg.config_tag()}"
        )
    descriptors.sort(key=lambda d: d.name)
    session_text = render_session(f"regr-{tag}", session_seed, session_tests)
    return tuple(descriptors), session_text

"""Configuration specification parsing and the applicability predicate language.

The configuration file is a line-based ``key = value`` format (``#`` comments,
comma-separated sets, a ``[debug]`` section for bug mutations). Predicates tag
superset requirement/testcase items and select which of them apply to a given
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

DATA_WIDTHS = (8, 16, 32)
ECC_LEVELS = ("none", "sed", "secded", "dected")
ECC_RANK = {name: i for i, name in enumerate(ECC_LEVELS)}
TECHS = ("sram_hd", "sram_hs", "rram")
LP_MODES = ("retention", "shutdown")
AHB_BURSTS = ("single", "incr4", "incr8")
BUG_MUTATIONS = ("syndrome_swap", "retention_loss", "burst_wrap")

ADDR_WORDS_MIN = 16
ADDR_WORDS_MAX = 65536

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit hash of the UTF-8 encoding of ``text``."""
    acc = FNV64_OFFSET
    for byte in text.encode("utf-8"):
        acc ^= byte
        acc = (acc * FNV64_PRIME) & 0xFFFFFFFFFFFFFFFF
    return acc


class ConfigError(ValueError):
    """Raised for malformed configuration files or out-of-domain values."""


@dataclass(frozen=True)
class IpConfiguration:
    """The ordered IP's parameter set."""

    ip_name: str
    data_width: int
    addr_words: int
    ecc: str
    tech: str
    lp_modes: frozenset[str] = frozenset()
    ahb_bursts: frozenset[str] = frozenset({"single"})
    bug_mutations: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not _is_identifier(self.ip_name):
            raise ConfigError(f"ip_name is not an identifier: {self.ip_name!r}")
        if self.data_width not in DATA_WIDTHS:
            raise ConfigError(f"data_width out of domain: {self.data_width}")
        if (self.addr_words & (self.addr_words - 1)) != 0 or not (
                ADDR_WORDS_MIN <= self.addr_words <= ADDR_WORDS_MAX):
            raise ConfigError(
                f"addr_words must be a power of two in {ADDR_WORDS_MIN}..{ADDR_WORDS_MAX}: "
                f"{self.addr_words}")
        if self.ecc not in ECC_LEVELS:
            raise ConfigError(f"ecc out of domain: {self.ecc!r}")
        if self.tech not in TECHS:
            raise ConfigError(f"tech out of domain: {self.tech!r}")
        _check_subset("lp_modes", self.lp_modes, LP_MODES)
        _check_subset("ahb_bursts", self.ahb_bursts, AHB_BURSTS)
        _check_subset("bug_mutations", self.bug_mutations, BUG_MUTATIONS)
        if "single" not in self.ahb_bursts:
            raise ConfigError("ahb_bursts must contain single")

    def canonical_text(self) -> str:
        """Canonical serialization; the configuration hash is taken over this."""
        lines = [
            f"ip_name = {self.ip_name}",
            f"data_width = {self.data_width}",
            f"addr_words = {self.addr_words}",
            f"ecc = {self.ecc}",
            f"tech = {self.tech}",
            f"lp_modes = {_format_set(self.lp_modes, LP_MODES)}",
            f"ahb_bursts = {_format_set(self.ahb_bursts, AHB_BURSTS)}",
            "[debug]",
            f"bug_mutations = {_format_set(self.bug_mutations, BUG_MUTATIONS)}",
        ]
        return "\n".join(lines) + "\n"

    def config_tag(self) -> str:
        """16-hex-digit FNV-1a 64 hash of the canonical config text."""
        return f"{fnv1a64(self.canonical_text()):016x}"


def _is_identifier(name: str) -> bool:
    return bool(name) and (name[0].isalpha() or name[0] == "_") and all(
        ch.isalnum() or ch == "_" for ch in name)


def _check_subset(key: str, values: frozenset[str], domain: tuple[str, ...]) -> None:
    for v in values:
        if v not in domain:
            raise ConfigError(f"{key} value out of domain: {v!r}")


def _format_set(values: frozenset[str], order: tuple[str, ...]) -> str:
    return ", ".join(v for v in order if v in values)


_SCALAR_KEYS = ("ip_name", "data_width", "addr_words", "ecc", "tech")
_SET_KEYS = {"lp_modes": LP_MODES, "ahb_bursts": AHB_BURSTS}
_DEBUG_KEYS = {"bug_mutations": BUG_MUTATIONS}


def parse_config(text: str) -> IpConfiguration:
    """Parse the line-based configuration format into an IpConfiguration.

    Unknown keys, duplicate keys, and out-of-domain values are hard errors.
    """
    seen: dict[str, object] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section != "debug":
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        if section == "debug":
            if key not in _DEBUG_KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key} in [debug]")
            seen[key] = _parse_set(key, value, _DEBUG_KEYS[key], lineno)
        elif key in _SCALAR_KEYS:
            seen[key] = _parse_scalar(key, value, lineno)
        elif key in _SET_KEYS:
            seen[key] = _parse_set(key, value, _SET_KEYS[key], lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key}")

    missing = [k for k in _SCALAR_KEYS if k not in seen]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    return IpConfiguration(
        ip_name=seen["ip_name"],
        data_width=seen["data_width"],
        addr_words=seen["addr_words"],
        ecc=seen["ecc"],
        tech=seen["tech"],
        lp_modes=seen.get("lp_modes", frozenset()),
        ahb_bursts=seen.get("ahb_bursts", frozenset({"single"})),
        bug_mutations=seen.get("bug_mutations", frozenset()),
    )


def _parse_scalar(key: str, value: str, lineno: int) -> object:
    if key in ("data_width", "addr_words"):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} must be an integer, got {value!r}") from None
    return value


def _parse_set(key: str, value: str, domain: tuple[str, ...], lineno: int) -> frozenset[str]:
    if not value:
        return frozenset()
    members = [tok.strip() for tok in value.split(",")]
    for tok in members:
        if tok not in domain:
            raise ConfigError(f"line {lineno}: {key} value out of domain: {tok!r}")
    return frozenset(members)


# --- Predicate language ----------------------------------------------------
#
# expr  := or ; or := and {"||" and} ; and := unary {"&&" unary}
# unary := "!" unary | "(" expr ")" | atom
# atom  := key cmpop literal | key "has" string | "true" | "false"

CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")

_KEY_TYPES: dict[str, str] = {
    "ip_name": "string",
    "data_width": "int",
    "addr_words": "int",
    "ecc": "ecc",
    "tech": "enum",
    "lp_modes": "set",
    "ahb_bursts": "set",
    "bug_mutations": "set",
}
_ENUM_DOMAINS = {"ecc": ECC_LEVELS, "tech": TECHS}
_SET_DOMAINS = {"lp_modes": LP_MODES, "ahb_bursts": AHB_BURSTS,
                "bug_mutations": BUG_MUTATIONS}


class PredicateError(ValueError):
    """Raised on predicate syntax or type errors; carries the source position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Compare:
    key: str
    op: str
    value: Union[int, str]


@dataclass(frozen=True)
class Has:
    key: str
    member: str


@dataclass(frozen=True)
class Not:
    operand: "Predicate"


@dataclass(frozen=True)
class And:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class Or:
    left: "Predicate"
    right: "Predicate"


Predicate = Union[Const, Compare, Has, Not, And, Or]


@dataclass
class _Token:
    kind: str  # op | ident | int | string | lparen | rparen | end
    value: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("&&", i) or text.startswith("||", i):
            tokens.append(_Token("op", text[i:i + 2], i))
            i += 2
        elif text.startswith("==", i) or text.startswith("!=", i) or \
                text.startswith("<=", i) or text.startswith(">=", i):
            tokens.append(_Token("op", text[i:i + 2], i))
            i += 2
        elif ch in "<>!":
            tokens.append(_Token("op", ch, i))
            i += 1
        elif ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
        elif ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise PredicateError("unterminated string", i)
            tokens.append(_Token("string", "".join(buf), i))
            i = j + 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
        else:
            raise PredicateError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.idx = 0

    def peek(self) -> _Token:
        return self.tokens[self.idx]

    def advance(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def parse(self) -> Predicate:
        node = self.parse_or()
        tok = self.peek()
        if tok.kind != "end":
            raise PredicateError(f"trailing input {tok.value!r}", tok.pos)
        return node

    def parse_or(self) -> Predicate:
        node = self.parse_and()
        while self.peek().kind == "op" and self.peek().value == "||":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Predicate:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().value == "&&":
            self.advance()
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> Predicate:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "!":
            self.advance()
            return Not(self.parse_unary())
        if tok.kind == "lparen":
            self.advance()
            node = self.parse_or()
            closing = self.advance()
            if closing.kind != "rparen":
                raise PredicateError("expected )", closing.pos)
            return node
        return self.parse_atom()

    def parse_atom(self) -> Predicate:
        tok = self.advance()
        if tok.kind != "ident":
            raise PredicateError(f"expected key or constant, got {tok.value!r}", tok.pos)
        if tok.value in ("true", "false"):
            return Const(tok.value == "true")
        key = tok.value
        if key not in _KEY_TYPES:
            raise PredicateError(f"unknown key {key}", tok.pos)
        op_tok = self.advance()
        if op_tok.kind == "ident" and op_tok.value == "has":
            if _KEY_TYPES[key] != "set":
                raise PredicateError(f"type mismatch: {key} is not a set", op_tok.pos)
            member_tok = self.advance()
            if member_tok.kind != "string":
                raise PredicateError("has requires a quoted string", member_tok.pos)
            if member_tok.value not in _SET_DOMAINS[key]:
                raise PredicateError(
                    f"unknown member {member_tok.value!r} for {key}", member_tok.pos)
            return Has(key, member_tok.value)
        if op_tok.kind != "op" or op_tok.value not in CMP_OPS:
            raise PredicateError(f"expected comparison operator, got {op_tok.value!r}",
                                 op_tok.pos)
        return self._typed_compare(key, op_tok, self.advance())

    def _typed_compare(self, key: str, op_tok: _Token, lit: _Token) -> Compare:
        op = op_tok.value
        key_type = _KEY_TYPES[key]
        ordering = op in ("<", "<=", ">", ">=")
        if key_type == "set":
            raise PredicateError(f"type mismatch: cannot compare set key {key}", op_tok.pos)
        if key_type == "int":
            if lit.kind != "int":
                raise PredicateError(f"type mismatch: {key} compares to integers", lit.pos)
            return Compare(key, op, int(lit.value))
        if key_type == "ecc":
            if lit.kind != "ident" or lit.value not in ECC_LEVELS:
                raise PredicateError(f"type mismatch: {key} compares to ecc levels", lit.pos)
            return Compare(key, op, lit.value)
        if ordering:
            raise PredicateError(
                f"type mismatch: ordering comparison on non-ordered key {key}", op_tok.pos)
        if key_type == "enum":
            if lit.kind != "ident" or lit.value not in _ENUM_DOMAINS[key]:
                raise PredicateError(f"type mismatch: {key} compares to tech values", lit.pos)
            return Compare(key, op, lit.value)
        # string key (ip_name)
        if lit.kind != "string":
            raise PredicateError(f"type mismatch: {key} compares to quoted strings", lit.pos)
        return Compare(key, op, lit.value)


def parse_predicate(text: str) -> Predicate:
    """Parse predicate source into an expression tree; whitespace-insensitive."""
    return _Parser(_tokenize(text)).parse()


def print_predicate(pred: Predicate) -> str:
    """Canonical text form; parsing it back yields an equal tree."""
    return _print(pred)


def _print(pred: Predicate) -> str:
    # precedence levels: or=1, and=2, unary=3, atom=4
    if isinstance(pred, Const):
        return "true" if pred.value else "false"
    if isinstance(pred, Compare):
        value = pred.value
        if isinstance(value, str) and _KEY_TYPES[pred.key] == "string":
            value = '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return f"{pred.key} {pred.op} {value}"
    if isinstance(pred, Has):
        return f'{pred.key} has "{pred.member}"'
    if isinstance(pred, Not):
        return "!" + _wrap(pred.operand, 3)
    if isinstance(pred, And):
        # right side needs a strictly tighter level so nesting survives re-parsing
        return f"{_wrap(pred.left, 2)} && {_wrap(pred.right, 3)}"
    if isinstance(pred, Or):
        return f"{_wrap(pred.left, 1)} || {_wrap(pred.right, 2)}"
    raise TypeError(f"not a predicate node: {pred!r}")


def _level(pred: Predicate) -> int:
    if isinstance(pred, Or):
        return 1
    if isinstance(pred, And):
        return 2
    if isinstance(pred, Not):
        return 3
    return 4


def _wrap(pred: Predicate, need: int) -> str:
    text = _print(pred)
    if _level(pred) < need:
        return f"({text})"
    return text


def eval_predicate(pred: Predicate, cfg: IpConfiguration) -> bool:
    """Evaluate a well-typed predicate against a configuration."""
    if isinstance(pred, Const):
        return pred.value
    if isinstance(pred, Not):
        return not eval_predicate(pred.operand, cfg)
    if isinstance(pred, And):
        return eval_predicate(pred.left, cfg) and eval_predicate(pred.right, cfg)
    if isinstance(pred, Or):
        return eval_predicate(pred.left, cfg) or eval_predicate(pred.right, cfg)
    if isinstance(pred, Has):
        return pred.member in getattr(cfg, pred.key)
    if isinstance(pred, Compare):
        actual = getattr(cfg, pred.key)
        expected = pred.value
        if pred.key == "ecc":
            actual = ECC_RANK[actual]
            expected = ECC_RANK[expected]
        if pred.op == "==":
            return actual == expected
        if pred.op == "!=":
            return actual != expected
        if pred.op == "<":
            return actual < expected
        if pred.op == "<=":
            return actual <= expected
        if pred.op == ">":
            return actual > expected
        return actual >= expected
    raise TypeError(f"not a predicate node: {pred!r}")

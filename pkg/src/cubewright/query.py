"""Pipeline query language over cubes.

::

    query   := stage ("|" stage)*
    stage   := "slice" NAME "=" VALUE
             | "dice" NAME "in" "{" VALUE ("," VALUE)* "}"
             | "rollup" "date" "to" ("month" | "year")
             | "rollup" NAME
             | "drilldown" "date" "to" ("day" | "month")
             | "drilldown" NAME
             | "crosstab" NAME "x" NAME
             | "top" ("row" | "col")

Keywords are case-insensitive. NAME and VALUE are bare words or
double-quoted strings (``\\"`` and ``\\\\`` escape inside quotes). Names are
normalized like schema columns. ``crosstab`` may appear once, last or
directly before a final ``top``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Union

from . import cube as olap
from .cube import CrossTab, Cube, DateLevel, Top
from .ingest import normalize_name


class ParseError(ValueError):
    def __init__(self, position: int, expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {position}: expected {expected}, found {found}")

    def caret(self, text: str) -> str:
        """The query line with a caret under the error position."""
        line = text.replace("\n", " ").replace("\r", " ")
        return f"{line}\n{' ' * self.position}^ expected {self.expected}, found {self.found}"


class QueryError(ValueError):
    """An execution failure, tagged with the (0-based) index of the failing stage."""

    def __init__(self, stage_index: int, stage, cause: Exception):
        self.stage_index = stage_index
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage_index + 1} ({format_stage(stage)}): {cause}")


@dataclass(frozen=True)
class Slice:
    dim: str
    value: str


@dataclass(frozen=True)
class Dice:
    dim: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class Rollup:
    dim: str


@dataclass(frozen=True)
class RollupDate:
    level: DateLevel


@dataclass(frozen=True)
class Drilldown:
    target: Union[str, DateLevel]


@dataclass(frozen=True)
class CrossTabStage:
    row_dim: str
    col_dim: str


@dataclass(frozen=True)
class TopStage:
    axis: str  # "row" | "col"


Stage = Union[Slice, Dice, Rollup, RollupDate, Drilldown, CrossTabStage, TopStage]


@dataclass(frozen=True)
class Query:
    stages: tuple[Stage, ...]

    def __str__(self) -> str:
        return format_query(self)


# -- lexer -------------------------------------------------------------------

class Token(NamedTuple):
    kind: str  # word | string | punct | eof
    text: str
    pos: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "string":
            return f"string {self.text!r}"
        return repr(self.text)


_PUNCT = set('|={},')
_SPECIAL = _PUNCT | {'"'}


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _PUNCT:
            tokens.append(Token("punct", ch, i))
            i += 1
        elif ch == '"':
            start, i = i, i + 1
            buf = []
            while True:
                if i >= n:
                    raise ParseError(start, "closing '\"'", "end of input")
                ch = text[i]
                if ch == "\\":
                    if i + 1 >= n:
                        raise ParseError(i, "escaped character", "end of input")
                    buf.append(text[i + 1])
                    i += 2
                elif ch == '"':
                    i += 1
                    break
                else:
                    buf.append(ch)
                    i += 1
            tokens.append(Token("string", "".join(buf), start))
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in _SPECIAL:
                i += 1
            tokens.append(Token("word", text[start:i], start))
    tokens.append(Token("eof", "", n))
    return tokens


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, expected: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(tok.pos, expected, tok.describe())

    def is_kw(self, word: str, tok: Token | None = None) -> bool:
        tok = tok or self.tok
        return tok.kind == "word" and tok.text.lower() == word

    def keyword(self, *choices: str) -> str:
        if self.tok.kind == "word" and self.tok.text.lower() in choices:
            return self.advance().text.lower()
        self.fail(" or ".join(repr(c) for c in choices))

    def punct(self, ch: str) -> None:
        if self.tok.kind == "punct" and self.tok.text == ch:
            self.advance()
            return
        self.fail(repr(ch))

    def name(self) -> str:
        tok = self.tok
        if tok.kind not in ("word", "string"):
            self.fail("dimension name")
        name = normalize_name(tok.text)
        if not name:
            self.fail("non-empty dimension name")
        self.advance()
        return name

    def value(self) -> str:
        if self.tok.kind not in ("word", "string"):
            self.fail("member value")
        return self.advance().text

    def query(self) -> Query:
        stages, positions = [self.stage()], [0]
        while self.tok.kind == "punct" and self.tok.text == "|":
            self.advance()
            positions.append(self.tok.pos)
            stages.append(self.stage())
        if self.tok.kind != "eof":
            self.fail("'|' or end of input")
        prev = None
        for st, pos in zip(stages, positions):
            if isinstance(prev, TopStage):
                raise ParseError(pos, "end of query after 'top'", "another stage")
            if isinstance(prev, CrossTabStage) and not isinstance(st, TopStage):
                raise ParseError(pos, "end of query or 'top' after crosstab", "another stage")
            if isinstance(st, TopStage) and not isinstance(prev, CrossTabStage):
                raise ParseError(pos, "'top' directly after a crosstab", "'top'")
            prev = st
        return Query(tuple(stages))

    def stage(self) -> Stage:
        if self.tok.kind != "word":
            self.fail("stage keyword")
        kw = self.tok.text.lower()
        if kw == "slice":
            self.advance()
            dim = self.name()
            self.punct("=")
            return Slice(dim, self.value())
        if kw == "dice":
            self.advance()
            dim = self.name()
            self.keyword("in")
            self.punct("{")
            values = [self.value()]
            while self.tok.kind == "punct" and self.tok.text == ",":
                self.advance()
                values.append(self.value())
            self.punct("}")
            return Dice(dim, tuple(values))
        if kw == "rollup":
            self.advance()
            if self.is_kw("date") and self.is_kw("to", self.peek()):
                self.advance(), self.advance()
                return RollupDate(DateLevel.parse(self.keyword("month", "year")))
            return Rollup(self.name())
        if kw == "drilldown":
            self.advance()
            if self.is_kw("date") and self.is_kw("to", self.peek()):
                self.advance(), self.advance()
                return Drilldown(DateLevel.parse(self.keyword("day", "month")))
            return Drilldown(self.name())
        if kw == "crosstab":
            self.advance()
            row = self.name()
            self.keyword("x")
            tok = self.tok
            col = self.name()
            if col == row:
                raise ParseError(tok.pos, f"a dimension other than {row}", tok.describe())
            return CrossTabStage(row, col)
        if kw == "top":
            self.advance()
            return TopStage(self.keyword("row", "col"))
        self.fail("one of slice, dice, rollup, drilldown, crosstab, top")


def parse_query(text: str | bytes) -> Query:
    """Parse ``text``; raises :class:`ParseError` (never anything else)."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(exc.start, "UTF-8 text", f"byte 0x{text[exc.start]:02x}") from None
    return _Parser(text).query()


# -- printer -----------------------------------------------------------------

_BARE_NAME = re.compile(r"^[A-Z_][A-Z0-9_]*$")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_name(name: str) -> str:
    return name if _BARE_NAME.match(name) else _quote(name)


def _fmt_value(value: str) -> str:
    bare = value and not any(ch.isspace() or ch in _SPECIAL or ch == "\\" for ch in value)
    return value if bare else _quote(value)


def format_stage(stage: Stage) -> str:
    if isinstance(stage, Slice):
        return f"slice {_fmt_name(stage.dim)}={_fmt_value(stage.value)}"
    if isinstance(stage, Dice):
        return f"dice {_fmt_name(stage.dim)} in {{{', '.join(_fmt_value(v) for v in stage.values)}}}"
    if isinstance(stage, Rollup):
        return f"rollup {_fmt_name(stage.dim)}"
    if isinstance(stage, RollupDate):
        return f"rollup date to {stage.level.name.lower()}"
    if isinstance(stage, Drilldown):
        if isinstance(stage.target, DateLevel):
            return f"drilldown date to {stage.target.name.lower()}"
        return f"drilldown {_fmt_name(stage.target)}"
    if isinstance(stage, CrossTabStage):
        return f"crosstab {_fmt_name(stage.row_dim)} x {_fmt_name(stage.col_dim)}"
    if isinstance(stage, TopStage):
        return f"top {stage.axis}"
    raise TypeError(f"not a query stage: {stage!r}")


def format_query(query: Query) -> str:
    return " | ".join(format_stage(s) for s in query.stages)


# -- execution ---------------------------------------------------------------

Result = Union[Cube, CrossTab, Top]


def _apply(stage: Stage, current: Result) -> Result:
    if isinstance(stage, TopStage):
        if not isinstance(current, CrossTab):
            raise olap.CubeError("'top' needs a crosstab result")
        return olap.argmax_margin(current, stage.axis)
    if not isinstance(current, Cube):
        raise olap.CubeError(f"{type(current).__name__} result cannot be processed further")
    if isinstance(stage, Slice):
        return olap.slice(current, stage.dim, stage.value)
    if isinstance(stage, Dice):
        return olap.dice(current, {stage.dim: stage.values})
    if isinstance(stage, Rollup):
        return olap.rollup(current, stage.dim)
    if isinstance(stage, RollupDate):
        return olap.rollup_date(current, stage.level)
    if isinstance(stage, Drilldown):
        return olap.drilldown(current, stage.target)
    if isinstance(stage, CrossTabStage):
        return olap.crosstab(current, stage.row_dim, stage.col_dim)
    raise TypeError(f"not a query stage: {stage!r}")


def execute(query: Query | str, cube: Cube) -> Result:
    """Apply the stages left to right; the last stage decides the result type."""
    if isinstance(query, str):
        query = parse_query(query)
    current: Result = cube
    for k, stage in enumerate(query.stages):
        try:
            current = _apply(stage, current)
        except olap.CubeError as exc:
            raise QueryError(k, stage, exc) from exc
    return current

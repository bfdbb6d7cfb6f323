"""Typed CSV ingestion and the in-memory relational table.

Dates are read day-first (``D/M/YYYY``, stray blanks tolerated) or ISO, and
always written back as ISO so that ``parse_csv(write_csv(t))`` reproduces
``t`` exactly.
"""

from __future__ import annotations

import datetime as dt
import enum
import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping


class IngestError(ValueError):
    """Raised for schema problems and malformed input rows."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ColumnType(enum.Enum):
    DATE = "date"
    CATEGORICAL = "categorical"
    INTEGER = "integer"
    TEXT = "text"

    @classmethod
    def parse(cls, name: str | "ColumnType") -> "ColumnType":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise IngestError(f"unknown column type {name!r}") from None


_SPACES = re.compile(r"\s+")


def normalize_name(name: str) -> str:
    """Canonical column/dimension identifier: trimmed, uppercased, blanks -> ``_``."""
    return _SPACES.sub("_", name.strip()).upper()


@dataclass(frozen=True)
class Column:
    name: str
    type: ColumnType


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]

    def __post_init__(self):
        if not self.columns:
            raise IngestError("schema needs at least one column")
        seen = set()
        for col in self.columns:
            if col.name in seen:
                raise IngestError(f"duplicate column name {col.name!r}")
            seen.add(col.name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def __len__(self) -> int:
        return len(self.columns)

    def index(self, name: str) -> int:
        key = normalize_name(name)
        for i, col in enumerate(self.columns):
            if col.name == key:
                return i
        raise KeyError(f"no column {key!r} in schema {list(self.names)}")

    def column(self, name: str) -> Column:
        return self.columns[self.index(name)]

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self.names


@dataclass(frozen=True)
class Table:
    """Immutable ordered rows conforming to ``schema``.

    ``rejected`` holds ``(line, message)`` pairs for rows skipped in lenient
    mode; it does not take part in equality.
    """

    schema: Schema
    rows: tuple[tuple, ...] = ()
    rejected: tuple[tuple[int, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        arity = len(self.schema)
        for i, row in enumerate(self.rows):
            if len(row) != arity:
                raise IngestError(f"row {i} has {len(row)} values, schema has {arity}")

    def __len__(self) -> int:
        return len(self.rows)

    def column_values(self, name: str) -> list:
        i = self.schema.index(name)
        return [row[i] for row in self.rows]

    def records(self) -> Iterator[dict]:
        names = self.schema.names
        for row in self.rows:
            yield dict(zip(names, row))


def parse_schema(
    header_line: str,
    type_hints: Mapping[str, ColumnType | str] | None = None,
    aliases: Mapping[str, str] | None = None,
) -> Schema:
    """Build a schema from a comma-separated header.

    ``aliases`` maps alternative spellings (after normalization) onto the
    canonical column name, e.g. ``{"FIRSTNAME": "FNAME"}``. Columns without a
    hint are categorical.
    """
    header_line = header_line.strip("\r\n")
    if not header_line.strip():
        raise IngestError("empty header")
    alias_map = {normalize_name(k): normalize_name(v) for k, v in (aliases or {}).items()}
    hints = {}
    for k, v in (type_hints or {}).items():
        key = normalize_name(k)
        hints[alias_map.get(key, key)] = ColumnType.parse(v)
    columns = []
    for raw in header_line.split(","):
        name = normalize_name(raw)
        if not name:
            raise IngestError("empty column name in header")
        name = alias_map.get(name, name)
        columns.append(Column(name, hints.get(name, ColumnType.CATEGORICAL)))
    return Schema(tuple(columns))


_DMY = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")
_ISO = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")


def parse_date(text: str) -> dt.date:
    """Parse ``D/M/YYYY`` (embedded blanks allowed) or ``YYYY-MM-DD``."""
    compact = _SPACES.sub("", text)
    m = _DMY.match(compact)
    if m:
        day, month, year = (int(g) for g in m.groups())
    else:
        m = _ISO.match(compact)
        if not m:
            raise ValueError(f"unparseable date {text!r}")
        year, month, day = (int(g) for g in m.groups())
    try:
        return dt.date(year, month, day)
    except ValueError as exc:
        raise ValueError(f"invalid date {text!r}: {exc}") from None


def convert_cell(text: str, ctype: ColumnType):
    """Convert one raw cell; blank cells become ``None``."""
    value = text.strip()
    if not value:
        return None
    if ctype is ColumnType.DATE:
        return parse_date(value)
    if ctype is ColumnType.INTEGER:
        try:
            return int(value)
        except ValueError:
            raise ValueError(f"unparseable integer {value!r}") from None
    if ctype is ColumnType.CATEGORICAL:
        return value.upper()
    return value


def iter_rows(
    lines: Iterable[str], schema: Schema, *, first_line: int = 2, lenient: bool = False,
    rejected: list | None = None,
) -> Iterator[tuple]:
    """Yield typed rows from body lines; blank lines are ignored.

    In lenient mode malformed rows are skipped and appended to ``rejected``.
    """
    types = [c.type for c in schema.columns]
    for lineno, line in enumerate(lines, start=first_line):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            if len(cells) != len(types):
                raise IngestError(f"expected {len(types)} fields, found {len(cells)}", lineno)
            try:
                row = tuple(convert_cell(c, t) for c, t in zip(cells, types))
            except ValueError as exc:
                raise IngestError(str(exc), lineno) from None
        except IngestError as exc:
            if not lenient:
                raise
            if rejected is not None:
                rejected.append((lineno, str(exc)))
            continue
        yield row


def _text_stream(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig")


def parse_csv(source, schema: Schema, *, lenient: bool = False) -> Table:
    """Read a header + body CSV stream into a :class:`Table`.

    ``source`` may be bytes, text, or a binary/text file object. The header
    must name the schema's columns in order.
    """
    stream = _text_stream(source)
    header = stream.readline()
    if not header.strip():
        raise IngestError("missing header line", 1)
    # names may be aliased spellings, so only arity is checked here
    found = parse_schema(header).names
    if len(found) != len(schema):
        raise IngestError(f"header {list(found)} does not match schema {list(schema.names)}", 1)
    rejected: list = []
    rows = tuple(iter_rows(stream, schema, lenient=lenient, rejected=rejected))
    return Table(schema, rows, tuple(rejected))


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, dt.date):
        return value.isoformat()
    text = str(value)
    if "," in text or "\n" in text or "\r" in text:
        raise ValueError(f"value {text!r} cannot be written without quoting")
    return text


def write_csv(table: Table, sink: IO) -> None:
    """Serialize ``table`` canonically (ISO dates, no quoting) to ``sink``.

    Accepts text or binary sinks.
    """
    lines = [",".join(table.schema.names)]
    lines.extend(",".join(format_cell(v) for v in row) for row in table.rows)
    text = "\n".join(lines) + "\n"
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))


def to_csv_bytes(table: Table) -> bytes:
    buf = io.BytesIO()
    write_csv(table, buf)
    return buf.getvalue()

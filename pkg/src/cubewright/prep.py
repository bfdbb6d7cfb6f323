"""Pre-processing: column projection, synonym canonicalization, domain checks."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .ingest import ColumnType, Schema, Table, normalize_name

UNKNOWN = "UNKNOWN"


class CleaningError(ValueError):
    pass


class MissingPolicy(enum.Enum):
    ERROR = "error"
    MAP_TO_UNKNOWN = "map_to_unknown"


@dataclass(frozen=True)
class CleaningSpec:
    keep: tuple[str, ...]
    synonyms: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    on_missing: MissingPolicy = MissingPolicy.ERROR

    def __post_init__(self):
        keep = tuple(normalize_name(k) for k in self.keep)
        if not keep:
            raise CleaningError("keep list is empty")
        if len(set(keep)) != len(keep):
            raise CleaningError(f"keep list repeats a column: {list(keep)}")
        synonyms = {}
        for col, mapping in self.synonyms.items():
            mapping = {str(k).strip().upper(): str(v).strip().upper() for k, v in mapping.items()}
            chained = [v for v in mapping.values() if v in mapping and mapping[v] != v]
            if chained:
                raise CleaningError(f"synonym map for {col} chains through {chained}")
            synonyms[normalize_name(col)] = mapping
        object.__setattr__(self, "keep", keep)
        object.__setattr__(self, "synonyms", synonyms)
        object.__setattr__(self, "on_missing", MissingPolicy(self.on_missing))

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CleaningSpec":
        return cls(
            keep=tuple(doc["keep"]),
            synonyms=doc.get("synonyms", {}),
            on_missing=MissingPolicy(doc.get("on_missing", "error")),
        )

    @classmethod
    def from_json(cls, text: str) -> "CleaningSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "keep": list(self.keep),
            "synonyms": {k: dict(v) for k, v in self.synonyms.items()},
            "on_missing": self.on_missing.value,
        }

    @classmethod
    def identity(cls, schema: Schema) -> "CleaningSpec":
        return cls(keep=schema.names)


def output_schema(schema: Schema, spec: CleaningSpec) -> Schema:
    missing = [k for k in spec.keep if k not in schema.names]
    if missing:
        raise CleaningError(f"unknown keep column(s) {missing}; table has {list(schema.names)}")
    unknown_syn = [k for k in spec.synonyms if k not in schema.names]
    if unknown_syn:
        raise CleaningError(f"synonyms given for unknown column(s) {unknown_syn}")
    return Schema(tuple(schema.column(k) for k in spec.keep))


def clean_rows(rows: Iterable[tuple], schema: Schema, spec: CleaningSpec,
               *, start: int = 0) -> Iterator[tuple]:
    """Project and canonicalize rows lazily; ``start`` offsets row numbers in errors."""
    out = output_schema(schema, spec)
    picks = [schema.index(k) for k in spec.keep]
    plans = []
    for col, src in zip(out.columns, picks):
        plans.append((src, col, spec.synonyms.get(col.name)))
    unknown_ok = spec.on_missing is MissingPolicy.MAP_TO_UNKNOWN
    for n, row in enumerate(rows, start=start):
        values = []
        for src, col, synonyms in plans:
            v = row[src]
            if v is None:
                if unknown_ok and col.type in (ColumnType.CATEGORICAL, ColumnType.TEXT):
                    v = UNKNOWN
                else:
                    raise CleaningError(f"row {n}: empty value in column {col.name}")
            elif synonyms and isinstance(v, str):
                v = synonyms.get(v.upper(), v)
            values.append(v)
        yield tuple(values)


def clean(table: Table, spec: CleaningSpec) -> Table:
    """Keep ``spec.keep`` columns in order and canonicalize their values.

    Row order and multiplicity are preserved; duplicates are real orders.
    """
    out = output_schema(table.schema, spec)
    return Table(out, tuple(clean_rows(table.rows, table.schema, spec)))


def validate(table: Table, domains: Mapping[str, Iterable]) -> list[tuple[int, str, object]]:
    """Return ``(row index, column, value)`` for every cell outside its domain."""
    checks = []
    for col, members in domains.items():
        name = normalize_name(col)
        if name not in table.schema.names:
            raise CleaningError(f"domain given for unknown column {name}")
        checks.append((table.schema.index(name), name, frozenset(members)))
    violations = []
    for r, row in enumerate(table.rows):
        for i, name, allowed in checks:
            if row[i] not in allowed:
                violations.append((r, name, row[i]))
    return violations


__all__ = [
    "CleaningError", "CleaningSpec", "MissingPolicy", "UNKNOWN",
    "clean", "clean_rows", "output_schema", "validate",
]

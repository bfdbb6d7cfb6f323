"""Sparse COUNT cube over dictionary-encoded dimensions.

Cells are stored as ``{coordinate: count}`` with coordinates made of member
indices; absent coordinates count zero. Every operation returns a new cube.
Cubes built from a table keep a reference to it together with the log of
operations applied since, which is what makes drill-down possible: the cube
is rebuilt from the base rows and the log replayed without the step being
undone.
"""

from __future__ import annotations

import datetime as dt
import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import kernels
from .ingest import ColumnType, Table, normalize_name, parse_date


class CubeError(ValueError):
    pass


class MemberError(CubeError):
    """A value is not a member of the dimension it was used with."""


class DateLevel(enum.IntEnum):
    DAY = 0
    MONTH = 1
    YEAR = 2

    @classmethod
    def parse(cls, text: "str | DateLevel") -> "DateLevel":
        if isinstance(text, cls):
            return text
        try:
            return cls[str(text).strip().upper()]
        except KeyError:
            raise CubeError(f"unknown date level {text!r}") from None


def date_key(value, level: DateLevel) -> object:
    """Project a day (``date``) or month (``YYYY-MM``) member onto ``level``."""
    if level is DateLevel.DAY:
        return value
    text = value.isoformat() if isinstance(value, dt.date) else str(value)
    return text[:7] if level is DateLevel.MONTH else text[:4]


@dataclass(frozen=True)
class Dimension:
    name: str
    members: tuple
    declared: bool = False
    level: DateLevel | None = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        index = {m: i for i, m in enumerate(self.members)}
        if len(index) != len(self.members):
            raise CubeError(f"dimension {self.name} has repeated members")
        object.__setattr__(self, "_index", index)

    @property
    def is_date(self) -> bool:
        return self.level is not None

    def __len__(self) -> int:
        return len(self.members)

    def index(self, value) -> int:
        """Index of ``value``, accepting the textual forms used in queries."""
        i = self._index.get(value)
        if i is not None:
            return i
        i = self._index.get(self.coerce(value))
        if i is None:
            raise MemberError(f"{value!r} is not a member of {self.name}")
        return i

    def coerce(self, value):
        if self.level is DateLevel.DAY and isinstance(value, str):
            try:
                return parse_date(value)
            except ValueError:
                return value
        if isinstance(value, str):
            return value.strip().upper() if self.level is None else value.strip()
        return value

    def __contains__(self, value) -> bool:
        try:
            self.index(value)
        except MemberError:
            return False
        return True


class Op(NamedTuple):
    kind: str  # slice | dice | rollup | rollup_date
    dim: str | None = None
    values: tuple = ()
    level: DateLevel | None = None


@dataclass(frozen=True)
class Source:
    dim_columns: tuple[str, ...]
    declared: Mapping[str, tuple] | None


@dataclass(frozen=True, eq=False)
class Cube:
    dims: tuple[Dimension, ...]
    cells: Mapping[tuple, int]
    base: Table | None = None
    source: Source | None = None
    log: tuple[Op, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, Cube):
            return NotImplemented
        return self.dims == other.dims and dict(self.cells) == dict(other.cells)

    __hash__ = None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(d) for d in self.dims)

    def dim_index(self, name: str) -> int:
        key = normalize_name(name)
        for i, d in enumerate(self.dims):
            if d.name == key:
                return i
        raise CubeError(f"no dimension {key!r}; cube has {list(self.names)}")

    def dim(self, name: str) -> Dimension:
        return self.dims[self.dim_index(name)]

    @property
    def total(self) -> int:
        return sum(self.cells.values())

    def facts(self) -> list[tuple[tuple, int]]:
        """Stored (nonzero) cells as member tuples, in first-seen order."""
        return [(tuple(d.members[i] for d, i in zip(self.dims, key)), n)
                for key, n in self.cells.items()]

    def iter_dense(self) -> Iterator[tuple[tuple, int]]:
        """Every coordinate of the full member grid with its count (zeros included)."""
        for key in itertools.product(*(range(len(d)) for d in self.dims)):
            yield tuple(d.members[i] for d, i in zip(self.dims, key)), self.cells.get(key, 0)

    def dense(self) -> np.ndarray:
        grid = np.zeros(self.shape, dtype=np.int64)
        for key, n in self.cells.items():
            grid[key] = n
        return grid

    def _derive(self, dims, cells, op: Op | None) -> "Cube":
        log = self.log + (op,) if op is not None else self.log
        return Cube(tuple(dims), cells, self.base, self.source, log)


def _encode(values: Sequence, dim: Dimension | None):
    if dim is not None:
        index = dim._index
        codes = []
        for v in values:
            i = index.get(v)
            if i is None:
                raise MemberError(f"value {v!r} is not among the declared members of {dim.name}")
            codes.append(i)
        return codes, dim.members
    index: dict = {}
    codes = [index.setdefault(v, len(index)) for v in values]
    return codes, tuple(index)


def _declared_dimension(name: str, ctype: ColumnType, members: Iterable) -> Dimension:
    if ctype is ColumnType.DATE:
        values = [m if isinstance(m, dt.date) else parse_date(str(m)) for m in members]
        return Dimension(name, tuple(values), True, DateLevel.DAY)
    return Dimension(name, tuple(str(m).strip().upper() for m in members), True)


def build_cube(table: Table, dim_columns: Sequence[str],
               declared_members: Mapping[str, Iterable] | None = None) -> Cube:
    """Count rows of ``table`` per distinct combination of ``dim_columns``.

    Undeclared dimensions list members in first-seen row order; declared
    ones keep the supplied order and may contain members never observed.
    """
    names = [normalize_name(c) for c in dim_columns]
    if len(set(names)) != len(names):
        raise CubeError(f"dimension listed twice in {names}")
    declared = {normalize_name(k): tuple(v) for k, v in (declared_members or {}).items()}
    stray = set(declared) - set(names)
    if stray:
        raise CubeError(f"declared members for non-dimension column(s) {sorted(stray)}")

    dims, columns = [], []
    for name in names:
        if name not in table.schema:
            raise CubeError(f"unknown column {name!r}; table has {list(table.schema.names)}")
        col = table.schema.column(name)
        if col.type not in (ColumnType.CATEGORICAL, ColumnType.DATE):
            raise CubeError(f"column {name} is {col.type.value}; dimensions must be categorical or date")
        values = table.column_values(name)
        if any(v is None for v in values):
            raise CubeError(f"column {name} has empty values; clean the table first")
        decl = _declared_dimension(name, col.type, declared[name]) if name in declared else None
        codes, members = _encode(values, decl)
        level = DateLevel.DAY if col.type is ColumnType.DATE else None
        dims.append(Dimension(name, members, decl is not None, level))
        columns.append(codes)

    radices = [len(d) for d in dims]
    codes = np.array(columns, dtype=np.int64).T.reshape(len(table), len(dims))
    keys, counts = kernels.count_codes(codes, radices)
    cells = dict(zip(kernels.unravel(keys, radices), counts))
    source = Source(tuple(names), {k: declared[k] for k in declared} or None)
    return Cube(tuple(dims), cells, table, source, ())


def _regroup(cube: Cube, maps: Sequence[Sequence[int] | None],
             new_dims: Sequence[Dimension | None]) -> dict:
    """Remap every dimension's indices and re-sum.

    ``maps[j]`` sends old member index -> new index (-1 drops the cell);
    ``None`` leaves the dimension unchanged. ``new_dims[j] is None`` removes
    the dimension from the result.
    """
    d = len(cube.dims)
    full = [list(range(len(dim))) if m is None else list(m) for dim, m in zip(cube.dims, maps)]
    width = max([len(m) for m in full] + [1])
    table = np.full((d, width), -1, dtype=np.int64)
    for j, m in enumerate(full):
        table[j, :len(m)] = m
    radices = [len(nd) if nd is not None else 1 for nd in new_dims]
    keep = [j for j, nd in enumerate(new_dims) if nd is not None]
    coords = np.array(list(cube.cells), dtype=np.int64).reshape(len(cube.cells), d)
    counts = np.fromiter(cube.cells.values(), dtype=np.int64, count=len(cube.cells))
    keys, sums = kernels.remap_sum(coords, counts, table, radices)
    out = {}
    for key, n in zip(kernels.unravel(keys, radices), sums):
        out[tuple(key[j] for j in keep)] = n
    return out


def cell(cube: Cube, coordinate: Sequence) -> int:
    """Count at ``coordinate`` (one value per dimension); zero when not stored."""
    if len(coordinate) != len(cube.dims):
        raise CubeError(f"coordinate has {len(coordinate)} values, cube has {len(cube.dims)} dims")
    key = tuple(d.index(v) for d, v in zip(cube.dims, coordinate))
    return cube.cells.get(key, 0)


def total(cube: Cube) -> int:
    return cube.total


def slice(cube: Cube, dim: str, value) -> Cube:  # noqa: A001 - OLAP vocabulary
    """Fix ``dim`` to ``value`` and drop it."""
    j = cube.dim_index(dim)
    d = cube.dims[j]
    v = d.index(value)
    maps = [None] * len(cube.dims)
    maps[j] = [0 if i == v else -1 for i in range(len(d))]
    new_dims = list(cube.dims)
    new_dims[j] = None
    cells = _regroup(cube, maps, new_dims)
    op = Op("slice", d.name, (d.members[v],), d.level)
    return cube._derive([nd for nd in new_dims if nd is not None], cells, op)


def dice(cube: Cube, restriction: Mapping[str, Iterable]) -> Cube:
    """Restrict dimensions to member subsets; member order is kept."""
    maps: list = [None] * len(cube.dims)
    new_dims = list(cube.dims)
    ops = []
    for name, subset in restriction.items():
        j = cube.dim_index(name)
        d = cube.dims[j]
        wanted = {d.index(v) for v in subset}
        if not wanted:
            raise CubeError(f"empty member subset for {d.name}")
        kept = [i for i in range(len(d)) if i in wanted]
        remap = {old: new for new, old in enumerate(kept)}
        maps[j] = [remap.get(i, -1) for i in range(len(d))]
        new_dims[j] = Dimension(d.name, tuple(d.members[i] for i in kept), d.declared, d.level)
        ops.append(Op("dice", d.name, new_dims[j].members, d.level))
    cells = _regroup(cube, maps, new_dims)
    return Cube(tuple(new_dims), cells, cube.base, cube.source, cube.log + tuple(ops))


def rollup(cube: Cube, drop_dim: str) -> Cube:
    """Sum ``drop_dim`` away."""
    j = cube.dim_index(drop_dim)
    if len(cube.dims) < 2:
        raise CubeError("cannot roll up the last dimension; use total()")
    maps: list = [None] * len(cube.dims)
    maps[j] = [0] * len(cube.dims[j])
    new_dims = list(cube.dims)
    new_dims[j] = None
    cells = _regroup(cube, maps, new_dims)
    return cube._derive([nd for nd in new_dims if nd is not None], cells,
                        Op("rollup", cube.dims[j].name))


def _date_dim_index(cube: Cube) -> int:
    for j, d in enumerate(cube.dims):
        if d.is_date:
            return j
    raise CubeError("cube has no date dimension")


def rollup_date(cube: Cube, to_level: DateLevel | str) -> Cube:
    """Regroup the date dimension to months (``YYYY-MM``) or years (``YYYY``).

    Rolling up to the current level returns the cube unchanged.
    """
    level = DateLevel.parse(to_level)
    j = _date_dim_index(cube)
    d = cube.dims[j]
    if level == d.level:
        return cube
    if level < d.level:
        raise CubeError(f"{d.name} is at {d.level.name.lower()} level; "
                        f"{level.name.lower()} is not coarser")
    groups = [date_key(m, level) for m in d.members]
    members = sorted(set(groups))
    pos = {g: i for i, g in enumerate(members)}
    maps: list = [None] * len(cube.dims)
    maps[j] = [pos[g] for g in groups]
    new_dims = list(cube.dims)
    new_dims[j] = Dimension(d.name, tuple(members), d.declared, level)
    cells = _regroup(cube, maps, new_dims)
    return cube._derive(new_dims, cells, Op("rollup_date", d.name, level=level))


def _replay(cube: Cube, op: Op) -> Cube:
    if op.kind == "rollup":
        return rollup(cube, op.dim)
    if op.kind == "rollup_date":
        return rollup_date(cube, op.level)
    d = cube.dim(op.dim)
    values = op.values
    if d.is_date and op.level is not None and op.level > d.level:
        # restriction recorded at a coarser date level than the replayed cube
        values = tuple(m for m in d.members if date_key(m, op.level) in set(values))
        if op.kind == "slice" or not values:
            raise CubeError(f"cannot replay {op.kind} on {d.name} at a finer date level")
    if op.kind == "slice":
        return slice(cube, op.dim, values[0])
    return dice(cube, {op.dim: values})


def drilldown(cube: Cube, restore: str | DateLevel) -> Cube:
    """Undo a roll-up by recomputing from the base table.

    ``restore`` is either a dimension that was rolled up, or a finer
    :class:`DateLevel` for the date dimension. Recorded slices and dices are
    re-applied after the rebuild.
    """
    if cube.base is None or cube.source is None:
        raise CubeError("cube has no base table to drill down into")
    if isinstance(restore, DateLevel):
        level = restore
        j = _date_dim_index(cube)
        current = cube.dims[j].level
        if level >= current:
            raise CubeError(f"{level.name.lower()} is not finer than {current.name.lower()}")
        log = []
        for op in cube.log:
            if op.kind == "rollup_date" and op.level > level:
                if level is not DateLevel.DAY:
                    log.append(op._replace(level=level))
            else:
                log.append(op)
    else:
        name = normalize_name(restore)
        if name not in cube.source.dim_columns:
            raise CubeError(f"{name} is not a dimension of the base cube")
        if name in cube.names:
            raise CubeError(f"{name} is already present; nothing finer to restore")
        removed = [op for op in cube.log if op.kind == "rollup" and op.dim == name]
        if not removed:
            raise CubeError(f"{name} was sliced, not rolled up; it cannot be restored")
        log = [op for op in cube.log if op is not removed[0]]

    out = build_cube(cube.base, cube.source.dim_columns, cube.source.declared)
    for op in log:
        out = _replay(out, op)
    return out


@dataclass(frozen=True)
class CrossTab:
    row_dim: Dimension
    col_dim: Dimension
    counts: tuple[tuple[int, ...], ...]
    row_totals: tuple[int, ...]
    col_totals: tuple[int, ...]
    grand_total: int

    def at(self, row, col) -> int:
        return self.counts[self.row_dim.index(row)][self.col_dim.index(col)]

    def row_total(self, row) -> int:
        return self.row_totals[self.row_dim.index(row)]

    def col_total(self, col) -> int:
        return self.col_totals[self.col_dim.index(col)]


def crosstab(cube: Cube, row_dim: str, col_dim: str) -> CrossTab:
    """Dense two-way table with marginals; other dimensions are summed away."""
    r = cube.dim_index(row_dim)
    c = cube.dim_index(col_dim)
    if r == c:
        raise CubeError(f"crosstab needs two different dimensions, got {cube.dims[r].name} twice")
    maps: list = [None] * len(cube.dims)
    new_dims: list = [None] * len(cube.dims)
    for j in range(len(cube.dims)):
        if j in (r, c):
            new_dims[j] = cube.dims[j]
        else:
            maps[j] = [0] * len(cube.dims[j])
    cells = _regroup(cube, maps, new_dims)
    rows, cols = cube.dims[r], cube.dims[c]
    grid = [[0] * len(cols) for _ in range(len(rows))]
    for (a, b), n in cells.items():
        if r < c:
            grid[a][b] = n
        else:
            grid[b][a] = n
    row_totals = tuple(sum(line) for line in grid)
    col_totals = tuple(sum(line[k] for line in grid) for k in range(len(cols)))
    return CrossTab(rows, cols, tuple(tuple(line) for line in grid),
                    row_totals, col_totals, sum(row_totals))


class Top(NamedTuple):
    member: object
    count: int
    tie: bool


def argmax_margin(ct: CrossTab, axis: str) -> Top:
    """Member with the largest marginal total on ``axis`` ("row" or "col").

    Ties go to the earliest member and set ``tie``.
    """
    axis = axis.strip().lower()
    if axis in ("row", "rows"):
        dim, totals = ct.row_dim, ct.row_totals
    elif axis in ("col", "cols", "column", "columns"):
        dim, totals = ct.col_dim, ct.col_totals
    else:
        raise CubeError(f"axis must be 'row' or 'col', not {axis!r}")
    if not totals:
        raise CubeError(f"{dim.name} has no members")
    best = max(totals)
    k = totals.index(best)
    return Top(dim.members[k], best, totals.count(best) > 1)


def member_to_json(value):
    return value.isoformat() if isinstance(value, dt.date) else value


def cube_to_dict(cube: Cube) -> dict:
    return {
        "dims": [
            {
                "name": d.name,
                "members": [member_to_json(m) for m in d.members],
                "declared": d.declared,
                "level": d.level.name.lower() if d.level is not None else None,
            }
            for d in cube.dims
        ],
        "cells": [[list(key), n] for key, n in cube.cells.items()],
    }


def cube_from_dict(doc: Mapping) -> Cube:
    dims = []
    for spec in doc["dims"]:
        level = DateLevel.parse(spec["level"]) if spec.get("level") else None
        members = spec["members"]
        if level is DateLevel.DAY:
            members = [dt.date.fromisoformat(m) for m in members]
        dims.append(Dimension(spec["name"], tuple(members), bool(spec.get("declared")), level))
    cells = {}
    for key, n in doc["cells"]:
        key = tuple(key)
        if len(key) != len(dims) or any(not 0 <= i < len(d) for i, d in zip(key, dims)):
            raise CubeError(f"cell {list(key)} is outside the dimension ranges")
        if n < 1:
            raise CubeError(f"stored cell {list(key)} has non-positive count {n}")
        cells[key] = n
    return Cube(tuple(dims), cells)

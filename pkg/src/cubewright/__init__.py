"""cubewright: an in-memory OLAP count cube."""

from .cube import (
    CrossTab, Cube, CubeError, DateLevel, Dimension, MemberError, Top,
    argmax_margin, build_cube, cell, crosstab, dice, drilldown, rollup,
    rollup_date, slice, total,
)
from .ingest import ColumnType, IngestError, Schema, Table, parse_csv, parse_schema, write_csv
from .prep import CleaningSpec, MissingPolicy, clean, validate

__version__ = "0.1.0"

import datetime as dt
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubewright.ingest import (
    Column, ColumnType, IngestError, Schema, Table, parse_csv, parse_date, parse_schema,
    to_csv_bytes, write_csv,
)

ORDER_FORM = "DATE,FNAME,LNAME,GENDER,MARITAL STATUS,LOCATION,TYPE OF CAKE,PAYMENT MODE,AGE"


def test_order_form_schema():
    schema = parse_schema(ORDER_FORM, {"DATE": ColumnType.DATE, "AGE": "integer"})
    assert schema.names == ("DATE", "FNAME", "LNAME", "GENDER", "MARITAL_STATUS", "LOCATION",
                            "TYPE_OF_CAKE", "PAYMENT_MODE", "AGE")
    assert schema.column("date").type is ColumnType.DATE
    assert schema.column("AGE").type is ColumnType.INTEGER
    assert schema.column("marital status").type is ColumnType.CATEGORICAL


def test_single_column_defaults_to_categorical():
    schema = parse_schema("X")
    assert schema.columns == (Column("X", ColumnType.CATEGORICAL),)


@pytest.mark.parametrize("header", ["A,a", "marital status,MARITAL_STATUS", "x , X"])
def test_duplicate_after_normalization(header):
    with pytest.raises(IngestError, match="duplicate"):
        parse_schema(header)


@pytest.mark.parametrize("header", ["", "   ", "\n"])
def test_empty_header(header):
    with pytest.raises(IngestError):
        parse_schema(header)


def test_aliases_accept_prose_spelling():
    aliases = {"FIRSTNAME": "FNAME", "LASTNAME": "LNAME"}
    prose = parse_schema("DATE,FIRSTNAME,LASTNAME", {"DATE": "date"}, aliases)
    table = parse_schema("DATE,FNAME,LNAME", {"DATE": "date"}, aliases)
    assert prose == table


def test_bakery_rows(bakery_raw):
    assert len(bakery_raw) == 7
    assert len(bakery_raw.schema) == 9
    first = dict(zip(bakery_raw.schema.names, bakery_raw.rows[0]))
    assert first["DATE"] == dt.date(2011, 2, 12)
    assert first["FNAME"] == "LEANZS"
    assert first["TYPE_OF_CAKE"] == "VANILA"
    assert first["AGE"] == 18
    assert bakery_raw.column_values("DATE")[-1] == dt.date(2011, 3, 29)


@pytest.mark.parametrize("cell, expected", [
    ("29/ 3/2011", dt.date(2011, 3, 29)),
    ("13/ 2/2011", dt.date(2011, 2, 13)),
    ("29/3/2011", dt.date(2011, 3, 29)),
    (" 12/2/ 2011 ", dt.date(2011, 2, 12)),
    ("2011-02-12", dt.date(2011, 2, 12)),
])
def test_damaged_and_iso_dates(cell, expected):
    assert parse_date(cell) == expected


@pytest.mark.parametrize("cell", ["31/2/2011", "2/13/2011x", "12-2-2011", "0/1/2011", "29/2/2011"])
def test_invalid_dates(cell):
    with pytest.raises(ValueError):
        parse_date(cell)


def test_header_only_is_empty(bakery_schema):
    table = parse_csv(ORDER_FORM.encode() + b"\n", bakery_schema)
    assert len(table) == 0 and table.schema == bakery_schema


def test_categoricals_trimmed_and_uppercased():
    schema = parse_schema("K,T", {"T": "text"})
    table = parse_csv(b"K,T\n  single , Mixed Case \n", schema)
    assert table.rows == (("SINGLE", "Mixed Case"),)


def test_blank_lines_are_skipped():
    schema = parse_schema("K")
    table = parse_csv(b"K\na\n\n  \nb\n", schema)
    assert table.column_values("K") == ["A", "B"]


def test_arity_error_reports_line(bakery_bytes, bakery_schema):
    lines = bakery_bytes.decode().splitlines()
    lines[3] = lines[3].rsplit(",", 1)[0]
    with pytest.raises(IngestError) as err:
        parse_csv("\n".join(lines).encode(), bakery_schema)
    assert err.value.line == 4


@pytest.mark.parametrize("bad, msg", [("x/2/2011", "date"), ("eighteen", "integer")])
def test_bad_values(bad, msg):
    schema = parse_schema("DATE,AGE", {"DATE": "date", "AGE": "integer"})
    row = f"{bad},18" if msg == "date" else f"1/1/2011,{bad}"
    with pytest.raises(IngestError, match=msg):
        parse_csv(f"DATE,AGE\n{row}\n".encode(), schema)


def test_lenient_skips_and_counts():
    schema = parse_schema("DATE,AGE", {"DATE": "date", "AGE": "integer"})
    table = parse_csv(b"DATE,AGE\n1/1/2011,3\nbad,4\n2/1/2011\n3/1/2011,5\n", schema, lenient=True)
    assert len(table) == 2
    assert [line for line, _ in table.rejected] == [3, 4]


def test_write_empty_table_is_header_only():
    schema = parse_schema("DATE,MARITAL STATUS", {"DATE": "date"})
    assert to_csv_bytes(Table(schema)) == b"DATE,MARITAL_STATUS\n"


def test_write_cleaned_table(bakery_table):
    text = to_csv_bytes(bakery_table).decode()
    lines = text.splitlines()
    assert lines[0] == "DATE,MARITAL_STATUS,TYPE_OF_CAKE"
    assert len(lines) == 8
    assert lines[1] == "2011-02-12,SINGLE,VANILLA"
    assert lines[7] == "2011-03-29,SINGLE,WEDDING"


def test_round_trip_bakery(bakery_raw):
    once = to_csv_bytes(bakery_raw)
    again = parse_csv(once, bakery_raw.schema)
    assert again == bakery_raw
    assert to_csv_bytes(again) == once


def test_write_to_text_sink(bakery_table):
    buf = io.StringIO()
    write_csv(bakery_table, buf)
    assert buf.getvalue().encode() == to_csv_bytes(bakery_table)


def test_comma_in_value_is_refused():
    schema = parse_schema("T", {"T": "text"})
    with pytest.raises(ValueError):
        to_csv_bytes(Table(schema, (("a,b",),)))


_cat = st.text(st.characters(whitelist_categories=("Lu", "Nd"), max_codepoint=127), min_size=1,
               max_size=6)
_text = st.text(st.characters(blacklist_characters=",\r\n", blacklist_categories=("Cs", "Zs", "Cc")),
                min_size=1, max_size=8)
_row = st.tuples(st.one_of(st.none(), st.dates(dt.date(1900, 1, 1), dt.date(2100, 12, 31))),
                 st.one_of(st.none(), _cat), st.one_of(st.none(), st.integers(-10**6, 10**6)),
                 st.one_of(st.none(), _text))


@settings(max_examples=200)
@given(st.lists(_row, max_size=20))
def test_round_trip_property(rows):
    schema = Schema((Column("D", ColumnType.DATE), Column("C", ColumnType.CATEGORICAL),
                     Column("I", ColumnType.INTEGER), Column("T", ColumnType.TEXT)))
    # text cells are trimmed on read; blank rows vanish
    rows = [r for r in rows if any(v is not None for v in r)]
    rows = [r[:3] + ((r[3].strip() or None) if r[3] is not None else None,) for r in rows]
    rows = [r for r in rows if any(v is not None for v in r)]
    table = Table(schema, tuple(rows))
    assert parse_csv(to_csv_bytes(table), schema) == table

import datetime as dt

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubewright.ingest import Column, ColumnType, Schema, Table, parse_schema
from cubewright.prep import CleaningError, CleaningSpec, MissingPolicy, UNKNOWN, clean, validate

from conftest import FEB12, FEB13, MAR28, MAR29

# cleaned bakery rows, VANILA canonicalized to VANILLA
CLEANED_ROWS = [
    (FEB12, "SINGLE", "VANILLA"),
    (FEB12, "SINGLE", "VANILLA"),
    (FEB13, "MARRIED", "MILKY"),
    (FEB13, "SINGLE", "VANILLA"),
    (MAR28, "SINGLE", "WEDDING"),
    (MAR28, "SINGLE", "WEDDING"),
    (MAR29, "SINGLE", "WEDDING"),
]


def test_bakery_cleaning(bakery_table):
    assert bakery_table.schema.names == ("DATE", "MARITAL_STATUS", "TYPE_OF_CAKE")
    assert list(bakery_table.rows) == CLEANED_ROWS


def test_duplicates_are_kept(bakery_table):
    assert bakery_table.rows[0] == bakery_table.rows[1]


def test_identity_projection(bakery_raw):
    assert clean(bakery_raw, CleaningSpec.identity(bakery_raw.schema)) == bakery_raw


def test_empty_table(bakery_schema, bakery_spec):
    out = clean(Table(bakery_schema), bakery_spec)
    assert len(out) == 0 and len(out.schema) == 3


def test_keep_order_follows_spec(bakery_raw):
    out = clean(bakery_raw, CleaningSpec(keep=("type of cake", "DATE")))
    assert out.schema.names == ("TYPE_OF_CAKE", "DATE")
    assert out.rows[0] == ("VANILA", dt.date(2011, 2, 12))


def test_unknown_keep_column(bakery_raw):
    with pytest.raises(CleaningError, match="PRICE"):
        clean(bakery_raw, CleaningSpec(keep=("DATE", "PRICE")))


def test_synonym_chain_rejected():
    with pytest.raises(CleaningError, match="chain"):
        CleaningSpec(keep=("A",), synonyms={"A": {"X": "Y", "Y": "Z"}})


def test_json_document():
    spec = CleaningSpec.from_json(
        '{"keep": ["DATE", "MARITAL STATUS"], "synonyms": {"TYPE_OF_CAKE": {"vanila": "Vanilla"}},'
        ' "on_missing": "map_to_unknown"}')
    assert spec.keep == ("DATE", "MARITAL_STATUS")
    assert spec.synonyms == {"TYPE_OF_CAKE": {"VANILA": "VANILLA"}}
    assert spec.on_missing is MissingPolicy.MAP_TO_UNKNOWN
    assert CleaningSpec.from_dict(spec.to_dict()) == spec


def _gappy():
    schema = Schema((Column("K", ColumnType.CATEGORICAL), Column("D", ColumnType.DATE)))
    return Table(schema, (("A", FEB12), (None, FEB13)))


def test_missing_is_error_by_default():
    with pytest.raises(CleaningError, match="row 1"):
        clean(_gappy(), CleaningSpec(keep=("K",)))


def test_missing_maps_to_unknown():
    out = clean(_gappy(), CleaningSpec(keep=("K", "D"), on_missing="map_to_unknown"))
    assert out.column_values("K") == ["A", UNKNOWN]


def test_missing_date_stays_an_error_under_unknown_policy():
    schema = Schema((Column("D", ColumnType.DATE),))
    with pytest.raises(CleaningError):
        clean(Table(schema, ((None,),)), CleaningSpec(keep=("D",), on_missing="map_to_unknown"))


def test_validate_clean_table(bakery_table):
    assert validate(bakery_table, {"MARITAL_STATUS": {"SINGLE", "MARRIED", "WIDOWED"}}) == []


def test_validate_out_of_domain(bakery_table):
    rows = bakery_table.rows + ((MAR29, "DIVORCED", "WEDDING"),)
    table = Table(bakery_table.schema, rows)
    assert validate(table, {"marital status": ["SINGLE", "MARRIED", "WIDOWED"]}) == [
        (7, "MARITAL_STATUS", "DIVORCED")]


def test_validate_empty(bakery_table):
    assert validate(Table(bakery_table.schema), {"MARITAL_STATUS": {"SINGLE"}}) == []


_value = st.sampled_from(["A", "B", "C", "AA", None])


@given(st.lists(st.tuples(_value, _value, _value), max_size=30),
       st.dictionaries(st.sampled_from(["A", "B", "C"]), st.sampled_from(["X", "Y"]), max_size=3))
def test_clean_properties(rows, synonyms):
    schema = parse_schema("P,Q,R")
    table = Table(schema, tuple(rows))
    spec = CleaningSpec(keep=("R", "P"), synonyms={"P": synonyms}, on_missing="map_to_unknown")
    out = clean(table, spec)
    assert len(out) == len(table)
    again = clean(out, CleaningSpec.identity(out.schema))
    assert again == out
    mapped = out.column_values("P")
    assert all(spec.synonyms["P"].get(v, v) == v for v in mapped)

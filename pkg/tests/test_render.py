import json

from cubewright.cube import crosstab, rollup, slice
from cubewright.query import execute
from cubewright.render import render

CAKE_BY_DATE_CSV = """COUNT,2011-02-12,2011-02-13,2011-03-28,2011-03-29,TOTAL
WEDDING,0,0,2,1,3
VANILLA,2,1,0,0,3
MILKY,0,1,0,0,1
TOTAL,2,2,2,1,7
"""

CAKE_BY_STATUS_PRETTY = """COUNT    SINGLE  MARRIED  WIDOWED  TOTAL
WEDDING       3        0        0      3
VANILLA       3        0        0      3
MILKY         0        1        0      1
TOTAL         6        1        0      7
"""


def test_cake_by_date_csv(bakery_cube):
    ct = crosstab(rollup(bakery_cube, "MARITAL_STATUS"), "TYPE_OF_CAKE", "DATE")
    assert render(ct, "csv") == CAKE_BY_DATE_CSV


def test_cake_by_status_pretty(bakery_cube):
    assert render(crosstab(bakery_cube, "TYPE_OF_CAKE", "MARITAL_STATUS")) == CAKE_BY_STATUS_PRETTY


def _reparse(text):
    lines = [line.split(",") for line in text.strip().splitlines()]
    body = [[int(v) for v in row[1:-1]] for row in lines[1:-1]]
    return body, [int(r[-1]) for r in lines[1:-1]], [int(v) for v in lines[-1][1:-1]], int(lines[-1][-1])


def test_csv_margins_recompute(bakery_cube):
    for rows, cols in [("TYPE_OF_CAKE", "DATE"), ("DATE", "MARITAL_STATUS"),
                       ("MARITAL_STATUS", "TYPE_OF_CAKE")]:
        body, row_totals, col_totals, grand = _reparse(render(crosstab(bakery_cube, rows, cols), "csv"))
        assert [sum(r) for r in body] == row_totals
        assert [sum(c) for c in zip(*body)] == col_totals
        assert sum(row_totals) == grand == 7


def test_top_renderings(bakery_cube):
    top = execute("crosstab TYPE_OF_CAKE x MARITAL_STATUS | top col", bakery_cube)
    assert render(top) == "SINGLE (6)\n"
    assert render(top, "csv") == "MEMBER,COUNT,TIE\nSINGLE,6,false\n"
    assert json.loads(render(top, "json")) == {"member": "SINGLE", "count": 6, "tie": False}
    tie = execute("crosstab TYPE_OF_CAKE x DATE | top row", bakery_cube)
    assert render(tie) == "WEDDING (3) [tie]\n"


def test_cube_rendering_lists_stored_cells(bakery_cube):
    text = render(slice(bakery_cube, "TYPE_OF_CAKE", "WEDDING"), "csv")
    assert text == "DATE,MARITAL_STATUS,COUNT\n2011-03-28,SINGLE,2\n2011-03-29,SINGLE,1\n"
    doc = json.loads(render(bakery_cube, "json"))
    assert [d["name"] for d in doc["dims"]] == ["DATE", "MARITAL_STATUS", "TYPE_OF_CAKE"]
    assert sum(n for _, n in doc["cells"]) == 7


def test_crosstab_json(bakery_cube):
    doc = json.loads(render(crosstab(bakery_cube, "TYPE_OF_CAKE", "MARITAL_STATUS"), "json"))
    assert doc["cols"] == ["SINGLE", "MARRIED", "WIDOWED"]
    assert doc["col_totals"] == [6, 1, 0] and doc["grand_total"] == 7

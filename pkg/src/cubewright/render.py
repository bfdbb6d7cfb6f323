"""Text renderings of query results: pretty tables, CSV and JSON."""

from __future__ import annotations

import enum
import json

from .cube import CrossTab, Cube, Top, cube_to_dict, member_to_json

MEASURE = "COUNT"
TOTAL = "TOTAL"


class RenderFormat(enum.Enum):
    PRETTY = "pretty"
    CSV = "csv"
    JSON = "json"


def member_text(value) -> str:
    return str(member_to_json(value))


def _crosstab_rows(ct: CrossTab) -> list[list[str]]:
    rows = [[MEASURE] + [member_text(m) for m in ct.col_dim.members] + [TOTAL]]
    for member, line, tot in zip(ct.row_dim.members, ct.counts, ct.row_totals):
        rows.append([member_text(member)] + [str(n) for n in line] + [str(tot)])
    rows.append([TOTAL] + [str(n) for n in ct.col_totals] + [str(ct.grand_total)])
    return rows


def _cube_rows(cube: Cube) -> list[list[str]]:
    rows = [list(cube.names) + [MEASURE]]
    for members, n in cube.facts():
        rows.append([member_text(m) for m in members] + [str(n)])
    return rows


def _pretty(rows: list[list[str]], label_cols: int) -> str:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = []
    for r in rows:
        cells = [c.ljust(w) if k < label_cols else c.rjust(w)
                 for k, (c, w) in enumerate(zip(r, widths))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _csv(rows: list[list[str]]) -> str:
    return "".join(",".join(r) + "\n" for r in rows)


def to_json(result) -> dict:
    if isinstance(result, CrossTab):
        return {
            "row_dim": result.row_dim.name,
            "col_dim": result.col_dim.name,
            "rows": [member_to_json(m) for m in result.row_dim.members],
            "cols": [member_to_json(m) for m in result.col_dim.members],
            "counts": [list(line) for line in result.counts],
            "row_totals": list(result.row_totals),
            "col_totals": list(result.col_totals),
            "grand_total": result.grand_total,
        }
    if isinstance(result, Top):
        return {"member": member_to_json(result.member), "count": result.count, "tie": result.tie}
    if isinstance(result, Cube):
        return cube_to_dict(result)
    raise TypeError(f"cannot render {type(result).__name__}")


def render(result, fmt: RenderFormat | str = RenderFormat.PRETTY) -> str:
    fmt = RenderFormat(fmt)
    if fmt is RenderFormat.JSON:
        return json.dumps(to_json(result), indent=2) + "\n"
    if isinstance(result, Top):
        if fmt is RenderFormat.CSV:
            return f"MEMBER,{MEASURE},TIE\n{member_text(result.member)},{result.count},{str(result.tie).lower()}\n"
        return f"{member_text(result.member)} ({result.count})" + (" [tie]" if result.tie else "") + "\n"
    if isinstance(result, CrossTab):
        rows, labels = _crosstab_rows(result), 1
    elif isinstance(result, Cube):
        rows, labels = _cube_rows(result), len(result.dims)
    else:
        raise TypeError(f"cannot render {type(result).__name__}")
    return _csv(rows) if fmt is RenderFormat.CSV else _pretty(rows, labels)

"""Aggregation kernels.

Both backends expose::

    count_codes(codes, radices) -> (keys, counts)
    remap_sum(coords, counts, maps, radices) -> (keys, sums)

``codes``/``coords`` are ``(rows, dims)`` integer arrays of member indices.
Keys are mixed-radix linearizations of the (remapped) coordinate, returned in
first-occurrence order. In ``remap_sum`` each dimension's coordinate is passed
through ``maps[dim][coord]``; a negative entry drops the row.

The compiled backend is used when it imports and ``CUBEWRIGHT_PURE`` is unset.
Keys wider than 62 bits always go through the pure backend.
"""

import os

from . import _pykernels as pure

compiled = None
if not os.environ.get("CUBEWRIGHT_PURE"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

BACKEND = "compiled" if compiled is not None else "pure"
_active = compiled or pure
_INT64_SAFE = 1 << 62


def _fits(radices) -> bool:
    span = 1
    for r in radices:
        span *= max(int(r), 1)
    return span < _INT64_SAFE


def count_codes(codes, radices):
    impl = _active if _fits(radices) else pure
    return impl.count_codes(codes, radices)


def remap_sum(coords, counts, maps, radices):
    impl = _active if _fits(radices) else pure
    return impl.remap_sum(coords, counts, maps, radices)


def unravel(keys, radices):
    """Inverse of the mixed-radix linearization, one tuple per key."""
    radices = [int(r) for r in radices]
    out = []
    for key in keys:
        coord = []
        for r in reversed(radices):
            key, c = divmod(key, r) if r else (key, 0)
            coord.append(c)
        out.append(tuple(reversed(coord)))
    return out

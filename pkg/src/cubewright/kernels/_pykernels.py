"""Pure-Python hash-aggregate, same contract as the compiled kernel."""


def _rows(a):
    return a.tolist() if hasattr(a, "tolist") else [list(r) for r in a]


def count_codes(codes, radices):
    radices = [int(r) for r in radices]
    sums = {}
    for row in _rows(codes):
        if len(row) != len(radices):
            raise ValueError("codes must be (rows, dims) matching radices")
        key = 0
        for c, r in zip(row, radices):
            key = key * r + c
        sums[key] = sums.get(key, 0) + 1
    return list(sums), list(sums.values())


def remap_sum(coords, counts, maps, radices):
    radices = [int(r) for r in radices]
    maps = _rows(maps)
    weights = counts.tolist() if hasattr(counts, "tolist") else list(counts)
    rows = _rows(coords)
    if len(rows) != len(weights) or len(maps) != len(radices):
        raise ValueError("shape mismatch between coords, counts, maps and radices")
    sums = {}
    for row, w in zip(rows, weights):
        key = 0
        for c, m, r in zip(row, maps, radices):
            c = m[c]
            if c < 0:
                break
            key = key * r + c
        else:
            sums[key] = sums.get(key, 0) + w
    return list(sums), list(sums.values())

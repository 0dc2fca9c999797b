"""Independent reference implementations used to cross-check the library.

Everything in here is deliberately written from scratch against the plain
document/row level, without touching the library's path encoding, join
machinery, or numerics, so that agreement between the two is meaningful.
"""
from __future__ import annotations

import itertools
import json
from collections import Counter


# ---------------------------------------------------------------------------
# Document flattening (tuple paths, no separator encoding)


def walk_doc(node, prefix=()):
    """Yield (path_tuple, leaf_value) pairs; empty containers are leaves."""
    if isinstance(node, dict) and node:
        for key, child in node.items():
            yield from walk_doc(child, prefix + (str(key),))
    elif isinstance(node, list) and node:
        for i, child in enumerate(node):
            yield from walk_doc(child, prefix + (str(i),))
    else:
        yield prefix, node


def jsonc(value) -> str:
    """Canonical JSON text for leaf comparison."""
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


def doc_style_pairs(doc: dict) -> frozenset:
    """(path, value) pairs of everything except the data entry."""
    trimmed = {k: v for k, v in doc.items() if k != "data"}
    return frozenset((path, jsonc(v)) for path, v in walk_doc(trimmed))


def doc_data_cells(doc: dict) -> Counter:
    """Multiset of (column, value) pairs over the inline records."""
    values = doc.get("data", {}).get("values", [])
    return Counter((k, jsonc(v)) for rec in values for k, v in rec.items())


# ---------------------------------------------------------------------------
# Weighted distance


def category_of(path: tuple) -> str:
    if path == ("mark",) or (path[0] == "mark" and path[-1] == "type"):
        return "mark"
    if path[0] == "encoding" and path[-1] == "type":
        return "type"
    if path[-1] == "field":
        return "field"
    if path[-1] == "aggregate":
        return "aggregate"
    if len(path) >= 2 and path[-2] == "scale" and path[-1] == "scheme":
        return "scale-scheme"
    return "default"


def distance_oracle(doc_a: dict, doc_b: dict, weights: dict, default: float) -> float:
    def w(cat: str) -> float:
        return weights.get(cat, default)

    pairs_a, pairs_b = doc_style_pairs(doc_a), doc_style_pairs(doc_b)
    total = sum(w(category_of(path)) for path, _ in pairs_a ^ pairs_b)
    cells_a, cells_b = doc_data_cells(doc_a), doc_data_cells(doc_b)
    differing = (cells_a - cells_b) + (cells_b - cells_a)
    total += sum(differing.values()) * w("data")
    return total


# ---------------------------------------------------------------------------
# Key joins over lists of record dicts (keys unique per side)


def row_set(rows):
    return {frozenset((k, jsonc(v)) for k, v in rec.items()) for rec in rows}


def join_parts(left_rows, right_rows, key: str):
    """(inner, left_anti, right_anti) of a 1:1 key join."""
    lmap = {rec[key]: rec for rec in left_rows}
    rmap = {rec[key]: rec for rec in right_rows}
    inner = [{**lmap[k], **rmap[k]} for k in lmap if k in rmap]
    left_anti = [lmap[k] for k in lmap if k not in rmap]
    right_anti = [rmap[k] for k in rmap if k not in lmap]
    return inner, left_anti, right_anti


def intersect_rows_oracle(left_rows, right_rows, key: str, shared: list[str]):
    rkeys = {rec[key] for rec in right_rows}
    return row_set(
        {c: rec[c] for c in shared} for rec in left_rows if rec[key] in rkeys
    )


def difference_rows_oracle(left_rows, right_rows, key: str):
    _, left_anti, right_anti = join_parts(left_rows, right_rows, key)
    out = {(f, "left") for f in row_set(left_anti)}
    out |= {(f, "right") for f in row_set(right_anti)}
    return out


# ---------------------------------------------------------------------------
# Genealogy: strict-subset DAG, transitively reduced


def genealogy_oracle(signatures: list[frozenset]) -> list[tuple[int, int]]:
    n = len(signatures)
    edges = {
        (a, b)
        for a in range(n)
        for b in range(n)
        if a != b and signatures[a] < signatures[b]
    }
    reduced = [
        (a, b)
        for a, b in edges
        if not any(
            signatures[a] < signatures[c] and signatures[c] < signatures[b]
            for c in range(n)
        )
    ]
    return sorted(reduced)


# ---------------------------------------------------------------------------
# Exhaustive shortest simple path


def shortest_path_oracle(d, src: int, dst: int):
    """Minimum (total, path) over every simple src->dst path."""
    n = len(d)
    if src == dst:
        return [src], 0.0
    others = [v for v in range(n) if v not in (src, dst)]
    best = None
    for k in range(len(others) + 1):
        for mids in itertools.permutations(others, k):
            path = (src,) + mids + (dst,)
            total = 0.0
            for a, b in zip(path, path[1:]):
                total += float(d[a][b])
            cand = (total, path)
            if best is None or cand < best:
                best = cand
    return list(best[1]), best[0]

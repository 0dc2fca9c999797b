"""Random chart-document generators for the randomized cross-checks."""
from __future__ import annotations

import json
import random

from vizalg import from_spec, parse_spec

WORDS = (
    "ash", "oak", "fig", "ivy", "elm", "sun", "moon", "rain", "fog",
    "kiwi", "plum", "pear", "mint", "sage", "rye", "teal", "rust",
)

MARKS = ("bar", "point", "line", "area", "tick", "circle", "square")


def make_rel(doc: dict):
    """Parse a plain document into the relational form, keeping every column."""
    return from_spec(parse_spec(json.dumps(doc)), keep_unencoded=True)


def _style_extras(rng: random.Random, budget: int) -> dict:
    pool = [
        ("title", rng.choice(WORDS)),
        ("width", rng.randrange(100, 800)),
        ("height", rng.randrange(100, 600)),
        ("background", rng.choice(WORDS)),
        ("description", rng.choice(WORDS) + " chart"),
    ]
    rng.shuffle(pool)
    return dict(pool[: rng.randint(0, budget)])


def random_join_docs(rng: random.Random):
    """Two documents sharing a unique string key column 'k' plus zero or
    more shared integer columns whose values agree wherever keys match,
    so the key join is 1:1 and conflict-free by construction."""
    pool = [f"k{i}" for i in range(12)]
    left_keys = rng.sample(pool, rng.randint(1, 8))
    right_keys = rng.sample(pool, rng.randint(1, 8))
    shared_quant = ["m1", "m2"][: rng.randint(0, 2)]
    left_only = ["la", "lb"][: rng.randint(0, 2)]
    right_only = ["ra", "rb"][: rng.randint(0, 2)]

    def agreed(key: str, col: str) -> int:
        return 10 * int(key[1:]) + 3 * shared_quant.index(col)

    def side_rows(keys, own_cols):
        rows = []
        for key in keys:
            rec = {"k": key}
            for col in shared_quant:
                rec[col] = agreed(key, col)
            for col in own_cols:
                rec[col] = rng.choice((rng.randrange(1000), rng.choice(WORDS)))
            rows.append(rec)
        return rows

    left_rows = side_rows(left_keys, left_only)
    right_rows = side_rows(right_keys, right_only)
    doc_a = {"data": {"values": left_rows}, "mark": rng.choice(MARKS)}
    doc_a.update(_style_extras(rng, 5))
    doc_b = {"data": {"values": right_rows}, "mark": rng.choice(MARKS)}
    doc_b.update(_style_extras(rng, 5))
    info = {
        "key": "k",
        "shared": ["k"] + shared_quant,
        "left_rows": left_rows,
        "right_rows": right_rows,
    }
    return doc_a, doc_b, info


def random_viz_doc(rng: random.Random) -> dict:
    """A small single-view document with assorted marks, encodings, and
    top-level properties. Avoids date-shaped strings and whole-valued
    floats so document-level value identity matches the library's."""
    col_pool = [
        ("q1", lambda: rng.randrange(100)),
        ("q2", lambda: rng.randrange(100) + 0.5),
        ("n1", lambda: rng.choice(WORDS)),
        ("n2", lambda: rng.choice(WORDS)),
    ]
    cols = rng.sample(col_pool, rng.randint(1, 4))
    rows = [{name: gen() for name, gen in cols} for _ in range(rng.randint(1, 5))]

    doc: dict = {"data": {"values": rows}}
    if rng.random() < 0.25:
        doc["mark"] = {"type": rng.choice(MARKS), "point": rng.random() < 0.5}
    else:
        doc["mark"] = rng.choice(MARKS)

    encoding = {}
    channels = rng.sample(("x", "y", "color", "size", "opacity"), rng.randint(0, 3))
    for channel in channels:
        name = rng.choice(cols)[0]
        node = {
            "field": name,
            "type": rng.choice(("quantitative", "nominal", "ordinal")),
        }
        if rng.random() < 0.2:
            node["aggregate"] = rng.choice(("mean", "sum", "max"))
        if rng.random() < 0.2:
            node["scale"] = {"scheme": rng.choice(("blues", "magma", "viridis"))}
        encoding[channel] = node
    if encoding:
        doc["encoding"] = encoding
    doc.update(_style_extras(rng, 3))
    if rng.random() < 0.3:
        doc["config"] = {"axis": {"grid": rng.random() < 0.5}}
    return doc

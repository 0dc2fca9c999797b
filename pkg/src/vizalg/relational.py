"""Lossless relational image of a spec: data table, style table, mapping table.

The style table holds every non-data leaf of the document as a
(property path, value) row, with nesting encoded by dash-joined key paths
and array positions as numeric segments. The data table holds the inline
records. The mapping table links style properties that name a data field
to the matching column. `to_spec(from_spec(s))` reproduces `s` exactly.
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Any, Iterable

from .errors import InconsistentRelVizError, KeyCollisionError
from .model import (
    VizSpec,
    _column_order,
    canonical_temporal,
    field_type_map,
    from_document,
)


class _MissingType:
    """Cell marker for a record that omits a column (distinct from JSON null)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False


MISSING = _MissingType()


def _json_default(value: Any) -> Any:
    if isinstance(value, (date, datetime)):
        return value.isoformat()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def canon_value(v: Any) -> tuple:
    """Hashable comparison key for a cell or style value. Booleans are kept
    apart from numbers; ints and floats of equal value compare equal."""
    if v is MISSING:
        return ("missing",)
    if v is None:
        return ("null",)
    if isinstance(v, bool):
        return ("bool", v)
    if isinstance(v, (int, float)):
        return ("num", float(v))
    if isinstance(v, str):
        return ("str", v)
    if isinstance(v, datetime):
        return ("datetime", v.isoformat())
    if isinstance(v, date):
        return ("date", v.isoformat())
    return ("json", json.dumps(v, sort_keys=True, default=_json_default))


def csv_text(v: Any) -> str:
    """Stable single-cell text form for CSV dumps."""
    if v is MISSING or v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (date, datetime)):
        return v.isoformat()
    return json.dumps(v, sort_keys=True, default=_json_default)


# ---------------------------------------------------------------------------
# Path flattening


def _escape(segment: str) -> str:
    return segment.replace("-", "--")


def join_path(segments: Iterable[str]) -> str:
    """Escape and dash-join path segments. Segments that are empty or begin
    with a dash are rejected: after joining, a leading dash cannot be told
    apart from a trailing dash on the previous segment, so such keys would
    collide with other paths."""
    parts: list[str] = []
    for s in segments:
        if s.isdigit():
            parts.append(s)
            continue
        if not s or s.startswith("-"):
            raise KeyCollisionError(
                f"key {s!r} would be ambiguous in a joined path"
            )
        parts.append(_escape(s))
    return "-".join(parts)


def split_path(path: str) -> list[str]:
    """Inverse of join_path. A run of 2k dashes is k literal dashes; a run of
    2k+1 dashes is k literal dashes followed by a segment separator."""
    segments: list[str] = []
    current: list[str] = []
    i, n = 0, len(path)
    while i < n:
        if path[i] != "-":
            current.append(path[i])
            i += 1
            continue
        j = i
        while j < n and path[j] == "-":
            j += 1
        run = j - i
        current.append("-" * (run // 2))
        if run % 2 == 1:
            segments.append("".join(current))
            current = []
        i = j
    segments.append("".join(current))
    return segments


_LEAF_SCALARS = (str, int, float, bool, type(None), date, datetime)


def flatten(tree: Any) -> list[tuple[str, Any]]:
    """Depth-first leaf enumeration of a property tree. Leaves are scalars
    plus empty containers (an empty object or array cannot be represented
    any other way without loss)."""
    pairs: list[tuple[str, Any]] = []

    def walk(node: Any, segments: tuple[str, ...]) -> None:
        if isinstance(node, dict) and node:
            for key, child in node.items():
                if not isinstance(key, str) or not key:
                    raise KeyCollisionError("object keys must be non-empty strings")
                if key.isdigit():
                    raise KeyCollisionError(
                        f"object key {key!r} is indistinguishable from an array index"
                    )
                walk(child, segments + (key,))
        elif isinstance(node, list) and node:
            for idx, child in enumerate(node):
                walk(child, segments + (str(idx),))
        else:
            if not isinstance(node, _LEAF_SCALARS) and not isinstance(node, (dict, list)):
                raise KeyCollisionError(f"unsupported leaf value: {type(node).__name__}")
            pairs.append((join_path(segments), node))

    if not isinstance(tree, dict):
        raise KeyCollisionError("only object trees can be flattened")
    walk(tree, ())
    return pairs


class _Node:
    __slots__ = ("children", "value", "has_value")

    def __init__(self) -> None:
        self.children: dict[str, _Node] = {}
        self.value: Any = None
        self.has_value = False


def unflatten(pairs: Iterable[tuple[str, Any]]) -> dict:
    """Rebuild the nested tree from (path, value) rows. Raises
    InconsistentRelVizError on structural contradictions (a value sitting on
    top of a subtree, mixed array/object children, duplicate paths)."""
    root = _Node()
    for path, value in pairs:
        node = root
        for seg in split_path(path):
            if seg == "":
                raise InconsistentRelVizError(f"empty segment in path {path!r}")
            node = node.children.setdefault(seg, _Node())
        if node.has_value:
            raise InconsistentRelVizError(f"duplicate property path {path!r}")
        node.value = value
        node.has_value = True

    def build(node: _Node, at: str) -> Any:
        if node.has_value and node.children:
            raise InconsistentRelVizError(
                f"property {at!r} holds both a value and nested properties"
            )
        if node.has_value:
            return node.value
        digit = [s for s in node.children if s.isdigit()]
        if digit and len(digit) != len(node.children):
            raise InconsistentRelVizError(
                f"property {at!r} mixes array indices and object keys"
            )
        if digit:
            indices = sorted(node.children, key=int)
            if len({int(s) for s in indices}) != len(indices):
                raise InconsistentRelVizError(f"duplicate array index under {at!r}")
            return [build(node.children[s], f"{at}-{s}") for s in indices]
        return {s: build(child, f"{at}-{s}" if at else s) for s, child in node.children.items()}

    if root.has_value:
        raise InconsistentRelVizError("a root value cannot be unflattened")
    return build(root, "")


# ---------------------------------------------------------------------------
# Field-reference detection

_REF_TAILS = ("groupby", "fold")


def is_field_ref(path: str) -> bool:
    """True when a style leaf at this path names a data field: any `field`
    key, or an element of a `groupby`/`fold` list."""
    segs = split_path(path)
    if segs[-1] == "field":
        return True
    return len(segs) >= 2 and segs[-1].isdigit() and segs[-2] in _REF_TAILS


def is_derived_name(path: str) -> bool:
    """True when a style leaf at this path declares a computed column name
    (`as` on calculate/window/aggregate/fold transforms)."""
    segs = split_path(path)
    if segs[-1] == "as":
        return True
    return len(segs) >= 2 and segs[-1].isdigit() and segs[-2] == "as"


# ---------------------------------------------------------------------------
# Tables


@dataclass(frozen=True)
class Column:
    name: str
    ctype: str


@dataclass(frozen=True)
class DataTable:
    columns: tuple[Column, ...] = ()
    rows: tuple[tuple, ...] = ()
    provenance: str | None = None

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise InconsistentRelVizError("data table column names must be unique")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise InconsistentRelVizError(
                    f"row arity {len(row)} != column count {len(self.columns)}"
                )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    def ctype(self, name: str) -> str:
        return self.columns[self.index(name)].ctype

    @property
    def is_empty(self) -> bool:
        return not self.columns

    def cells(self) -> Iterable[tuple[str, Any]]:
        """(column name, value) for every non-missing cell."""
        for row in self.rows:
            for col, v in zip(self.columns, row):
                if v is not MISSING:
                    yield col.name, v


@dataclass(frozen=True)
class StyleRow:
    path: str
    value: Any


@dataclass(frozen=True)
class StyleTable:
    rows: tuple[StyleRow, ...] = ()

    def __post_init__(self) -> None:
        paths = [r.path for r in self.rows]
        if len(set(paths)) != len(paths):
            raise InconsistentRelVizError("duplicate property paths in style table")

    def paths(self) -> tuple[str, ...]:
        return tuple(r.path for r in self.rows)

    def lookup(self, path: str, default: Any = None) -> Any:
        for r in self.rows:
            if r.path == path:
                return r.value
        return default

    def has(self, path: str) -> bool:
        return any(r.path == path for r in self.rows)

    def as_pairs(self) -> list[tuple[str, Any]]:
        return [(r.path, r.value) for r in self.rows]


@dataclass(frozen=True)
class Link:
    path: str
    column: str


@dataclass(frozen=True)
class MappingTable:
    links: tuple[Link, ...] = ()


@dataclass(frozen=True)
class DataMeta:
    """How to rebuild the document's data block.

    present/inline truth table: absent block (False, False); inline records
    (True, True) with `extra` holding the sibling keys of `values`; opaque
    block such as a URL reference (True, False) with `extra` holding the
    verbatim node.
    """

    present: bool = False
    inline: bool = False
    extra: Any = None


@dataclass(frozen=True)
class RelViz:
    data: DataTable = field(default_factory=DataTable)
    style: StyleTable = field(default_factory=StyleTable)
    mapping: MappingTable = field(default_factory=MappingTable)
    meta: DataMeta = field(default_factory=DataMeta)
    notes: tuple[str, ...] = ()

    def validate(self) -> None:
        paths = set(self.style.paths())
        names = set(self.data.names)
        for link in self.mapping.links:
            if link.path not in paths:
                raise InconsistentRelVizError(
                    f"mapping link names unknown property {link.path!r}"
                )
            if link.column not in names:
                raise InconsistentRelVizError(
                    f"mapping link {link.path!r} names unknown column {link.column!r}"
                )


def build_links(style: StyleTable, columns: Iterable[str]) -> tuple[Link, ...]:
    """Links for every field-referencing style leaf whose value is one of the
    given column names."""
    colset = set(columns)
    out = []
    for row in style.rows:
        if isinstance(row.value, str) and row.value in colset and is_field_ref(row.path):
            out.append(Link(row.path, row.value))
    return tuple(out)


def referenced_fields(style: StyleTable) -> list[str]:
    """Field names referenced by style leaves, in row order, deduplicated."""
    seen: dict[str, None] = {}
    for row in style.rows:
        if isinstance(row.value, str) and is_field_ref(row.path):
            seen.setdefault(row.value)
    return list(seen)


def derived_names(style: StyleTable) -> set[str]:
    out = set()
    for row in style.rows:
        if isinstance(row.value, str) and is_derived_name(row.path):
            out.add(row.value)
    return out


def _upgrade_cell(v: Any) -> Any:
    if isinstance(v, str):
        parsed = canonical_temporal(v)
        if parsed is not None:
            return parsed
    return v


def from_spec(spec: VizSpec, keep_unencoded: bool = False) -> RelViz:
    """Convert a spec to its relational image.

    Unless keep_unencoded is set, data columns that no style property
    references are dropped (they carry no visual role). ISO date and
    datetime cells are upgraded to real datetime values; everything else is
    stored verbatim.
    """
    doc = spec.to_document()
    style_pairs = flatten({k: v for k, v in doc.items() if k != "data"})
    style = StyleTable(tuple(StyleRow(p, v) for p, v in style_pairs))

    notes: list[str] = []
    if spec.data.is_inline:
        records = spec.data.values
        types = field_type_map(spec)
        names = _column_order(records)
        if not keep_unencoded:
            wanted = set(referenced_fields(style))
            dropped = [n for n in names if n not in wanted]
            names = [n for n in names if n in wanted]
            if dropped:
                notes.append("dropped unencoded columns: " + ", ".join(dropped))
        columns = tuple(Column(n, types[n]) for n in names)
        rows = tuple(
            tuple(_upgrade_cell(rec[n]) if n in rec else MISSING for n in names)
            for rec in records
        )
        data = DataTable(columns, rows)
        meta = DataMeta(True, True, dict(spec.data.extra))
    else:
        data = DataTable()
        meta = DataMeta(spec.data.present, False, spec.data.node if spec.data.present else None)
        if spec.data.present:
            notes.append("data block is not inline flat records; data table left empty")

    mapping = MappingTable(build_links(style, data.names))
    return RelViz(data, style, mapping, meta, tuple(notes))


def _plain_cell(v: Any) -> Any:
    if isinstance(v, (date, datetime)):
        return v.isoformat()
    return v


def to_spec(rel: RelViz) -> VizSpec:
    """Rebuild the spec from its relational image (inverse of from_spec)."""
    rel.validate()
    doc = unflatten(rel.style.as_pairs())
    data_node = None
    if rel.meta.inline or not rel.data.is_empty or rel.data.rows:
        values = []
        for row in rel.data.rows:
            rec = {}
            for col, v in zip(rel.data.columns, row):
                if v is not MISSING:
                    rec[col.name] = _plain_cell(v)
            values.append(rec)
        data_node = {"values": values}
        if rel.meta.inline and isinstance(rel.meta.extra, dict):
            data_node.update(rel.meta.extra)
    elif rel.meta.present:
        data_node = rel.meta.extra
    if data_node is not None or rel.meta.present:
        doc = {"data": data_node, **doc}
    return from_document(doc)


def infer_primary_key(table: DataTable) -> tuple[str, ...] | None:
    """Smallest combination of non-quantitative columns whose values are
    unique across rows. Subsets are tried smallest first, ties broken by
    column order; the search is capped at 4 columns with a final fallback to
    all candidates. None when no unique combination exists."""
    if not table.rows:
        return None
    cands = [c.name for c in table.columns if c.ctype != "quantitative"]
    if not cands:
        return None
    idx = {c.name: i for i, c in enumerate(table.columns)}

    def unique(names: tuple[str, ...]) -> bool:
        seen = set()
        for row in table.rows:
            key = tuple(canon_value(row[idx[n]]) for n in names)
            if key in seen:
                return False
            seen.add(key)
        return True

    for size in range(1, min(4, len(cands)) + 1):
        for combo in itertools.combinations(cands, size):
            if unique(combo):
                return combo
    if len(cands) > 4 and unique(tuple(cands)):
        return tuple(cands)
    return None


def write_tables(rel: RelViz, directory) -> None:
    """Debug dump of the three tables as data.csv, style.csv, mapping.csv."""
    import pathlib

    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "data.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rel.data.names)
        for row in rel.data.rows:
            w.writerow([csv_text(v) for v in row])
    with open(directory / "style.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["property", "value"])
        for srow in rel.style.rows:
            w.writerow([srow.path, csv_text(srow.value)])
    with open(directory / "mapping.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["property", "column"])
        for link in rel.mapping.links:
            w.writerow([link.path, link.column])

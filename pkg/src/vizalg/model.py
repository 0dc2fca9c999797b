"""Typed tree model for a single-view subset of the Vega-Lite grammar.

A document is split into four parts: the data block, the transform list,
the mark descriptor and the encoding map. Everything else stays verbatim
in ``other``. Parsing never drops a property; serialization reassembles
the exact same tree (object key order is not significant, array order is).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Any, Iterator

from .errors import NoInlineDataError, SpecSyntaxError, UnsupportedSpecError

COMPOSITION_KEYS = ("layer", "hconcat", "vconcat", "concat", "facet", "repeat", "spec")

FIELD_TYPES = ("quantitative", "nominal", "ordinal", "temporal")

_SCALARS = (str, int, float, bool, type(None))

_DATEISH = re.compile(r"^\d{4}[-/]\d{1,2}[-/]\d{1,2}([ T].*)?$")


@dataclass(frozen=True)
class EncodingDef:
    """One channel of the encoding map, kept as the verbatim channel node."""

    channel: str
    node: Any

    def __post_init__(self) -> None:
        if not self.channel:
            raise SpecSyntaxError("encoding channel name must be non-empty")

    @property
    def field(self) -> str | None:
        if isinstance(self.node, dict):
            v = self.node.get("field")
            return v if isinstance(v, str) else None
        return None

    @property
    def field_type(self) -> str | None:
        if isinstance(self.node, dict):
            v = self.node.get("type")
            return v if isinstance(v, str) else None
        return None

    @property
    def extras(self) -> dict:
        if isinstance(self.node, dict):
            return {k: v for k, v in self.node.items() if k not in ("field", "type")}
        return {}


@dataclass(frozen=True)
class DataNode:
    """The raw `data` block: may be absent, inline values, or opaque (URL, named source)."""

    present: bool
    node: Any = None

    @property
    def is_inline(self) -> bool:
        """True when the block carries a plain list of flat records."""
        if not (self.present and isinstance(self.node, dict)):
            return False
        values = self.node.get("values")
        if not isinstance(values, list):
            return False
        for rec in values:
            if not isinstance(rec, dict):
                return False
            if any(not isinstance(v, _SCALARS) for v in rec.values()):
                return False
        return True

    @property
    def values(self) -> list[dict]:
        if not self.is_inline:
            raise NoInlineDataError("spec has no inline data values")
        return self.node["values"]

    @property
    def extra(self) -> dict:
        """Sibling keys of `values` (format, name, ...) for inline data."""
        if self.present and isinstance(self.node, dict):
            return {k: v for k, v in self.node.items() if k != "values"}
        return {}


@dataclass(frozen=True)
class VizSpec:
    data: DataNode = field(default_factory=lambda: DataNode(False))
    transform: Any = None
    mark: Any = None
    encoding: tuple[EncodingDef, ...] = ()
    other: dict = field(default_factory=dict)
    field_types: tuple[tuple[str, str], ...] = ()

    def to_document(self) -> dict:
        """Rebuild the plain document tree. `field_types` is derived metadata
        and is not part of the document."""
        doc: dict = {}
        if self.data.present:
            doc["data"] = self.data.node
        if self.transform is not None:
            doc["transform"] = self.transform
        if self.mark is not None:
            doc["mark"] = self.mark
        if self.encoding:
            doc["encoding"] = {e.channel: e.node for e in self.encoding}
        doc.update(self.other)
        return doc

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VizSpec):
            return NotImplemented
        return self.to_document() == other.to_document()

    def __hash__(self) -> int:
        return object.__hash__(self)

    def encoded_channels(self) -> tuple[str, ...]:
        return tuple(e.channel for e in self.encoding)

    def get_encoding(self, channel: str) -> EncodingDef | None:
        for e in self.encoding:
            if e.channel == channel:
                return e
        return None

    def declared_types(self) -> dict[str, str]:
        """field name -> type for every encoding that declares both."""
        out: dict[str, str] = {}
        for e in self.encoding:
            if e.field and e.field_type in FIELD_TYPES and e.field not in out:
                out[e.field] = e.field_type
        return out


def from_document(doc: Any) -> VizSpec:
    if not isinstance(doc, dict):
        raise SpecSyntaxError("specification document must be a JSON object")
    for key in COMPOSITION_KEYS:
        if key in doc:
            raise UnsupportedSpecError(
                f"multi-view composition operator {key!r} is not supported"
            )
    data = DataNode("data" in doc, doc.get("data"))
    encoding_node = doc.get("encoding")
    encodings: tuple[EncodingDef, ...] = ()
    if encoding_node is not None:
        if not isinstance(encoding_node, dict):
            raise SpecSyntaxError("encoding must be an object")
        encodings = tuple(EncodingDef(ch, node) for ch, node in encoding_node.items())
    other = {
        k: v
        for k, v in doc.items()
        if k not in ("data", "transform", "mark", "encoding")
    }
    return VizSpec(
        data=data,
        transform=doc.get("transform"),
        mark=doc.get("mark"),
        encoding=encodings,
        other=other,
    )


def parse_spec(document: str) -> VizSpec:
    """Parse one specification document from JSON text."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"malformed document: {exc}") from exc
    return from_document(doc)


def _json_default(value: Any) -> Any:
    if isinstance(value, (date, datetime)):
        return value.isoformat()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def serialize_spec(spec: VizSpec, *, indent: int = 2, sort_keys: bool = False) -> str:
    return json.dumps(
        spec.to_document(),
        indent=indent,
        sort_keys=sort_keys,
        ensure_ascii=False,
        default=_json_default,
    )


def is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_temporal(text: str) -> date | datetime | None:
    """Parse date-like text. Accepts ISO-8601 plus slash-separated dates and
    a trailing Z offset; returns None when the text is not a parseable date."""
    if not isinstance(text, str) or not _DATEISH.match(text):
        return None
    candidate = text.replace("/", "-")
    if candidate.endswith("Z"):
        candidate = candidate[:-1] + "+00:00"
    try:
        return date.fromisoformat(candidate)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(candidate)
    except ValueError:
        return None


def canonical_temporal(text: str) -> date | datetime | None:
    """Like parse_temporal, but only for values whose ISO form reproduces the
    input exactly. Those round-trip losslessly and may be stored as datetime
    cells; anything else must stay text."""
    parsed = parse_temporal(text)
    if parsed is not None and parsed.isoformat() == text:
        return parsed
    return None


def _column_order(records: list[dict]) -> list[str]:
    seen: dict[str, None] = {}
    for rec in records:
        for key in rec:
            seen.setdefault(key)
    return list(seen)


def infer_column_type(cells: Iterator[Any]) -> str:
    """Majority-vote a column type: quantitative or temporal when at least
    95% of non-null cells agree, nominal otherwise."""
    total = 0
    numeric = 0
    temporal = 0
    for cell in cells:
        if cell is None:
            continue
        total += 1
        if is_number(cell):
            numeric += 1
        elif isinstance(cell, (date, datetime)) or (
            isinstance(cell, str) and parse_temporal(cell) is not None
        ):
            temporal += 1
    if total == 0:
        return "nominal"
    if numeric / total >= 0.95:
        return "quantitative"
    if temporal / total >= 0.95:
        return "temporal"
    return "nominal"


def field_type_map(spec: VizSpec) -> dict[str, str]:
    """Assign a type to every inline data field. Declared encoding types win;
    the rest are inferred from the cells."""
    if not spec.data.is_inline:
        raise NoInlineDataError("type inference needs inline data values")
    records = spec.data.values
    declared = spec.declared_types()
    out: dict[str, str] = {}
    for name in _column_order(records):
        if name in declared:
            out[name] = declared[name]
        else:
            out[name] = infer_column_type(rec.get(name) for rec in records)
    return out


def infer_field_types(spec: VizSpec) -> VizSpec:
    """Return a copy of the spec with `field_types` filled in. Idempotent."""
    types = field_type_map(spec)
    return VizSpec(
        data=spec.data,
        transform=spec.transform,
        mark=spec.mark,
        encoding=spec.encoding,
        other=spec.other,
        field_types=tuple(types.items()),
    )

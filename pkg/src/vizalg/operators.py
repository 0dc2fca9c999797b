"""Binary operators over relational images: union, intersection, difference.

The data side of union is a full outer join on the shared columns (all of
them, or an inferred primary key). The style side is a property-path keyed
union. Intersection and difference are the matching inner and anti joins,
returning rows tagged with a left/right/both indicator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable

from .errors import (
    DisjointColumnsError,
    NoKeyError,
    UnrepairableLinkError,
    VizAlgError,
)
from .relational import (
    MISSING,
    Column,
    DataMeta,
    DataTable,
    Link,
    MappingTable,
    RelViz,
    StyleRow,
    StyleTable,
    build_links,
    canon_value,
    derived_names,
    is_field_ref,
    join_path,
    split_path,
)

INDICATOR = "_source"
IDLE_CHANNELS = ("color", "opacity", "column", "row")

FIELD_TYPE_TOKENS = ("quantitative", "nominal", "ordinal", "temporal")


@dataclass(frozen=True)
class OpParams:
    on: str = "key"
    how: str = "merge"
    auto_encoding: bool = True

    def __post_init__(self) -> None:
        if self.on not in ("key", "all"):
            raise VizAlgError(f"on must be 'key' or 'all', got {self.on!r}")
        if self.how not in ("left", "right", "merge"):
            raise VizAlgError(f"how must be 'left', 'right' or 'merge', got {self.how!r}")


@dataclass(frozen=True)
class MarkedTable:
    """A plain relation plus a per-row provenance tag."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    indicator: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.indicator):
            raise VizAlgError("indicator length must match row count")

    def __len__(self) -> int:
        return len(self.rows)

    def tagged(self) -> Iterable[tuple[tuple, str]]:
        return zip(self.rows, self.indicator)


@dataclass(frozen=True)
class UnionResult:
    merged: RelViz
    report: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Join column selection


def shared_key(left: DataTable, right: DataTable) -> tuple[str, ...] | None:
    """Smallest combination of shared non-quantitative columns whose values
    are unique in both tables; subsets tried smallest first, ties broken by
    left column order, capped at 4 with a fallback to all candidates."""
    rnames = set(right.names)
    cands = [
        n
        for n in left.names
        if n in rnames
        and left.ctype(n) != "quantitative"
        and right.ctype(n) != "quantitative"
    ]
    if not cands or not left.rows or not right.rows:
        return None

    def unique_in(table: DataTable, names: tuple[str, ...]) -> bool:
        idxs = [table.index(n) for n in names]
        seen = set()
        for row in table.rows:
            key = tuple(canon_value(row[i]) for i in idxs)
            if key in seen:
                return False
            seen.add(key)
        return True

    def ok(names: tuple[str, ...]) -> bool:
        return unique_in(left, names) and unique_in(right, names)

    for size in range(1, min(4, len(cands)) + 1):
        for combo in itertools.combinations(cands, size):
            if ok(combo):
                return combo
    if len(cands) > 4 and ok(tuple(cands)):
        return tuple(cands)
    return None


def _key_of(row: tuple, idxs: list[int]) -> tuple:
    return tuple(canon_value(row[i]) for i in idxs)


def _null_key(row: tuple, idxs: list[int]) -> bool:
    # null never equals anything, so a row with a null join cell matches nothing
    return any(row[i] is None or row[i] is MISSING for i in idxs)


def _shared_names(left: DataTable, right: DataTable) -> list[str]:
    rnames = set(right.names)
    return [n for n in left.names if n in rnames]


def _join_columns(left: DataTable, right: DataTable, on: str) -> tuple[str, ...]:
    shared = _shared_names(left, right)
    if on == "key":
        key = shared_key(left, right)
        if key is not None:
            return key
    return tuple(shared)


# ---------------------------------------------------------------------------
# Intersection / difference


def intersect(
    left: RelViz, right: RelViz, params: OpParams = OpParams()
) -> tuple[MarkedTable, MarkedTable]:
    """Inner join on both parts. The data side keeps the shared-column
    projection of left rows whose join key occurs on the right; the style
    side keeps property paths present in both (with equal values when
    on=all). Result rows are tagged 'both'."""
    data = _intersect_data(left.data, right.data, params.on)
    style = _intersect_style(left.style, right.style, params.on)
    return data, style


def _intersect_data(left: DataTable, right: DataTable, on: str) -> MarkedTable:
    shared = _shared_names(left, right)
    if not shared:
        return MarkedTable((), (), ())
    key = _join_columns(left, right, on)
    kl = [left.index(n) for n in key]
    kr = [right.index(n) for n in key]
    right_keys = {_key_of(r, kr) for r in right.rows if not _null_key(r, kr)}
    pidx = [left.index(n) for n in shared]
    rows: list[tuple] = []
    seen: set[tuple] = set()
    for row in left.rows:
        if _null_key(row, kl) or _key_of(row, kl) not in right_keys:
            continue
        proj = tuple(row[i] for i in pidx)
        ck = tuple(canon_value(v) for v in proj)
        if ck not in seen:
            seen.add(ck)
            rows.append(proj)
    return MarkedTable(tuple(shared), tuple(rows), ("both",) * len(rows))


def _intersect_style(left: StyleTable, right: StyleTable, on: str) -> MarkedTable:
    rmap = {r.path: canon_value(r.value) for r in right.rows}
    rows = []
    for r in left.rows:
        if r.path not in rmap:
            continue
        if on == "all" and canon_value(r.value) != rmap[r.path]:
            continue
        rows.append((r.path, r.value))
    return MarkedTable(("property", "value"), tuple(rows), ("both",) * len(rows))


def difference(
    left: RelViz, right: RelViz, params: OpParams = OpParams()
) -> tuple[MarkedTable, MarkedTable]:
    """Left and right anti joins. Data rows that fail to match across the
    join columns are tagged with their side; style rows are compared as
    (path, value) pairs when on=all and by path when on=key. A path present
    on both sides with different values shows up twice, once per side."""
    data = _difference_data(left.data, right.data, params.on)
    style = _difference_style(left.style, right.style, params.on)
    return data, style


def _difference_data(left: DataTable, right: DataTable, on: str) -> MarkedTable:
    lnames = set(left.names)
    out_names = list(left.names) + [n for n in right.names if n not in lnames]
    shared = _shared_names(left, right)
    key = _join_columns(left, right, on) if shared else ()
    rows: list[tuple] = []
    tags: list[str] = []
    seen: set[tuple] = set()

    def emit(table: DataTable, row: tuple, tag: str) -> None:
        have = dict(zip(table.names, row))
        expanded = tuple(have.get(n, MISSING) for n in out_names)
        ck = (tuple(canon_value(v) for v in expanded), tag)
        if ck not in seen:
            seen.add(ck)
            rows.append(expanded)
            tags.append(tag)

    if key:
        kl = [left.index(n) for n in key]
        kr = [right.index(n) for n in key]
        left_keys = {_key_of(r, kl) for r in left.rows if not _null_key(r, kl)}
        right_keys = {_key_of(r, kr) for r in right.rows if not _null_key(r, kr)}
        for row in left.rows:
            if _null_key(row, kl) or _key_of(row, kl) not in right_keys:
                emit(left, row, "left")
        for row in right.rows:
            if _null_key(row, kr) or _key_of(row, kr) not in left_keys:
                emit(right, row, "right")
    else:
        for row in left.rows:
            emit(left, row, "left")
        for row in right.rows:
            emit(right, row, "right")
    return MarkedTable(tuple(out_names), tuple(rows), tuple(tags))


def _difference_style(left: StyleTable, right: StyleTable, on: str) -> MarkedTable:
    lmap = {r.path: canon_value(r.value) for r in left.rows}
    rmap = {r.path: canon_value(r.value) for r in right.rows}
    rows = []
    tags = []
    for r in left.rows:
        if r.path not in rmap or (on == "all" and canon_value(r.value) != rmap[r.path]):
            rows.append((r.path, r.value))
            tags.append("left")
    for r in right.rows:
        if r.path not in lmap or (on == "all" and canon_value(r.value) != lmap[r.path]):
            rows.append((r.path, r.value))
            tags.append("right")
    return MarkedTable(("property", "value"), tuple(rows), tuple(tags))


# ---------------------------------------------------------------------------
# Union


def union(
    left: RelViz,
    right: RelViz,
    params: OpParams = OpParams(),
    donor: DataTable | None = None,
) -> UnionResult:
    """Full outer join of two relational images.

    Preliminary checks reject joins of data tables with disjoint columns and
    key joins with no inferable shared key. Conflicting records (same join
    key, different values) are resolved per `how`: left or right picks one
    side, merge keeps both rows and appends an indicator column. Style rows
    merge per property path with the same policy. Broken mapping links are
    repaired afterwards, and with auto_encoding the indicator column is
    assigned to the first idle channel of color, opacity, column, row.

    `donor` optionally supplies column types for repairing references to
    fields neither input table carries (e.g. a style source whose data was
    stripped).
    """
    report: list[str] = []
    style = _union_style(left.style, right.style, params.how, report)
    data, meta, indicator_name = _union_data(left, right, params, report)
    merged = RelViz(data, style, MappingTable(), meta, ())
    merged = _rebuild_mapping(merged, (right.data, left.data, donor), report)
    if indicator_name is not None and params.auto_encoding:
        merged = assign_indicator_channel(merged, indicator_name)
        report.extend(merged.notes)
    return UnionResult(merged, tuple(report))


def _union_style(
    left: StyleTable, right: StyleTable, how: str, report: list[str]
) -> StyleTable:
    lmap = {r.path: r for r in left.rows}
    rmap = {r.path: r for r in right.rows}

    def proper_prefixes(path: str) -> list[str]:
        segs = split_path(path)
        return [join_path(segs[:i]) for i in range(1, len(segs))]

    # A leaf on one side sitting above a subtree on the other cannot both
    # survive; `how` picks the side to keep (merge keeps left).
    drop_left: set[str] = set()
    drop_right: set[str] = set()
    for path in rmap:
        for prefix in proper_prefixes(path):
            if prefix in lmap:
                if how == "right":
                    drop_left.add(prefix)
                else:
                    drop_right.add(path)
                report.append(
                    f"structural conflict: property {prefix!r} vs nested {path!r}"
                )
    for path in lmap:
        for prefix in proper_prefixes(path):
            if prefix in rmap:
                if how == "right":
                    drop_left.add(path)
                else:
                    drop_right.add(prefix)
                report.append(
                    f"structural conflict: nested {path!r} vs property {prefix!r}"
                )

    rows: list[StyleRow] = []
    for r in left.rows:
        if r.path in drop_left:
            continue
        other = rmap.get(r.path)
        if other is not None and r.path not in drop_right:
            if canon_value(other.value) != canon_value(r.value):
                if how == "right":
                    rows.append(StyleRow(r.path, other.value))
                else:
                    rows.append(r)
                    if how == "merge":
                        report.append(
                            f"style conflict at {r.path!r}: kept left value"
                        )
                continue
        rows.append(r)
    lpaths = set(lmap)
    for r in right.rows:
        if r.path in drop_right or r.path in lpaths:
            continue
        rows.append(r)
    return StyleTable(tuple(rows))


def _resolve_cell(lv: Any, rv: Any) -> tuple[Any, bool]:
    """Merge two cell values; a conflict is two non-null unequal values."""
    if lv is MISSING:
        return rv, False
    if rv is MISSING:
        return lv, False
    if lv is None:
        return rv, False
    if rv is None:
        return lv, False
    if canon_value(lv) == canon_value(rv):
        return lv, False
    return None, True


def _union_data(
    left: RelViz, right: RelViz, params: OpParams, report: list[str]
) -> tuple[DataTable, DataMeta, str | None]:
    ld, rd = left.data, right.data
    if ld.is_empty and rd.is_empty:
        rows = ld.rows if ld.rows else rd.rows
        meta = left.meta if left.meta.present else right.meta
        return DataTable((), rows, "merged"), meta, None
    if ld.is_empty or rd.is_empty:
        src, srel = (rd, right) if ld.is_empty else (ld, left)
        meta = srel.meta if srel.meta.present else DataMeta(True, True, {})
        return DataTable(src.columns, src.rows, "merged"), meta, None

    shared = _shared_names(ld, rd)
    if not shared:
        raise DisjointColumnsError(
            "data tables share no column; union of their records is undefined"
        )
    if params.on == "key":
        key = shared_key(ld, rd)
        if key is None:
            raise NoKeyError(
                "no shared primary key of non-quantitative columns is inferable"
            )
    else:
        key = tuple(shared)

    lnames = set(ld.names)
    out_names = list(ld.names) + [n for n in rd.names if n not in lnames]
    type_of = {c.name: c.ctype for c in rd.columns}
    type_of.update({c.name: c.ctype for c in ld.columns})

    kl = [ld.index(n) for n in key]
    kr = [rd.index(n) for n in key]
    rindex: dict[tuple, list[int]] = {}
    for j, row in enumerate(rd.rows):
        if not _null_key(row, kr):
            rindex.setdefault(_key_of(row, kr), []).append(j)

    def expand(table: DataTable, row: tuple) -> tuple:
        have = dict(zip(table.names, row))
        return tuple(have.get(n, MISSING) for n in out_names)

    rows: list[tuple] = []
    tags: list[str] = []
    matched_right: set[int] = set()
    conflict_keys = 0
    for row in ld.rows:
        if _null_key(row, kl):
            rows.append(expand(ld, row))
            tags.append("left")
            continue
        hits = rindex.get(_key_of(row, kl), [])
        if not hits:
            rows.append(expand(ld, row))
            tags.append("left")
            continue
        for j in hits:
            matched_right.add(j)
            lrow = expand(ld, row)
            rrow = expand(rd, rd.rows[j])
            merged = []
            conflicts = []
            for name, lv, rv in zip(out_names, lrow, rrow):
                value, clash = _resolve_cell(lv, rv)
                if clash:
                    conflicts.append(name)
                    value = lv if params.how != "right" else rv
                merged.append(value)
            if not conflicts:
                rows.append(tuple(merged))
                tags.append("both")
                continue
            conflict_keys += 1
            if params.how == "merge":
                rows.append(lrow)
                tags.append("left")
                rows.append(rrow)
                tags.append("right")
            else:
                rows.append(tuple(merged))
                tags.append("both")
    for j, row in enumerate(rd.rows):
        if j not in matched_right:
            rows.append(expand(rd, row))
            tags.append("right")
    if conflict_keys:
        report.append(
            f"{conflict_keys} conflicting record(s) on key {', '.join(key)} "
            f"resolved with how={params.how}"
        )

    deduped: list[tuple] = []
    dtags: list[str] = []
    seen: set[tuple] = set()
    for row, tag in zip(rows, tags):
        ck = (tuple(canon_value(v) for v in row), tag)
        if ck not in seen:
            seen.add(ck)
            deduped.append(row)
            dtags.append(tag)

    indicator_name = None
    columns = [Column(n, type_of[n]) for n in out_names]
    if params.how == "merge" and any(t != "both" for t in dtags):
        indicator_name = INDICATOR
        existing = set(out_names)
        while indicator_name in existing:
            indicator_name += "_2"
        columns.append(Column(indicator_name, "nominal"))
        deduped = [row + (tag,) for row, tag in zip(deduped, dtags)]
        report.append(f"indicator column {indicator_name} appended")
    return (
        DataTable(tuple(columns), tuple(deduped), "merged"),
        DataMeta(True, True, {}),
        indicator_name,
    )


# ---------------------------------------------------------------------------
# Link repair


def _origin_type(
    style: StyleTable, path: str, origin: str, donors: tuple[DataTable | None, ...]
) -> str | None:
    segs = split_path(path)
    if segs[-1] == "field":
        sibling = join_path(segs[:-1] + ["type"])
        declared = style.lookup(sibling)
        if isinstance(declared, str) and declared in FIELD_TYPE_TOKENS:
            return declared
    for table in donors:
        if table is not None and origin in table.names:
            return table.ctype(origin)
    return None


def _rebuild_mapping(
    rel: RelViz, donors: tuple[DataTable | None, ...], report: list[str]
) -> RelViz:
    """Recreate links from the style rows; retarget references to columns
    the merged table does not carry. Skipped entirely when the table has no
    columns (nothing to link against)."""
    if rel.data.is_empty:
        return RelViz(rel.data, rel.style, MappingTable(), rel.meta, rel.notes)
    names = set(rel.data.names)
    derived = derived_names(rel.style)
    broken: list[tuple[str, str]] = []
    for row in rel.style.rows:
        if not (isinstance(row.value, str) and is_field_ref(row.path)):
            continue
        if row.value in names or row.value in derived:
            continue
        broken.append((row.path, row.value))
    style = rel.style
    if broken:
        style = _repair(style, rel.data, broken, donors, report)
    links = build_links(style, rel.data.names)
    return RelViz(rel.data, style, MappingTable(links), rel.meta, rel.notes)


def _repair(
    style: StyleTable,
    data: DataTable,
    broken: list[tuple[str, str]],
    donors: tuple[DataTable | None, ...],
    report: list[str],
) -> StyleTable:
    used = {
        row.value
        for row in style.rows
        if isinstance(row.value, str) and is_field_ref(row.path) and row.value in set(data.names)
    }
    replacement: dict[str, Any] = {}
    memo: dict[str, str] = {}  # same origin name always repairs to the same column
    for path, origin in broken:
        pick = memo.get(origin)
        if pick is None:
            want = _origin_type(style, path, origin, donors)
            same_type = [c.name for c in data.columns if want is None or c.ctype == want]
            for name in same_type:
                if name not in used:
                    pick = name
                    break
            if pick is None and same_type:
                pick = same_type[0]
            if pick is None:
                for c in data.columns:
                    if c.name not in used:
                        pick = c.name
                        break
            if pick is None:
                pick = data.columns[0].name
            used.add(pick)
            memo[origin] = pick
        replacement[path] = pick
        report.append(f"repaired link {path!r}: {origin!r} -> {pick!r}")
    rows = tuple(
        StyleRow(r.path, replacement[r.path]) if r.path in replacement else r
        for r in style.rows
    )
    return StyleTable(rows)


def repair_links(merged: RelViz, donor: DataTable | None = None) -> RelViz:
    """Retarget mapping links that name absent columns to existing ones,
    preferring a column of the origin's type (declared by a sibling type
    property or looked up in the donor table)."""
    broken = []
    derived = derived_names(merged.style)
    names = set(merged.data.names)
    for row in merged.style.rows:
        if (
            isinstance(row.value, str)
            and is_field_ref(row.path)
            and row.value not in names
            and row.value not in derived
        ):
            broken.append((row.path, row.value))
    if not broken:
        return merged
    if merged.data.is_empty:
        raise UnrepairableLinkError(
            "cannot repair mapping links: the data table has no columns"
        )
    report: list[str] = []
    style = _repair(merged.style, merged.data, broken, (donor,), report)
    links = build_links(style, merged.data.names)
    return RelViz(
        merged.data, style, MappingTable(links), merged.meta, merged.notes + tuple(report)
    )


# ---------------------------------------------------------------------------
# Indicator channel assignment


def assign_indicator_channel(rel: RelViz, indicator: str = INDICATOR) -> RelViz:
    """Encode the indicator column on the first idle channel among color,
    opacity, column and row. Busy channels are never overwritten; when all
    four are taken the image is returned unchanged apart from a note."""
    if indicator not in rel.data.names:
        return rel

    def busy(channel: str) -> bool:
        for row in rel.style.rows:
            segs = split_path(row.path)
            if len(segs) >= 2 and segs[0] == "encoding" and segs[1] == channel:
                return True
        return False

    for channel in IDLE_CHANNELS:
        if busy(channel):
            continue
        added = (
            StyleRow(join_path(("encoding", channel, "field")), indicator),
            StyleRow(join_path(("encoding", channel, "type")), "nominal"),
        )
        style = StyleTable(rel.style.rows + added)
        links = rel.mapping.links + (Link(added[0].path, indicator),)
        note = f"indicator column {indicator!r} encoded on channel {channel!r}"
        return RelViz(rel.data, style, MappingTable(links), rel.meta, rel.notes + (note,))
    return RelViz(
        rel.data,
        rel.style,
        rel.mapping,
        rel.meta,
        rel.notes + ("no idle channel available for the indicator column",),
    )


# ---------------------------------------------------------------------------
# Multi-way union


def union_many(
    rels: list[RelViz], params: OpParams = OpParams()
) -> UnionResult:
    """Left fold of union over the inputs in order."""
    if not rels:
        raise VizAlgError("union_many needs at least one input")
    acc = rels[0]
    report: list[str] = []
    for other in rels[1:]:
        step = union(acc, other, params)
        acc = step.merged
        report.extend(step.report)
    return UnionResult(acc, tuple(report))


def strip_data(rel: RelViz) -> tuple[RelViz, DataTable]:
    """Split a relational image into a data-free copy and its original data
    table (useful as a repair donor when transferring style)."""
    stripped = RelViz(
        DataTable(), rel.style, MappingTable(), DataMeta(False, False, None), rel.notes
    )
    return stripped, rel.data

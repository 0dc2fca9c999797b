"""Corpus-level operations built on the binary operators.

Weighted distances over spec differences, distance matrices, classical
multidimensional scaling, nearest-neighbour ranking, subset genealogy,
greedy sequencing, shortest paths and three-way version merge.
"""
from __future__ import annotations

import heapq
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._kernels import jacobi_eigh
from .errors import DegenerateMatrixError, VizAlgError
from .operators import OpParams, difference
from .relational import (
    DataTable,
    MappingTable,
    RelViz,
    StyleRow,
    StyleTable,
    build_links,
    canon_value,
    csv_text,
    infer_primary_key,
    join_path,
    split_path,
)

FIELD_TYPE_TOKENS = ("quantitative", "nominal", "ordinal", "temporal")

_DIFF_PARAMS = OpParams(on="all", how="merge", auto_encoding=False)


# ---------------------------------------------------------------------------
# Weights and distance


@dataclass(frozen=True)
class WeightConfig:
    """Per-category weights for the distance function.

    Categories: mark (the mark type), type (an encoding's data type), field
    (a field reference), aggregate, scale-scheme (a color scheme), data (one
    differing data cell). Anything else falls back to default_weight.
    """

    weights: dict = field(default_factory=dict)
    default_weight: float = 1.0

    def __post_init__(self) -> None:
        for key, value in self.weights.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
                raise VizAlgError(f"weight for {key!r} must be a non-negative number")
        if self.default_weight < 0:
            raise VizAlgError("default weight must be non-negative")

    def weight_for(self, category: str) -> float:
        return float(self.weights.get(category, self.default_weight))

    @classmethod
    def from_toml(cls, path) -> "WeightConfig":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        default = raw.pop("default", 1.0)
        return cls(weights=raw, default_weight=float(default))


def style_category(path: str) -> str:
    """Weight category of a style row. The mark type and the data type of an
    encoding are kept apart so they can be weighted independently."""
    segs = split_path(path)
    if path == "mark" or (segs[0] == "mark" and segs[-1] == "type"):
        return "mark"
    if segs[0] == "encoding" and segs[-1] == "type":
        return "type"
    if segs[-1] == "field":
        return "field"
    if segs[-1] == "aggregate":
        return "aggregate"
    if len(segs) >= 2 and segs[-2] == "scale" and segs[-1] == "scheme":
        return "scale-scheme"
    return "default"


def distance(a: RelViz, b: RelViz, w: WeightConfig = WeightConfig()) -> float:
    """Weight-sum over everything the two images do not share: style rows
    from the symmetric (path, value) difference, plus one 'data' weight per
    differing data cell (column, value multiset difference)."""
    _, style_diff = difference(a, b, _DIFF_PARAMS)
    total = 0.0
    for path, _value in style_diff.rows:
        total += w.weight_for(style_category(path))
    cells_a = Counter((name, canon_value(v)) for name, v in a.data.cells())
    cells_b = Counter((name, canon_value(v)) for name, v in b.data.cells())
    differing = (cells_a - cells_b) + (cells_b - cells_a)
    total += sum(differing.values()) * w.weight_for("data")
    return total


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: Any  # (n, n) float array

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", arr)
        n = len(self.labels)
        if arr.shape != (n, n):
            raise DegenerateMatrixError("distance matrix shape does not match labels")
        if not np.all(np.isfinite(arr)):
            raise DegenerateMatrixError("distance matrix has NaN or infinite entries")
        if np.any(arr < 0):
            raise DegenerateMatrixError("distance matrix has negative entries")
        if np.any(np.abs(arr - arr.T) > 1e-9 * max(1.0, float(np.max(arr)))):
            raise DegenerateMatrixError("distance matrix is not symmetric")
        if np.any(np.diag(arr) != 0):
            raise DegenerateMatrixError("distance matrix diagonal is not zero")

    @property
    def n(self) -> int:
        return len(self.labels)


def distance_matrix(
    corpus: list[RelViz],
    w: WeightConfig = WeightConfig(),
    labels: list[str] | None = None,
) -> DistanceMatrix:
    """Pairwise distances over a corpus. Pairs are independent; the result
    is the same as computing them sequentially in index order."""
    n = len(corpus)
    if n < 2:
        raise VizAlgError("a distance matrix needs at least two specs")
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise VizAlgError("label count does not match corpus size")
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = distance(corpus[i], corpus[j], w)
    return DistanceMatrix(tuple(labels), d)


# ---------------------------------------------------------------------------
# Classical MDS


@dataclass(frozen=True, eq=False)
class Embedding:
    coords: Any  # (n, k) float array
    stress: float


def mds_embed(m: DistanceMatrix, k: int = 2) -> Embedding:
    """Classical multidimensional scaling: double-center the squared
    distances, eigendecompose, scale the top-k eigenvectors by the square
    root of their (non-negative) eigenvalues. Each axis' sign is fixed so
    its largest-magnitude coordinate is positive. Stress is the normalized
    residual between input and embedded distances."""
    if k < 1:
        raise VizAlgError("embedding dimension must be >= 1")
    d = m.values
    n = m.n
    center = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * center @ (d * d) @ center
    vals, vecs = jacobi_eigh(b)
    order = np.argsort(vals, kind="stable")[::-1]
    coords = np.zeros((n, k))
    for axis in range(min(k, n)):
        lam = float(vals[order[axis]])
        if lam <= 0.0:
            break
        col = vecs[:, order[axis]] * np.sqrt(lam)
        peak = int(np.argmax(np.abs(col)))
        if col[peak] < 0:
            col = -col
        coords[:, axis] = col
    delta = np.sqrt(
        np.maximum(
            np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=2), 0.0
        )
    )
    iu = np.triu_indices(n, 1)
    den = float(np.sum(d[iu] ** 2))
    num = float(np.sum((d[iu] - delta[iu]) ** 2))
    stress = float(np.sqrt(num / den)) if den > 0 else 0.0
    return Embedding(coords, stress)


# ---------------------------------------------------------------------------
# Matching / filtering


def nearest(
    corpus: list[RelViz],
    query: RelViz,
    w: WeightConfig = WeightConfig(),
    top_k: int = 1,
) -> list[tuple[int, float]]:
    """Corpus indices ranked by ascending distance to the query, ties broken
    by corpus order; the first top_k entries."""
    if top_k < 1:
        raise VizAlgError("top_k must be >= 1")
    scored = [(distance(query, rel, w), i) for i, rel in enumerate(corpus)]
    scored.sort(key=lambda t: (t[0], t[1]))
    return [(i, d) for d, i in scored[:top_k]]


# ---------------------------------------------------------------------------
# Genealogy


@dataclass(frozen=True)
class GenealogyGraph:
    """Strict-subset ancestry DAG. Nodes are groups of corpus indices whose
    style rows are identical after ignoring; an edge points from ancestor to
    descendant and the edge set is transitively reduced."""

    nodes: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]

    def to_dot(self, labels: list[str] | None = None) -> str:
        def name(i: int) -> str:
            return f"n{i}"

        lines = ["digraph genealogy {"]
        for i, members in enumerate(self.nodes):
            if labels is None:
                text = ", ".join(str(m) for m in members)
            else:
                text = "\\n".join(labels[m] for m in members)
            lines.append(f'  {name(i)} [label="{text}"];')
        for a, b in self.edges:
            lines.append(f"  {name(a)} -> {name(b)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _ignored(path: str, prefixes: tuple[tuple[str, ...], ...]) -> bool:
    segs = split_path(path)
    return any(tuple(segs[: len(p)]) == p for p in prefixes)


def style_signature(rel: RelViz, ignore_paths: tuple[str, ...] = ()) -> frozenset:
    prefixes = tuple(tuple(split_path(p)) for p in ignore_paths)
    return frozenset(
        (r.path, canon_value(r.value))
        for r in rel.style.rows
        if not _ignored(r.path, prefixes)
    )


def genealogy(
    corpus: list[RelViz], ignore_paths: tuple[str, ...] = ()
) -> GenealogyGraph:
    """A is an ancestor of B when A's style rows are a strict subset of B's
    (data tables play no part). Specs equal after ignoring collapse into one
    node, which keeps the graph acyclic."""
    sigs = [style_signature(rel, ignore_paths) for rel in corpus]
    groups: list[list[int]] = []
    group_sig: list[frozenset] = []
    for i, sig in enumerate(sigs):
        for g, existing in enumerate(group_sig):
            if existing == sig:
                groups[g].append(i)
                break
        else:
            groups.append([i])
            group_sig.append(sig)
    edges = []
    for a, b in itertools.permutations(range(len(groups)), 2):
        if group_sig[a] < group_sig[b]:
            edges.append((a, b))
    reduced = []
    for a, b in edges:
        skip = any(
            group_sig[a] < group_sig[c] and group_sig[c] < group_sig[b]
            for c in range(len(groups))
        )
        if not skip:
            reduced.append((a, b))
    return GenealogyGraph(
        tuple(tuple(g) for g in groups), tuple(sorted(reduced))
    )


# ---------------------------------------------------------------------------
# Sequencing and path finding


def sequence(
    corpus: list[RelViz], w: WeightConfig = WeightConfig(), start: int = 0
) -> list[int]:
    """Greedy nearest-neighbour chain over the pairwise distances, starting
    at the given index; ties broken by index."""
    n = len(corpus)
    if not 0 <= start < n:
        raise VizAlgError(f"start index {start} out of range")
    if n == 1:
        return [start]
    m = distance_matrix(corpus, w).values
    order = [start]
    remaining = set(range(n)) - {start}
    current = start
    while remaining:
        current = min(remaining, key=lambda j: (float(m[current, j]), j))
        order.append(current)
        remaining.remove(current)
    return order


def shortest_path(m: DistanceMatrix, src: int, dst: int) -> tuple[list[int], float]:
    """Minimum-total-weight path in the complete graph induced by the
    matrix, ties broken by lexicographic node order."""
    n = m.n
    for idx in (src, dst):
        if not 0 <= idx < n:
            raise VizAlgError(f"node index {idx} out of range")
    if src == dst:
        return [src], 0.0
    d = m.values
    best: dict[int, tuple[float, tuple[int, ...]]] = {src: (0.0, (src,))}
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if best.get(node, (np.inf, ())) != (dist, path):
            continue
        if node == dst:
            return list(path), dist
        for v in range(n):
            if v == node:
                continue
            nd = dist + float(d[node, v])
            npath = path + (v,)
            cur = best.get(v)
            if cur is None or (nd, npath) < cur:
                best[v] = (nd, npath)
                heapq.heappush(heap, (nd, npath))
    raise VizAlgError("destination unreachable")  # complete graph: not expected


# ---------------------------------------------------------------------------
# Version control


@dataclass(frozen=True)
class Conflict:
    kind: str  # "style" or "data"
    where: str  # property path, record key, or block name
    ours: Any
    theirs: Any


@dataclass(frozen=True)
class ConflictReport:
    conflicts: tuple[Conflict, ...]

    def describe(self) -> str:
        lines = []
        for c in self.conflicts:
            lines.append(
                f"conflict on {c.kind} {c.where!r}: "
                f"ours={_show(c.ours)} theirs={_show(c.theirs)}"
            )
        return "\n".join(lines)


def _show(value: Any) -> str:
    if value is _DELETED:
        return "<deleted>"
    try:
        return json.dumps(value, sort_keys=True, default=str)
    except TypeError:
        return repr(value)


_DELETED = object()


def _style_edits(base: StyleTable, new: StyleTable) -> dict[str, Any]:
    bmap = {r.path: r.value for r in base.rows}
    nmap = {r.path: r.value for r in new.rows}
    edits: dict[str, Any] = {}
    for path, value in nmap.items():
        if path not in bmap or canon_value(bmap[path]) != canon_value(value):
            edits[path] = value
    for path in bmap:
        if path not in nmap:
            edits[path] = _DELETED
    return edits


def _edit_equal(a: Any, b: Any) -> bool:
    if a is _DELETED or b is _DELETED:
        return a is b
    return canon_value(a) == canon_value(b)


def _table_fingerprint(dt: DataTable) -> tuple:
    rows = tuple(sorted(tuple(canon_value(v) for v in row) for row in dt.rows))
    return (dt.names, tuple(c.ctype for c in dt.columns), rows)


def _meta_fingerprint(rel: RelViz) -> tuple:
    extra = rel.meta.extra
    try:
        shown = json.dumps(extra, sort_keys=True, default=str)
    except TypeError:
        shown = repr(extra)
    return (rel.meta.present, rel.meta.inline, shown)


def merge_versions(base: RelViz, ours: RelViz, theirs: RelViz):
    """Three-way merge. Each side's changes against the base are collected
    per style path and per data record key; disjoint or identical changes
    are both applied, anything edited to different outcomes on both sides
    becomes a ConflictReport instead of a merge."""
    conflicts: list[Conflict] = []

    our_edits = _style_edits(base.style, ours.style)
    their_edits = _style_edits(base.style, theirs.style)
    for path in sorted(set(our_edits) & set(their_edits)):
        if not _edit_equal(our_edits[path], their_edits[path]):
            conflicts.append(Conflict("style", path, our_edits[path], their_edits[path]))
    for opath in our_edits:
        if our_edits[opath] is _DELETED:
            continue
        osegs = split_path(opath)
        for tpath in their_edits:
            if their_edits[tpath] is _DELETED or tpath == opath:
                continue
            tsegs = split_path(tpath)
            shorter, longer = sorted((osegs, tsegs), key=len)
            if len(shorter) < len(longer) and longer[: len(shorter)] == shorter:
                conflicts.append(
                    Conflict(
                        "style",
                        join_path(shorter),
                        our_edits[opath],
                        their_edits[tpath],
                    )
                )

    merged_data, data_conflicts = _merge_data(base, ours, theirs)
    conflicts.extend(data_conflicts)

    if conflicts:
        return ConflictReport(tuple(conflicts))

    combined = dict(their_edits)
    combined.update(our_edits)
    rows: list[StyleRow] = []
    for r in base.style.rows:
        if r.path in combined:
            value = combined.pop(r.path)
            if value is not _DELETED:
                rows.append(StyleRow(r.path, value))
        else:
            rows.append(r)
    for source in (ours.style, theirs.style):
        for r in source.rows:
            if r.path in combined:
                value = combined.pop(r.path)
                if value is not _DELETED:
                    rows.append(StyleRow(r.path, value))
    style = StyleTable(tuple(rows))

    meta = base.meta
    ours_meta_changed = _meta_fingerprint(ours) != _meta_fingerprint(base)
    theirs_meta_changed = _meta_fingerprint(theirs) != _meta_fingerprint(base)
    if ours_meta_changed:
        meta = ours.meta
    elif theirs_meta_changed:
        meta = theirs.meta

    links = build_links(style, merged_data.names)
    return RelViz(merged_data, style, MappingTable(links), meta, ())


def _merge_data(
    base: RelViz, ours: RelViz, theirs: RelViz
) -> tuple[DataTable, list[Conflict]]:
    tables = (base.data, ours.data, theirs.data)
    key = infer_primary_key(base.data)
    same_schema = len({t.names for t in tables}) == 1
    if key is None or not same_schema:
        return _merge_data_whole(base, ours, theirs)
    idx = [base.data.index(n) for n in key]

    def by_key(dt: DataTable) -> dict[tuple, tuple] | None:
        out: dict[tuple, tuple] = {}
        for row in dt.rows:
            k = tuple(canon_value(row[i]) for i in idx)
            if k in out:
                return None  # duplicate keys: fall back to whole-table mode
            out[k] = row
        return out

    maps = [by_key(t) for t in tables]
    if any(m is None for m in maps):
        return _merge_data_whole(base, ours, theirs)
    bmap, omap, tmap = maps

    def edits(new: dict[tuple, tuple]) -> dict[tuple, Any]:
        out: dict[tuple, Any] = {}
        for k, row in new.items():
            if k not in bmap or tuple(map(canon_value, bmap[k])) != tuple(
                map(canon_value, row)
            ):
                out[k] = row
        for k in bmap:
            if k not in new:
                out[k] = _DELETED
        return out

    our_edits = edits(omap)
    their_edits = edits(tmap)
    conflicts: list[Conflict] = []
    for k in sorted(set(our_edits) & set(their_edits)):
        a, b = our_edits[k], their_edits[k]
        same = (
            a is _DELETED
            and b is _DELETED
            or (
                a is not _DELETED
                and b is not _DELETED
                and tuple(map(canon_value, a)) == tuple(map(canon_value, b))
            )
        )
        if not same:
            shown = a if a is not _DELETED else b
            where = ", ".join(
                f"{n}={csv_text(shown[i])}" for n, i in zip(key, idx)
            )
            conflicts.append(
                Conflict(
                    "data",
                    where,
                    list(a) if a is not _DELETED else _DELETED,
                    list(b) if b is not _DELETED else _DELETED,
                )
            )
    if conflicts:
        return base.data, conflicts

    combined = dict(their_edits)
    combined.update(our_edits)
    rows: list[tuple] = []
    for row in base.data.rows:
        k = tuple(canon_value(row[i]) for i in idx)
        if k in combined:
            value = combined.pop(k)
            if value is not _DELETED:
                rows.append(value)
        else:
            rows.append(row)
    for source in (omap, tmap):
        for k, row in source.items():
            if k in combined:
                value = combined.pop(k)
                if value is not _DELETED:
                    rows.append(value)
    return DataTable(base.data.columns, tuple(rows), "merged"), []


def _merge_data_whole(
    base: RelViz, ours: RelViz, theirs: RelViz
) -> tuple[DataTable, list[Conflict]]:
    b, o, t = (
        _table_fingerprint(base.data),
        _table_fingerprint(ours.data),
        _table_fingerprint(theirs.data),
    )
    if o != b and t != b and o != t:
        return base.data, [
            Conflict(
                "data",
                "(whole table)",
                f"{len(ours.data.rows)} row(s)",
                f"{len(theirs.data.rows)} row(s)",
            )
        ]
    if o != b:
        return ours.data, []
    if t != b:
        return theirs.data, []
    return base.data, []


def same_viz(a: RelViz, b: RelViz) -> bool:
    """Equality by empty difference on both parts."""
    data, style = difference(a, b, _DIFF_PARAMS)
    return len(data) == 0 and len(style) == 0


@dataclass(frozen=True)
class VersionGraph:
    """Version history with identical specs collapsed into one node."""

    nodes: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[int, int], ...]


def build_version_graph(
    versions: dict[str, RelViz], parents: dict[str, str | None]
) -> VersionGraph:
    ids = list(versions)
    groups: list[list[str]] = []
    rep: list[RelViz] = []
    where: dict[str, int] = {}
    for vid in ids:
        for g, r in enumerate(rep):
            if same_viz(versions[vid], r):
                groups[g].append(vid)
                where[vid] = g
                break
        else:
            where[vid] = len(groups)
            groups.append([vid])
            rep.append(versions[vid])
    edges = set()
    for vid, parent in parents.items():
        if parent is None or parent not in where or vid not in where:
            continue
        a, b = where[parent], where[vid]
        if a != b:
            edges.add((a, b))
    return VersionGraph(tuple(tuple(g) for g in groups), tuple(sorted(edges)))

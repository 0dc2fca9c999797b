"""Union-based style transfer benchmark.

For every spec in a corpus, a fresh dataset with the same number and types
of fields is synthesized and the spec's style is transferred onto it with
one union call. The output is validated (parses, round-trips, references
resolve, value-level assumptions hold) and failures are classified.
"""
from __future__ import annotations

import os
import random
import re
from dataclasses import dataclass
from datetime import date, timedelta

from .errors import VizAlgError
from .model import VizSpec, from_document, parse_spec, parse_temporal, serialize_spec
from .operators import OpParams, strip_data, union
from .relational import (
    DataTable,
    RelViz,
    derived_names,
    from_spec,
    is_field_ref,
    join_path,
    split_path,
    to_spec,
)

FAILURE_CLASSES = ("string-expression", "data-value", "map", "time-parse", "other")

DEFAULT_SEED = "2020"
SEED_ENV = "VIZALG_SEED"

FIELD_TYPE_TOKENS = ("quantitative", "nominal", "ordinal", "temporal")

_CHANNEL_POOL = (
    "x", "y", "color", "size", "opacity", "shape",
    "row", "column", "detail", "text", "href",
)

_DATUM_REF = re.compile(r"datum\.(\w+)")


@dataclass(frozen=True)
class BenchCase:
    name: str
    ok: bool
    failure_class: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class BenchReport:
    total: int
    successes: int
    failures: tuple[tuple[str, str], ...]
    cases: tuple[BenchCase, ...] = ()

    @property
    def rate(self) -> float:
        return self.successes / self.total if self.total else 0.0


def _case_rng(name: str) -> random.Random:
    seed = os.environ.get(SEED_ENV, DEFAULT_SEED)
    # string seeding hashes deterministically across processes
    return random.Random(f"{seed}:{name}")


def _referenced_types(rel: RelViz, donor: DataTable) -> list[tuple[str, str]]:
    """Real (not derived) fields the style references, with their types:
    a sibling `type` declaration wins, then the donor column, else nominal."""
    derived = derived_names(rel.style)
    fields: dict[str, str | None] = {}
    for row in rel.style.rows:
        if not (isinstance(row.value, str) and is_field_ref(row.path)):
            continue
        if row.value in derived:
            continue
        fields.setdefault(row.value, None)
        segs = split_path(row.path)
        if segs[-1] == "field" and fields[row.value] is None:
            declared = rel.style.lookup(join_path(segs[:-1] + ["type"]))
            if isinstance(declared, str) and declared in FIELD_TYPE_TOKENS:
                fields[row.value] = declared
    out = []
    for name, ftype in fields.items():
        if ftype is None and name in donor.names:
            ftype = donor.ctype(name)
        out.append((name, ftype or "nominal"))
    return out


def _field_channels(rel: RelViz) -> dict[str, str]:
    """First encoding channel that references each field."""
    out: dict[str, str] = {}
    for row in rel.style.rows:
        segs = split_path(row.path)
        if (
            len(segs) == 3
            and segs[0] == "encoding"
            and segs[2] == "field"
            and isinstance(row.value, str)
        ):
            out.setdefault(row.value, segs[1])
    return out


def synthesize_data_spec(
    style_rel: RelViz, donor: DataTable, rng: random.Random, n_rows: int = 20
) -> VizSpec:
    """A plain visualization carrying fresh data with the same number and
    types of fields as the style source references. Each synthesized field
    is encoded on the channel the style source uses for its counterpart, so
    the transferred style fully replaces the placeholder encodings."""
    fields = _referenced_types(style_rel, donor)
    prefix = {"quantitative": "q", "nominal": "n", "temporal": "t", "ordinal": "o"}
    names: list[str] = []
    counts: dict[str, int] = {}
    for _, ftype in fields:
        p = prefix[ftype]
        counts[p] = counts.get(p, 0)
        names.append(f"{p}{counts[p]}")
        counts[p] += 1

    rows = []
    start = date(2020, 1, 1)
    for r in range(n_rows):
        rec = {}
        for synth, (_, ftype) in zip(names, fields):
            if ftype == "quantitative":
                rec[synth] = round(rng.uniform(0.0, 100.0), 2)
            elif ftype == "temporal":
                rec[synth] = (start + timedelta(days=r)).isoformat()
            elif ftype == "ordinal":
                rec[synth] = f"lev_{r:02d}"
            else:
                rec[synth] = f"cat_{r}"
        rows.append(rec)

    channel_of = _field_channels(style_rel)
    used: set[str] = set()
    encoding: dict[str, dict] = {}
    spare = [ch for ch in _CHANNEL_POOL]
    for synth, (origin, ftype) in zip(names, fields):
        channel = channel_of.get(origin)
        if channel is None or channel in used:
            channel = next((ch for ch in spare if ch not in used), None)
        if channel is None:
            continue  # more fields than channels: leave the column unencoded
        used.add(channel)
        encoding[channel] = {"field": synth, "type": ftype}

    doc: dict = {"data": {"values": rows}, "mark": "point"}
    if encoding:
        doc["encoding"] = encoding
    return from_document(doc)


TRANSFER_PARAMS = OpParams(on="key", how="right", auto_encoding=False)


def transfer_style(data_rel: RelViz, style_spec_rel: RelViz):
    """One-call style transfer: strip the style source's data and union it
    onto the data carrier, right side winning style collisions."""
    stripped, donor = strip_data(style_spec_rel)
    return union(data_rel, stripped, TRANSFER_PARAMS, donor=donor), donor


def _validate(merged: RelViz, stripped: RelViz, donor: DataTable) -> tuple[str, str] | None:
    """First problem found, as (failure class, detail), or None."""
    # geographic charts need shape data that synthesis cannot provide
    for row in merged.style.rows:
        segs = split_path(row.path)
        if segs[0] == "projection":
            return "map", "projection requires geographic data"
        if (row.path == "mark" or (segs[0] == "mark" and segs[-1] == "type")) and row.value == "geoshape":
            return "map", "geoshape mark requires geographic data"

    # string-embedded expressions are never rewritten, so their field
    # references go stale when the columns are replaced
    columns = set(merged.data.names)
    derived = derived_names(merged.style)
    for row in merged.style.rows:
        if not isinstance(row.value, str):
            continue
        for ref in _DATUM_REF.findall(row.value):
            if ref not in columns and ref not in derived:
                return (
                    "string-expression",
                    f"{row.path} references datum.{ref} which no column provides",
                )

    # explicit scale domains carry values from the original dataset
    domains: dict[str, list[float]] = {}
    for row in merged.style.rows:
        segs = split_path(row.path)
        if (
            len(segs) == 5
            and segs[0] == "encoding"
            and segs[2] == "scale"
            and segs[3] == "domain"
            and isinstance(row.value, (int, float))
            and not isinstance(row.value, bool)
        ):
            domains.setdefault(segs[1], []).append(float(row.value))
    for channel, bounds in domains.items():
        if len(bounds) < 2:
            continue
        lo, hi = min(bounds), max(bounds)
        field = merged.style.lookup(join_path(("encoding", channel, "field")))
        if not (isinstance(field, str) and field in columns):
            continue
        idx = merged.data.index(field)
        cells = [
            row[idx]
            for row in merged.data.rows
            if isinstance(row[idx], (int, float)) and not isinstance(row[idx], bool)
        ]
        if cells and not any(lo <= c <= hi for c in cells):
            return (
                "data-value",
                f"scale domain [{lo}, {hi}] on {channel!r} excludes every value",
            )

    # temporal fields whose source values never parsed as dates carry
    # formatting assumptions the synthesized dates cannot honor
    for row in stripped.style.rows:
        segs = split_path(row.path)
        if not (segs[-1] == "field" and isinstance(row.value, str)):
            continue
        declared = stripped.style.lookup(join_path(segs[:-1] + ["type"]))
        if declared != "temporal" or row.value not in donor.names:
            continue
        idx = donor.index(row.value)
        for drow in donor.rows:
            cell = drow[idx]
            if isinstance(cell, str) and parse_temporal(cell) is None:
                return (
                    "time-parse",
                    f"temporal field {row.value!r} has unparseable value {cell!r}",
                )
    return None


def run_case(name: str, spec: VizSpec) -> BenchCase:
    rng = _case_rng(name)
    try:
        style_rel = from_spec(spec, keep_unencoded=True)
        data_spec = synthesize_data_spec(style_rel, style_rel.data, rng)
        data_rel = from_spec(data_spec, keep_unencoded=True)
        result, donor = transfer_style(data_rel, style_rel)
        merged = result.merged
        out_spec = to_spec(merged)
        reparsed = parse_spec(serialize_spec(out_spec))
        if reparsed != out_spec:
            return BenchCase(name, False, "other", "output does not round-trip")
        stripped, _ = strip_data(style_rel)
        problem = _validate(merged, stripped, donor)
    except VizAlgError as exc:
        return BenchCase(name, False, "other", str(exc))
    if problem is not None:
        return BenchCase(name, False, problem[0], problem[1])
    return BenchCase(name, True)


def bench_style_transfer(specs: list[tuple[str, VizSpec]]) -> BenchReport:
    cases = tuple(run_case(name, spec) for name, spec in specs)
    failures = tuple((c.name, c.failure_class or "other") for c in cases if not c.ok)
    return BenchReport(
        total=len(cases),
        successes=sum(1 for c in cases if c.ok),
        failures=failures,
        cases=cases,
    )

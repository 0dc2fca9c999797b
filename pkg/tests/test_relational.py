from __future__ import annotations

import json
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vizalg import (
    KeyCollisionError,
    MISSING,
    RelViz,
    canon_value,
    flatten,
    from_spec,
    infer_primary_key,
    parse_spec,
    to_spec,
    unflatten,
)
from vizalg.errors import InconsistentRelVizError
from vizalg.relational import (
    Column,
    DataTable,
    StyleRow,
    StyleTable,
    build_links,
    is_derived_name,
    is_field_ref,
    join_path,
    referenced_fields,
    split_path,
    write_tables,
)

from oracles import walk_doc


def rel_of(doc: dict, keep_unencoded: bool = True) -> RelViz:
    return from_spec(parse_spec(json.dumps(doc)), keep_unencoded)


# ---------------------------------------------------------------------------
# Path encoding


def test_join_path_escapes_dashes_inside_keys():
    assert join_path(("usermeta", "created-by")) == "usermeta-created--by"
    assert split_path("usermeta-created--by") == ["usermeta", "created-by"]


def test_split_path_dash_runs():
    assert split_path("a-b") == ["a", "b"]
    assert split_path("a--b") == ["a-b"]
    assert split_path("a---b") == ["a-", "b"]
    assert split_path("a----b") == ["a--b"]


segments = st.lists(
    st.text(st.characters(blacklist_characters="\x00"), min_size=1).filter(
        lambda s: not s.isdigit() and not s.startswith("-")
    ),
    min_size=1,
    max_size=5,
)


@given(segments)
def test_path_round_trip(segs):
    assert split_path(join_path(segs)) == segs


@pytest.mark.parametrize("bad", ["", "-", "-x", "--", "-0"])
def test_join_path_rejects_ambiguous_segments(bad):
    # ["a", "-b"] and ["a-", "b"] would produce the same joined path, so
    # leading-dash (and empty) keys are refused outright.
    with pytest.raises(KeyCollisionError):
        join_path(["a", bad])


@pytest.mark.parametrize("doc", [{"-a": 1}, {":": {"-0": None}}, {":": {"-": None}}])
def test_flatten_rejects_leading_dash_keys(doc):
    with pytest.raises(KeyCollisionError):
        flatten(doc)


# ---------------------------------------------------------------------------
# Flatten / unflatten


def test_flatten_matches_reference_walker():
    doc = {
        "mark": {"type": "line", "point": True},
        "encoding": {"x": {"field": "a", "type": "nominal"}},
        "transform": [{"fold": ["g", "s"], "as": ["k", "v"]}],
        "config": {"view": {}},
        "title": None,
    }
    got = {(tuple(split_path(p)), canon_value(v)) for p, v in flatten(doc)}
    want = {(path, canon_value(v)) for path, v in walk_doc(doc)}
    assert got == want


def test_flatten_keeps_empty_containers_as_leaves():
    pairs = dict(flatten({"a": {}, "b": []}))
    assert pairs == {"a": {}, "b": []}
    assert unflatten(pairs.items()) == {"a": {}, "b": []}


def test_flatten_rejects_digit_and_empty_keys():
    with pytest.raises(KeyCollisionError):
        flatten({"a": {"0": "x"}})
    with pytest.raises(KeyCollisionError):
        flatten({"": 1})
    with pytest.raises(KeyCollisionError):
        flatten([1, 2])


def test_unflatten_structural_contradictions():
    with pytest.raises(InconsistentRelVizError):
        unflatten([("a-b", 1), ("a-b", 2)])
    with pytest.raises(InconsistentRelVizError):
        unflatten([("a", 1), ("a-b", 2)])
    with pytest.raises(InconsistentRelVizError):
        unflatten([("a-0", 1), ("a-b", 2)])


def test_unflatten_compacts_sparse_array_indices():
    assert unflatten([("a-0", "p"), ("a-3", "q")]) == {"a": ["p", "q"]}


json_leaves = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-1000, max_value=1000),
    st.floats(allow_nan=False, allow_infinity=False, width=32),
    st.text(max_size=8),
)

object_keys = st.text(
    st.characters(blacklist_characters="\x00"), min_size=1, max_size=6
).filter(lambda s: not s.isdigit() and not s.startswith("-"))

json_trees = st.recursive(
    json_leaves,
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(object_keys, children, max_size=4),
    ),
    max_leaves=25,
)


@given(st.dictionaries(object_keys, json_trees, min_size=1, max_size=5))
@settings(max_examples=150, deadline=None)
def test_flatten_unflatten_round_trip(tree):
    assert unflatten(flatten(tree)) == tree


# ---------------------------------------------------------------------------
# Value canonicalization


def test_canon_value_type_discipline():
    assert canon_value(1) == canon_value(1.0)
    assert canon_value(True) != canon_value(1)
    assert canon_value("1") != canon_value(1)
    assert canon_value(None) != canon_value(MISSING)
    assert canon_value(date(2021, 1, 1)) != canon_value("2021-01-01")
    assert canon_value({"a": 1, "b": 2}) == canon_value({"b": 2, "a": 1})
    assert canon_value([1, 2]) != canon_value([2, 1])


def test_missing_sentinel_identity():
    assert repr(MISSING) == "MISSING"
    assert not MISSING
    assert MISSING is not None
    assert type(MISSING)() is MISSING


# ---------------------------------------------------------------------------
# Field references


def test_field_ref_and_derived_name_paths():
    assert is_field_ref("encoding-x-field")
    assert is_field_ref("transform-0-groupby-1")
    assert is_field_ref("transform-0-fold-0")
    assert is_field_ref("transform-0-sort-0-field")
    assert not is_field_ref("encoding-x-type")
    assert is_derived_name("transform-0-as")
    assert is_derived_name("transform-0-as-1")
    assert not is_derived_name("transform-0-fold-0")


def test_build_links_only_for_resolvable_references():
    style = StyleTable(
        (
            StyleRow("encoding-x-field", "a"),
            StyleRow("encoding-y-field", "ghost"),
            StyleRow("title", "a"),
        )
    )
    links = build_links(style, ["a"])
    assert [(l.path, l.column) for l in links] == [("encoding-x-field", "a")]
    assert referenced_fields(style) == ["a", "ghost"]


# ---------------------------------------------------------------------------
# from_spec / to_spec


def test_unencoded_columns_dropped_by_default():
    doc = {
        "data": {"values": [{"a": "x", "b": 1, "c": 9}]},
        "mark": "bar",
        "encoding": {"x": {"field": "a", "type": "nominal"},
                     "y": {"field": "b", "type": "quantitative"}},
    }
    rel = rel_of(doc, keep_unencoded=False)
    assert rel.data.names == ("a", "b")
    assert any("dropped unencoded columns: c" in n for n in rel.notes)
    assert rel_of(doc, keep_unencoded=True).data.names == ("a", "b", "c")


def test_ragged_records_use_missing_cells():
    doc = {"data": {"values": [{"a": 1}, {"a": 2, "b": "x"}]}, "mark": "tick"}
    rel = rel_of(doc)
    assert rel.data.rows == ((1, MISSING), (2, "x"))
    back = to_spec(rel).to_document()
    assert back["data"]["values"] == [{"a": 1}, {"a": 2, "b": "x"}]


def test_iso_date_cells_upgrade_and_round_trip():
    doc = {"data": {"values": [{"d": "2021-01-02", "v": 1}]}, "mark": "line"}
    rel = rel_of(doc)
    assert rel.data.rows[0][0] == date(2021, 1, 2)
    assert rel.data.ctype("d") == "temporal"
    assert to_spec(rel).to_document() == doc


def test_non_canonical_date_text_stays_text():
    doc = {"data": {"values": [{"d": "2021/01/02", "v": 1}]}, "mark": "line"}
    rel = rel_of(doc)
    assert rel.data.rows[0][0] == "2021/01/02"
    assert to_spec(rel).to_document() == doc


def test_opaque_data_block_is_preserved():
    doc = {
        "data": {"url": "data/cars.json", "format": {"type": "json"}},
        "mark": "point",
        "encoding": {"x": {"field": "Horsepower", "type": "quantitative"}},
    }
    rel = rel_of(doc)
    assert rel.data.is_empty
    assert rel.meta.present and not rel.meta.inline
    assert to_spec(rel).to_document() == doc


def test_nested_values_fall_back_to_opaque_preservation():
    doc = {"data": {"values": [{"a": {"nested": 1}}]}, "mark": "bar"}
    rel = rel_of(doc)
    assert rel.data.is_empty
    assert to_spec(rel).to_document() == doc


def test_inline_data_sibling_keys_survive():
    doc = {"data": {"values": [{"a": 1}], "name": "src"}, "mark": "bar"}
    assert to_spec(rel_of(doc)).to_document() == doc


def test_validate_rejects_dangling_links():
    from vizalg.relational import Link, MappingTable

    rel = rel_of({"data": {"values": [{"a": 1}]}, "mark": "bar"})
    bad = RelViz(rel.data, rel.style, MappingTable((Link("mark", "ghost"),)), rel.meta)
    with pytest.raises(InconsistentRelVizError):
        bad.validate()


# ---------------------------------------------------------------------------
# Primary key inference


def make_table(names, ctypes, rows):
    return DataTable(tuple(Column(n, t) for n, t in zip(names, ctypes)), tuple(rows))


def test_primary_key_prefers_single_unique_column():
    t = make_table(
        ["city", "country", "pop"],
        ["nominal", "nominal", "quantitative"],
        [("oslo", "no", 1), ("bergen", "no", 2)],
    )
    assert infer_primary_key(t) == ("city",)


def test_primary_key_composite_when_no_single_column_is_unique():
    t = make_table(
        ["a", "b"],
        ["nominal", "nominal"],
        [("x", "1"), ("x", "2"), ("y", "1")],
    )
    assert infer_primary_key(t) == ("a", "b")


def test_primary_key_excludes_quantitative_columns():
    t = make_table(["v"], ["quantitative"], [(1,), (2,)])
    assert infer_primary_key(t) is None


def test_primary_key_none_when_rows_collide():
    t = make_table(["a"], ["nominal"], [("x",), ("x",)])
    assert infer_primary_key(t) is None


def test_write_tables_produces_three_csv_files(tmp_path):
    rel = rel_of({"data": {"values": [{"a": "x", "b": 1}]}, "mark": "bar",
                  "encoding": {"x": {"field": "a", "type": "nominal"}}})
    write_tables(rel, tmp_path)
    assert (tmp_path / "data.csv").read_text().splitlines()[0] == "a,b"
    assert (tmp_path / "style.csv").read_text().splitlines()[0] == "property,value"
    mapping = (tmp_path / "mapping.csv").read_text().splitlines()
    assert mapping == ["property,column", "encoding-x-field,a"]

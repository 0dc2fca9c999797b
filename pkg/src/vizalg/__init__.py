"""Set algebra over declarative visualization specs.

Specs are mirrored losslessly into a relational triple (data table, style
table, mapping table); union, intersection and difference are then plain
joins, and distances, embeddings, genealogy and version merge build on top.
"""
from ._kernels import BACKEND
from .analysis import (
    Conflict,
    ConflictReport,
    DistanceMatrix,
    Embedding,
    GenealogyGraph,
    VersionGraph,
    WeightConfig,
    build_version_graph,
    distance,
    distance_matrix,
    genealogy,
    mds_embed,
    merge_versions,
    nearest,
    same_viz,
    sequence,
    shortest_path,
)
from .bench import BenchCase, BenchReport, bench_style_transfer
from .errors import (
    DegenerateMatrixError,
    DisjointColumnsError,
    InconsistentRelVizError,
    KeyCollisionError,
    NoInlineDataError,
    NoKeyError,
    SpecSyntaxError,
    UnrepairableLinkError,
    UnsupportedSpecError,
    VizAlgError,
)
from .model import (
    DataNode,
    EncodingDef,
    VizSpec,
    from_document,
    infer_field_types,
    parse_spec,
    serialize_spec,
)
from .operators import (
    MarkedTable,
    OpParams,
    UnionResult,
    assign_indicator_channel,
    difference,
    intersect,
    repair_links,
    strip_data,
    union,
    union_many,
)
from .relational import (
    Column,
    DataMeta,
    DataTable,
    Link,
    MappingTable,
    MISSING,
    RelViz,
    StyleRow,
    StyleTable,
    canon_value,
    flatten,
    from_spec,
    infer_primary_key,
    join_path,
    split_path,
    to_spec,
    unflatten,
    write_tables,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchCase",
    "BenchReport",
    "Column",
    "Conflict",
    "ConflictReport",
    "DataMeta",
    "DataNode",
    "DataTable",
    "DegenerateMatrixError",
    "DisjointColumnsError",
    "DistanceMatrix",
    "Embedding",
    "EncodingDef",
    "GenealogyGraph",
    "InconsistentRelVizError",
    "KeyCollisionError",
    "Link",
    "MappingTable",
    "MarkedTable",
    "MISSING",
    "NoInlineDataError",
    "NoKeyError",
    "OpParams",
    "RelViz",
    "SpecSyntaxError",
    "StyleRow",
    "StyleTable",
    "UnionResult",
    "UnrepairableLinkError",
    "UnsupportedSpecError",
    "VersionGraph",
    "VizAlgError",
    "VizSpec",
    "WeightConfig",
    "assign_indicator_channel",
    "bench_style_transfer",
    "build_version_graph",
    "canon_value",
    "difference",
    "distance",
    "distance_matrix",
    "flatten",
    "from_document",
    "from_spec",
    "genealogy",
    "infer_field_types",
    "infer_primary_key",
    "intersect",
    "join_path",
    "mds_embed",
    "merge_versions",
    "nearest",
    "parse_spec",
    "repair_links",
    "same_viz",
    "sequence",
    "serialize_spec",
    "shortest_path",
    "split_path",
    "strip_data",
    "to_spec",
    "unflatten",
    "union",
    "union_many",
    "write_tables",
]

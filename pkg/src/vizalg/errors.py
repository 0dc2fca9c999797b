"""Exception hierarchy for vizalg."""


class VizAlgError(Exception):
    """Base class for all vizalg errors."""


class SpecSyntaxError(VizAlgError):
    """The document is not well-formed JSON or not an object."""


class UnsupportedSpecError(VizAlgError):
    """The document uses features outside the supported single-view subset
    (top-level layer/hconcat/vconcat/concat/facet/repeat)."""


class NoInlineDataError(VizAlgError):
    """A data-level operation was requested on a spec without inline data."""


class KeyCollisionError(VizAlgError):
    """A property key cannot be represented unambiguously in a dash path
    (empty key, or an all-digit key colliding with array indices)."""


class InconsistentRelVizError(VizAlgError):
    """A relational image violates its internal invariants, e.g. a mapping
    link names a property or column that does not exist."""


class DisjointColumnsError(VizAlgError):
    """Union was asked to join two data tables that share no column."""


class NoKeyError(VizAlgError):
    """Joining on=key was requested but no shared primary key is inferable."""


class UnrepairableLinkError(VizAlgError):
    """A broken mapping link cannot be reassigned because the data table has
    no columns at all."""


class DegenerateMatrixError(VizAlgError):
    """A distance matrix contains NaN, infinite or negative entries."""

from __future__ import annotations

import pytest

from vizalg import from_spec, parse_spec
from vizalg.corpus import spec_paths


@pytest.fixture(scope="session")
def corpus_specs():
    """(file name, parsed spec) for every bundled chart document."""
    out = []
    for path in spec_paths():
        out.append((path.name, parse_spec(path.read_text(encoding="utf-8"))))
    assert len(out) >= 30
    return out


@pytest.fixture(scope="session")
def corpus_rels(corpus_specs):
    return [(name, from_spec(spec, keep_unencoded=True)) for name, spec in corpus_specs]

"""Bundled example charts used by the tests and the transfer benchmark.

Each ``*.vl.json`` file holds one single-view chart document. Most are
well-formed end-to-end; a handful are deliberately awkward donors (string
expressions, hard-coded scale domains, map projections, unparseable time
strings) so the benchmark has realistic failures to classify.
"""
from __future__ import annotations

import pathlib


def corpus_path() -> pathlib.Path:
    """Directory containing the bundled ``*.vl.json`` documents."""
    return pathlib.Path(__file__).resolve().parent


def spec_paths() -> list[pathlib.Path]:
    """All bundled chart documents, sorted by file name."""
    return sorted(corpus_path().glob("*.vl.json"))

"""Command line interface.

Exit codes: 0 success, 1 input or parse problem, 2 operator error,
3 merge conflict.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import pathlib
import sys
from datetime import date, datetime

from . import analysis, bench
from .errors import SpecSyntaxError, UnsupportedSpecError, VizAlgError
from .model import VizSpec, parse_spec
from .operators import OpParams, difference, intersect, union, union_many
from .relational import csv_text, from_spec, split_path, to_spec

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_OPERATOR = 2
EXIT_CONFLICT = 3


class CliInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this contract reserves 2 for
    operator failures, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load_spec(path: str) -> VizSpec:
    try:
        text = pathlib.Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliInputError(f"{path}: {exc}") from exc
    try:
        return parse_spec(text)
    except (SpecSyntaxError, UnsupportedSpecError) as exc:
        raise CliInputError(f"{path}: {exc}") from exc


def _load_dir(path: str) -> list[tuple[str, VizSpec]]:
    """Parse every .json file in a directory, sorted by filename. Files that
    fail to parse are skipped with a warning; an empty result is an error."""
    root = pathlib.Path(path)
    if not root.is_dir():
        raise CliInputError(f"{path}: not a directory")
    out = []
    for child in sorted(root.iterdir(), key=lambda p: p.name):
        if not (child.is_file() and child.suffix == ".json"):
            continue
        try:
            out.append((child.name, _load_spec(str(child))))
        except CliInputError as exc:
            print(f"warning: skipping {exc}", file=sys.stderr)
    if not out:
        raise CliInputError(f"{path}: no parseable specs")
    return out


def _json_default(value):
    if isinstance(value, (date, datetime)):
        return value.isoformat()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _dump_spec(spec: VizSpec) -> str:
    """Normalized output: sorted object keys, 2-space indent, LF endings."""
    return (
        json.dumps(
            spec.to_document(),
            sort_keys=True,
            indent=2,
            ensure_ascii=False,
            default=_json_default,
        )
        + "\n"
    )


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _weights(args) -> analysis.WeightConfig:
    if getattr(args, "weights", None) is None:
        return analysis.WeightConfig()
    try:
        return analysis.WeightConfig.from_toml(args.weights)
    except (OSError, ValueError, VizAlgError) as exc:
        raise CliInputError(f"{args.weights}: {exc}") from exc
    except Exception as exc:  # tomllib decode errors
        raise CliInputError(f"{args.weights}: {exc}") from exc


def _params(args) -> OpParams:
    return OpParams(
        on=getattr(args, "on", "key"),
        how=getattr(args, "how", "merge"),
        auto_encoding=getattr(args, "auto_encoding", True),
    )


# ---------------------------------------------------------------------------
# Commands


def cmd_union(args) -> int:
    left = from_spec(_load_spec(args.left), args.keep_unencoded)
    right = from_spec(_load_spec(args.right), args.keep_unencoded)
    result = union(left, right, _params(args))
    for line in result.report:
        print(line, file=sys.stderr)
    _write(_dump_spec(to_spec(result.merged)), args.out)
    return EXIT_OK


def cmd_union_many(args) -> int:
    specs = _load_dir(args.directory)
    rels = [from_spec(s, args.keep_unencoded) for _, s in specs]
    result = union_many(rels, _params(args))
    for line in result.report:
        print(line, file=sys.stderr)
    _write(_dump_spec(to_spec(result.merged)), args.out)
    return EXIT_OK


def _marked_csv(columns, rows, tags) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns) + ["_source"])
    for row, tag in zip(rows, tags):
        writer.writerow([csv_text(v) for v in row] + [tag])
    return buf.getvalue()


def _render_templates(style_marked) -> list[str]:
    """One sentence per changed style property."""
    sides: dict[str, dict[str, object]] = {}
    order: list[str] = []
    for (path, value), tag in zip(style_marked.rows, style_marked.indicator):
        if path not in sides:
            sides[path] = {}
            order.append(path)
        sides[path][tag] = value
    lines = []
    for path in order:
        left = sides[path].get("left")
        right = sides[path].get("right")
        segs = split_path(path)
        enc = len(segs) == 3 and segs[0] == "encoding" and segs[2] == "field"
        if "left" in sides[path] and "right" in sides[path]:
            lines.append(
                f"changing {path} from {csv_text(left)} to {csv_text(right)}"
            )
        elif "right" in sides[path]:
            if enc:
                lines.append(
                    "adding a new encoding by assigning the data field "
                    f"{csv_text(right)} to the encoding channel {segs[1]}"
                )
            else:
                lines.append(f"adding {path} = {csv_text(right)}")
        else:
            if enc:
                lines.append(
                    "removing the encoding of the data field "
                    f"{csv_text(left)} from the encoding channel {segs[1]}"
                )
            else:
                lines.append(f"removing {path} (= {csv_text(left)})")
    return lines


def _cmd_diff_like(args, op) -> int:
    left = from_spec(_load_spec(args.left), args.keep_unencoded)
    right = from_spec(_load_spec(args.right), args.keep_unencoded)
    data, style = op(left, right, _params(args))
    outdir = pathlib.Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "data.csv").write_text(
        _marked_csv(data.columns, data.rows, data.indicator), encoding="utf-8", newline=""
    )
    (outdir / "style.csv").write_text(
        _marked_csv(style.columns, style.rows, style.indicator), encoding="utf-8", newline=""
    )
    print(f"data rows: {len(data)}")
    print(f"style rows: {len(style)}")
    if getattr(args, "render_template", False):
        for line in _render_templates(style):
            print(line)
    return EXIT_OK


def cmd_diff(args) -> int:
    return _cmd_diff_like(args, difference)


def cmd_intersect(args) -> int:
    return _cmd_diff_like(args, intersect)


def cmd_merge(args) -> int:
    base = from_spec(_load_spec(args.base), args.keep_unencoded)
    ours = from_spec(_load_spec(args.ours), args.keep_unencoded)
    theirs = from_spec(_load_spec(args.theirs), args.keep_unencoded)
    result = analysis.merge_versions(base, ours, theirs)
    if isinstance(result, analysis.ConflictReport):
        print(result.describe())
        return EXIT_CONFLICT
    _write(_dump_spec(to_spec(result)), args.out)
    return EXIT_OK


def _resolve_index(token: str, labels: list[str]) -> int:
    if token in labels:
        return labels.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise CliInputError(f"{token!r} is neither a filename nor an index")
    if not 0 <= idx < len(labels):
        raise CliInputError(f"index {idx} out of range")
    return idx


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def cmd_analyze(args) -> int:
    specs = _load_dir(args.directory)
    labels = [name for name, _ in specs]
    rels = [from_spec(s, args.keep_unencoded) for _, s in specs]
    w = _weights(args)

    if args.what == "genealogy":
        graph = analysis.genealogy(rels, tuple(args.ignore or ()))
        _write(graph.to_dot(labels), args.out)
        return EXIT_OK

    if len(rels) < 2:
        raise CliInputError("this analysis needs at least two parseable specs")

    if args.what == "matrix":
        m = analysis.distance_matrix(rels, w, labels)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label"] + labels)
        for i, label in enumerate(labels):
            writer.writerow([label] + [_fmt(v) for v in m.values[i]])
        _write(buf.getvalue(), args.out)
        return EXIT_OK

    if args.what == "embed":
        m = analysis.distance_matrix(rels, w, labels)
        emb = analysis.mds_embed(m, args.k)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label"] + [f"d{i}" for i in range(args.k)])
        for i, label in enumerate(labels):
            writer.writerow([label] + [_fmt(v) for v in emb.coords[i]])
        _write(buf.getvalue(), args.out)
        print(f"stress {_fmt(emb.stress)}", file=sys.stderr)
        return EXIT_OK

    if args.what == "sequence":
        start = _resolve_index(args.start, labels) if args.start else 0
        order = analysis.sequence(rels, w, start)
        _write("".join(labels[i] + "\n" for i in order), args.out)
        return EXIT_OK

    if args.what == "path":
        m = analysis.distance_matrix(rels, w, labels)
        src = _resolve_index(args.src, labels)
        dst = _resolve_index(args.dst, labels)
        path, total = analysis.shortest_path(m, src, dst)
        _write("".join(labels[i] + "\n" for i in path) + f"total {_fmt(total)}\n", args.out)
        return EXIT_OK

    if args.what == "nearest":
        query = from_spec(_load_spec(args.query), args.keep_unencoded)
        ranked = analysis.nearest(rels, query, w, args.top_k)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rank", "label", "distance"])
        for rank, (i, dist) in enumerate(ranked, start=1):
            writer.writerow([rank, labels[i], _fmt(dist)])
        _write(buf.getvalue(), args.out)
        return EXIT_OK

    raise CliInputError(f"unknown analysis {args.what!r}")


def cmd_bench(args) -> int:
    specs = _load_dir(args.directory)
    report = bench.bench_style_transfer(specs)
    lines = [
        f"total {report.total}",
        f"successes {report.successes}",
        f"rate {report.rate:.3f}",
    ]
    for name, cls in report.failures:
        lines.append(f"failure {name} {cls}")
    _write("".join(line + "\n" for line in lines), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(p, how=True):
    p.add_argument("--on", choices=("key", "all"), default="key",
                   help="join on inferred primary keys or on all shared columns")
    if how:
        p.add_argument("--how", choices=("left", "right", "merge"), default="merge",
                       help="conflict policy (style transfer: --how right)")
    p.add_argument("--auto-encoding", action=argparse.BooleanOptionalAction,
                   default=True, help="encode the indicator column on a free channel")
    p.add_argument("--keep-unencoded", action="store_true",
                   help="keep data columns no style property references")
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vizalg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("union", parents=[], help="full outer join of two specs")
    p.add_argument("left")
    p.add_argument("right")
    _add_common(p)
    p.set_defaults(func=cmd_union)

    p = sub.add_parser("union-many", help="left fold of union over a directory")
    p.add_argument("directory")
    _add_common(p)
    p.set_defaults(func=cmd_union_many)

    for name, func, blurb in (
        ("diff", cmd_diff, "anti-join both ways; rows tagged left/right"),
        ("intersect", cmd_intersect, "inner join; rows tagged both"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("left")
        p.add_argument("right")
        p.add_argument("--on", choices=("key", "all"), default="key")
        p.add_argument("--keep-unencoded", action="store_true")
        p.add_argument("--out", help="directory for data.csv/style.csv (default: .)")
        p.add_argument("--render-template", action="store_true",
                       help="also print one sentence per style change")
        p.set_defaults(func=func)

    p = sub.add_parser("merge", help="three-way version merge")
    p.add_argument("base")
    p.add_argument("ours")
    p.add_argument("theirs")
    p.add_argument("--keep-unencoded", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("analyze", help="corpus analyses over a directory of specs")
    what = p.add_subparsers(dest="what", required=True)
    for name, blurb in (
        ("matrix", "pairwise distance matrix as CSV"),
        ("embed", "2-D (or -k) embedding as CSV; stress on stderr"),
        ("genealogy", "strict-subset ancestry DAG as DOT"),
        ("sequence", "greedy nearest-neighbour ordering"),
        ("path", "cheapest chain between two specs"),
        ("nearest", "rank the corpus by distance to a query spec"),
    ):
        q = what.add_parser(name, help=blurb)
        q.add_argument("directory")
        q.add_argument("--weights", help="TOML file of category = weight pairs")
        q.add_argument("--keep-unencoded", action="store_true")
        q.add_argument("--out")
        if name == "genealogy":
            q.add_argument("--ignore", action="append", metavar="PATH_PREFIX",
                           help="style path prefix to disregard (repeatable)")
        if name == "embed":
            q.add_argument("-k", type=int, default=2, help="embedding dimension")
        if name == "sequence":
            q.add_argument("--start", help="start spec (filename or index)")
        if name == "path":
            q.add_argument("--src", required=True, help="source (filename or index)")
            q.add_argument("--dst", required=True, help="destination (filename or index)")
        if name == "nearest":
            q.add_argument("--query", required=True, help="query spec file")
            q.add_argument("--top-k", type=int, default=1)
        q.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench-style-transfer",
                       help="synthesize data and transfer each spec's style onto it")
    p.add_argument("directory")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VizAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPERATOR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

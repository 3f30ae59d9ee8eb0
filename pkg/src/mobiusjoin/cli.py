"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import applications
from .ct import CTError, read_ct, write_ct
from .database import DataError, load_database, write_database
from .mobius import mobius_join
from .oracle import DEFAULT_CAP, OracleCapExceeded, verify
from .schema import EntityNode, SchemaError, enumerate_chain_lattice, load_schema
from .synthetic import GeneratorConfig, generate, run_bench


def table_filename(node) -> str:
    if isinstance(node, EntityNode):
        return f"entity_{node.label}.csv"
    return f"chain_{node.label}.csv"


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load(args):
    schema = load_schema(args.schema)
    db = load_database(schema, args.data)
    lattice = enumerate_chain_lattice(schema, args.max_chain_length)
    return schema, db, lattice


def cmd_compute(args) -> int:
    _, db, lattice = _load(args)
    tables, report = mobius_join(
        db,
        lattice,
        link_analysis=args.link_analysis == "on",
        check=args.check,
        jobs=args.jobs,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for node, table in tables.items():
        write_ct(table, out / table_filename(node))
    doc = report.to_dict()
    timings = {"phase_times": doc.pop("phase_times")}
    _dump(doc, out / "report.json")
    _dump(timings, out / "timings.json")
    print(
        f"wrote {len(tables)} tables to {out} "
        f"({report.total_rows} chain statistics, {report.r} with a false relationship)"
    )
    return 0


def cmd_verify(args) -> int:
    _, db, lattice = _load(args)
    tables, _ = mobius_join(db, lattice, check=True)
    try:
        diffs = verify(db, lattice, tables, cap=args.cap)
    except OracleCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if diffs:
        label, diff = diffs[0]
        print(f"MISMATCH {label}: {diff}")
        return 1
    print(f"OK: {len(tables)} tables match the cross-product oracle")
    return 0


def cmd_bench(args) -> int:
    doc = json.loads(Path(args.generator).read_text(encoding="utf-8"))
    if "seed" not in doc:
        print("error: generator config needs a seed", file=sys.stderr)
        return 2
    result = run_bench(doc)
    _dump(result, Path(args.out))
    for p in result["points"]:
        print(f"{p['extra_statistics']:>10d} extra statistics  {p['extra_time']:.6f} s")
    if result["loglog_slope"] is not None:
        print(f"log-log slope: {result['loglog_slope']:.3f}")
    return 0


def cmd_generate(args) -> int:
    doc = json.loads(Path(args.generator).read_text(encoding="utf-8"))
    schema, db = generate(GeneratorConfig.from_dict(doc))
    out = Path(args.out)
    write_database(db, out)
    _dump(schema.to_dict(), out / "schema.json")
    print(f"wrote schema.json and {len(schema.populations) + len(schema.relationships)} tables to {out}")
    return 0


def cmd_rules(args) -> int:
    ct = read_ct(args.ct)
    rules = applications.mine_rules(ct, args.top_k, args.min_support, args.max_length)
    text = applications.rules_to_csv(rules)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_score(args) -> int:
    ct = read_ct(args.ct)
    structure = json.loads(Path(args.structure).read_text(encoding="utf-8"))
    print(f"{applications.score_loglikelihood(structure, ct):.6f}")
    return 0


def cmd_rank(args) -> int:
    ct = read_ct(args.ct)
    for var, mi in applications.rank_features(ct, args.target):
        print(f"{var}\t{mi:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobiusjoin",
        description="Contingency tables with positive and negative relationships.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--schema", required=True, help="schema JSON file")
        p.add_argument("--data", required=True, help="directory with one CSV per table")
        p.add_argument("--max-chain-length", type=int, default=None)

    p = sub.add_parser("compute", help="compute all lattice tables")
    data_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--link-analysis", choices=["on", "off"], default="on")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--check", action="store_true", help="re-check pivot identities")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="compare against the cross-product oracle")
    data_args(p)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="synthetic scaling study")
    p.add_argument("--generator", required=True, help="bench config JSON")
    p.add_argument("--out", required=True, help="result JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a synthetic instance")
    p.add_argument("--generator", required=True, help="generator config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rules", help="association rules ranked by lift")
    p.add_argument("--ct", required=True)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--min-support", type=float, default=0.1)
    p.add_argument("--max-length", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("score", help="log-likelihood of a given structure")
    p.add_argument("--ct", required=True)
    p.add_argument("--structure", required=True, help="JSON parent map")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="rank variables by mutual information with a target")
    p.add_argument("--ct", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_rank)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "max_chain_length", None) is not None and args.max_chain_length < 1:
        parser.print_usage(sys.stderr)
        print("error: --max-chain-length must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (SchemaError, DataError, CTError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command line: ``ground``, ``eval``, ``gen`` and ``bench``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .bench import BenchSpec, Instance, query_instances, run_bench
from .decompose import decompose, dump
from .engine import ConfigError, EngineConfig, Heuristic, Strategy, run
from .formula import LineageError, format_lineage, parse_lineage
from .grounding import GroundingError, answers, ground, load_tables, parse_query
from .oracle import OracleLimit, TooManyVariables, exact_prob
from .synthetic import EmptyInstance, gen_synthetic

STRATEGIES = {"mb": Strategy.MB, "sd": Strategy.SD, "pgd": Strategy.PGD, "hb": Strategy.HB}
HEURISTICS = {"freq": Heuristic.FREQUENCY, "infl": Heuristic.INFLUENCE}


class UsageError(Exception):
    pass


def _load_db(tables_dir: str, query):
    root = Path(tables_dir)
    if not root.is_dir():
        raise GroundingError(f"tables directory {tables_dir!r} not found")
    sources = []
    for atom in query.atoms:
        path = root / f"{atom.table}.csv"
        if not path.exists():
            raise GroundingError(f"missing table file for {atom.table!r}: {path}")
        if atom.table not in [name for name, _ in sources]:
            sources.append((atom.table, path.read_text(encoding="utf-8")))
    return load_tables(sources)


def cmd_ground(args) -> int:
    q = parse_query(args.query)
    db = _load_db(args.tables, q)
    vt, f = ground(q, db)
    text = format_lineage(vt, f)
    clauses = len({frozenset(a) for a in answers(q, db)})
    summary = f"variables={len(vt)} clauses={clauses}"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return 0


def _config(args, strategy=None, heuristic=None) -> EngineConfig:
    return EngineConfig(
        strategy=strategy or STRATEGIES[args.strategy],
        heuristic=heuristic or HEURISTICS[args.heuristic],
        gd_steps=args.gd_steps,
        step_size=args.step_size,
        eps_abs=args.eps_abs,
        eps_rel=args.eps_rel,
        timeout=math.inf if args.timeout_ms is None else args.timeout_ms / 1000.0,
        max_expansions=args.max_expansions,
        rng_seed=args.seed,
    )


def cmd_eval(args) -> int:
    vt, f = parse_lineage(Path(args.lineage).read_text(encoding="utf-8"))
    cfg = _config(args)
    exact = None
    if args.oracle:
        exact = exact_prob(f, vt.probs, OracleLimit(args.oracle_max_vars))
    if args.verbose:
        sys.stderr.write(dump(decompose(f, vt.probs)))
    trace = run(f, vt, cfg)
    print("elapsed_ms,lower,upper,expansions")
    for rec in trace.records:
        print(f"{int(rec.elapsed * 1000)},{rec.lower:.12g},{rec.upper:.12g},{rec.expansions}")
    if exact is not None:
        bad = [r for r in trace.records if not (r.lower - 1e-9 <= exact <= r.upper + 1e-9)]
        print(f"exact={exact:.12g}", file=sys.stderr)
        print(f"sound={'no' if bad else 'yes'}", file=sys.stderr)
        if bad:
            return 1
    return 0


def cmd_gen(args) -> int:
    vt, f = gen_synthetic(args.num_x, args.num_y, args.density, (args.prob_min, args.prob_max), args.seed)
    text = format_lineage(vt, f)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _csv_list(raw: str, table: dict, what: str) -> list:
    items = [s.strip().lower() for s in raw.split(",") if s.strip()]
    if not items:
        raise UsageError(f"empty {what} list")
    unknown = [s for s in items if s not in table]
    if unknown:
        raise UsageError(f"unknown {what}: {', '.join(unknown)}")
    return [table[s] for s in items]


def cmd_bench(args) -> int:
    strategies = _csv_list(args.strategies, STRATEGIES, "strategy")
    heuristics = _csv_list(args.heuristics, HEURISTICS, "heuristic")
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        raise UsageError("empty seed list")
    instances = []
    for path in args.lineage or []:
        vt, f = parse_lineage(Path(path).read_text(encoding="utf-8"))
        instances.append(Instance(Path(path).stem, vt, f))
    if args.query:
        if not args.tables:
            raise UsageError("--query needs --tables")
        q = parse_query(args.query)
        db = _load_db(args.tables, q)
        rescale = [None] + [int(s) for s in args.rescale_seeds.split(",") if s.strip()] if args.rescale_seeds else [None]
        orders = None if args.all_orders else [tuple(range(len(q.atoms)))]
        instances.extend(query_instances(q, db, orders, rescale))
    for i in range(args.synthetic):
        seed = args.synthetic_seed + i
        try:
            vt, f = gen_synthetic(args.num_x, args.num_y, args.density, (args.prob_min, args.prob_max), seed)
        except EmptyInstance as exc:
            logging.warning("%s", exc)
            continue
        instances.append(Instance(f"syn{seed}", vt, f))
    if not instances:
        raise UsageError("no instances given (use --lineage, --query or --synthetic)")
    spec = BenchSpec(
        instances,
        strategies,
        heuristics,
        seeds,
        args.repetitions,
        _config(args, strategy=Strategy.SD, heuristic=Heuristic.INFLUENCE),
        oracle=args.oracle,
        oracle_limit=OracleLimit(args.oracle_max_vars),
    )
    lines = run_bench(spec, workers=args.workers)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gd-steps", type=int, default=10)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--eps-abs", type=float, default=1e-9)
    p.add_argument("--eps-rel", type=float, default=0.0)
    p.add_argument("--timeout-ms", type=float, default=None)
    p.add_argument("--max-expansions", type=int, default=None)
    p.add_argument("--oracle-max-vars", type=int, default=25)


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num-x", type=int, default=3)
    p.add_argument("--num-y", type=int, default=3)
    p.add_argument("--density", type=float, default=0.6)
    p.add_argument("--prob-min", type=float, default=0.1)
    p.add_argument("--prob-max", type=float, default=0.9)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lineage-bounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground", help="ground a Boolean conjunctive query into a lineage file")
    p.add_argument("--query", required=True)
    p.add_argument("--tables", required=True, help="directory holding <Table>.csv files")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("eval", help="anytime bounds for a lineage file (CSV trace on stdout)")
    p.add_argument("--lineage", required=True)
    p.add_argument("--strategy", choices=sorted(STRATEGIES), default="sd")
    p.add_argument("--heuristic", choices=sorted(HEURISTICS), default="infl")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", action="store_true", help="also compute the exact value and check soundness")
    p.add_argument("--verbose", action="store_true", help="dump the initial decomposition tree to stderr")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="write a synthetic R(X),S(X,Y),T(Y) lineage")
    _add_gen_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run strategies x heuristics x seeds; CSV rows per trace record")
    p.add_argument("--lineage", action="append", help="lineage file (repeatable)")
    p.add_argument("--query")
    p.add_argument("--tables")
    p.add_argument("--all-orders", action="store_true", help="ground under every atom permutation")
    p.add_argument("--rescale-seeds", default="", help="comma-separated probability perturbation seeds")
    p.add_argument("--synthetic", type=int, default=0, help="number of synthetic instances")
    p.add_argument("--synthetic-seed", type=int, default=0)
    _add_gen_flags(p)
    p.add_argument("--strategies", default="mb,sd,pgd,hb")
    p.add_argument("--heuristics", default="freq,infl")
    p.add_argument("--seeds", default="0")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(seed=0, strategy="sd", heuristic="infl")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (LineageError, GroundingError, TooManyVariables, EmptyInstance, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

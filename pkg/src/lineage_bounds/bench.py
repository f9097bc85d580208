"""Benchmark runs: every (instance, strategy, heuristic, seed) produces one trace.

Rows are emitted in spec order regardless of how many workers run.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .engine import EngineConfig, Heuristic, Strategy, run
from .formula import Formula, VarTable
from .grounding import Database, Query, Row, Table, ground
from .oracle import OracleLimit, TooManyVariables, exact_prob

log = logging.getLogger(__name__)

HEADER = "instance,strategy,heuristic,seed,elapsed_ms,lower,upper,expansions,error"


@dataclass(frozen=True)
class Instance:
    name: str
    vt: VarTable
    formula: Formula


@dataclass
class BenchSpec:
    instances: List[Instance]
    strategies: Sequence[Strategy] = (Strategy.MB, Strategy.SD, Strategy.PGD, Strategy.HB)
    heuristics: Sequence[Heuristic] = (Heuristic.FREQUENCY, Heuristic.INFLUENCE)
    seeds: Sequence[int] = (0,)
    repetitions: int = 1
    base: EngineConfig = field(default_factory=lambda: EngineConfig(eps_abs=1e-6))
    oracle: bool = True
    oracle_limit: OracleLimit = OracleLimit()

    def __post_init__(self):
        if not self.instances:
            raise ValueError("bench needs at least one instance")
        if not self.strategies:
            raise ValueError("bench needs at least one strategy")
        if not self.heuristics:
            raise ValueError("bench needs at least one heuristic")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def rescale(db: Database, seed: int) -> Database:
    """Perturb every tuple probability by a seeded factor in [0.5, 1.5], clipped to [0.01, 0.99]."""
    rng = np.random.default_rng(seed)
    tables = {}
    for name, t in db.tables.items():
        factors = rng.uniform(0.5, 1.5, len(t.rows))
        rows = tuple(
            Row(r.key, r.values, float(np.clip(round(r.p * f, 4), 0.01, 0.99))) for r, f in zip(t.rows, factors)
        )
        tables[name] = Table(t.name, t.schema, rows)
    return Database(tables)


def query_instances(
    q: Query, db: Database, orders: Optional[Sequence[Sequence[int]]] = None, rescale_seeds: Sequence[Optional[int]] = (None,)
) -> List[Instance]:
    """Lineages of one query under several join orders and probability perturbations."""
    if orders is None:
        orders = list(itertools.permutations(range(len(q.atoms))))
    out = []
    for s in rescale_seeds:
        data = db if s is None else rescale(db, s)
        for order in orders:
            vt, f = ground(q.permuted(order), data)
            tag = "".join(map(str, order))
            out.append(Instance(f"q-o{tag}" + ("" if s is None else f"-r{s}"), vt, f))
    return out


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _run_one(task) -> List[str]:
    inst, cfg, exact = task
    trace = run(inst.formula, inst.vt, cfg)
    rows = []
    for rec in trace.records:
        half = (rec.upper - rec.lower) / 2
        if exact is None:
            err = half
        else:
            err = max(abs((rec.upper + rec.lower) / 2 - exact), half)
        rows.append(
            ",".join([
                inst.name,
                cfg.strategy.value,
                cfg.heuristic.value,
                str(cfg.rng_seed),
                str(int(rec.elapsed * 1000)),
                _fmt(rec.lower),
                _fmt(rec.upper),
                str(rec.expansions),
                _fmt(err),
            ])
        )
    return rows


def tasks(spec: BenchSpec) -> list:
    exacts = []
    for inst in spec.instances:
        exact = None
        if spec.oracle:
            try:
                exact = exact_prob(inst.formula, inst.vt.probs, spec.oracle_limit)
            except TooManyVariables as exc:
                log.warning("instance %s: %s; error column falls back to half the gap", inst.name, exc)
        exacts.append(exact)
    out = []
    for inst, exact in zip(spec.instances, exacts):
        for strat, heur, seed in itertools.product(spec.strategies, spec.heuristics, spec.seeds):
            cfg = replace(spec.base, strategy=Strategy(strat), heuristic=Heuristic(heur), rng_seed=seed)
            out.extend([(inst, cfg, exact)] * spec.repetitions)
    return out


def run_bench(spec: BenchSpec, workers: int = 1) -> List[str]:
    """CSV lines (header first) for every trace record of every run."""
    work = tasks(spec)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_one, work))
    else:
        chunks = [_run_one(t) for t in work]
    return [HEADER] + [row for chunk in chunks for row in chunk]


def strip_elapsed(lines: Sequence[str]) -> List[str]:
    """Drop the wall-clock column so outputs from identical seeds compare equal."""
    col = HEADER.split(",").index("elapsed_ms")
    out = []
    for line in lines:
        parts = line.split(",")
        del parts[col]
        out.append(",".join(parts))
    return out

import logging
from collections import defaultdict

import pytest

from conftest import SYM_UPPER, TABLES
from lineage_bounds.bench import HEADER, BenchSpec, Instance, query_instances, rescale, run_bench, strip_elapsed
from lineage_bounds.engine import EngineConfig, Heuristic, Strategy
from lineage_bounds.formula import Var, VarTable, conj, disj
from lineage_bounds.grounding import load_tables, parse_query
from lineage_bounds.oracle import OracleLimit
from lineage_bounds.synthetic import gen_synthetic


def _parse(lines):
    cols = HEADER.split(",")
    return [dict(zip(cols, line.split(","))) for line in lines[1:]]


def test_running_example_groups_and_dominance(running):
    vt, f = running
    spec = BenchSpec([Instance("running", vt, f)], heuristics=[Heuristic.FREQUENCY], seeds=[0, 1, 2])
    rows = _parse(run_bench(spec))
    groups = defaultdict(list)
    for r in rows:
        groups[(r["strategy"], r["seed"])].append(r)
    assert {s for s, _ in groups} == {"MB", "SD", "PGD", "HB"}
    for (strategy, _), recs in groups.items():
        step0 = float(recs[0]["upper"])
        if strategy == "MB":
            assert step0 >= SYM_UPPER - 1e-12
        else:
            assert step0 == pytest.approx(SYM_UPPER, abs=1e-12)
        for a, b in zip(recs, recs[1:]):
            assert float(a["lower"]) <= float(b["lower"]) and float(a["upper"]) >= float(b["upper"])
        assert all(float(r["lower"]) <= float(r["upper"]) for r in recs)
        assert float(recs[-1]["error"]) < 1e-6


def test_identical_seeds_identical_csv():
    instances = [Instance(f"syn{s}", *gen_synthetic(3, 3, 0.7, seed=s)) for s in range(3)]
    spec = BenchSpec(instances, seeds=[0, 7], base=EngineConfig(eps_abs=1e-3, gd_steps=3))
    a = strip_elapsed(run_bench(spec))
    b = strip_elapsed(run_bench(spec, workers=2))
    assert a == b
    assert "elapsed_ms" not in a[0]


def test_large_instance_warns_and_uses_gap(caplog):
    names = [f"v{i}" for i in range(8)]
    vt = VarTable(dict.fromkeys(names, 0.5))
    f = disj(*(conj(Var(names[i]), Var(names[(i + 1) % 8])) for i in range(8)))
    spec = BenchSpec([Instance("big", vt, f)], strategies=[Strategy.SD], heuristics=[Heuristic.FREQUENCY],
                     base=EngineConfig(max_expansions=0), oracle_limit=OracleLimit(max_vars=5))
    with caplog.at_level(logging.WARNING):
        rows = _parse(run_bench(spec))
    assert "big" in caplog.text
    (row,) = rows
    assert float(row["error"]) == pytest.approx((float(row["upper"]) - float(row["lower"])) / 2)


def test_spec_validation(running):
    vt, f = running
    with pytest.raises(ValueError):
        BenchSpec([])
    with pytest.raises(ValueError):
        BenchSpec([Instance("x", vt, f)], strategies=[])


def test_query_instances_orders_and_rescale():
    db = load_tables(TABLES.items())
    insts = query_instances(parse_query("Q :- R(X), S(X,Y), T(Y)"), db, rescale_seeds=(None, 1))
    assert len(insts) == 12
    assert len({i.name for i in insts}) == 12
    scaled = rescale(db, 1)
    assert all(0.01 <= r.p <= 0.99 for t in scaled.tables.values() for r in t.rows)
    assert rescale(db, 1) == scaled

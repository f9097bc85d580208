import itertools
import random

import pytest
from pytest import approx

from conftest import EXACT, TABLES, dnf
from lineage_bounds.formula import FALSE, Var, disj
from lineage_bounds.grounding import (
    Database,
    GroundingError,
    Row,
    Table,
    Variable,
    answers,
    ground,
    load_tables,
    parse_query,
)
from lineage_bounds.oracle import exact_prob


@pytest.fixture
def db():
    return load_tables(TABLES.items())


def test_load_table_generates_ids(db):
    r = db.tables["R"]
    assert [(row.key, row.values, row.p) for row in r.rows] == [("r1", ("a",), 0.5), ("r2", ("b",), 0.6)]
    assert r.schema == ("X",)


def test_load_explicit_ids_and_empty():
    db = load_tables([("A", "_id,X,_p\nfoo,1,0.2\n"), ("E", "X,_p\n")])
    assert db.tables["A"].rows[0].key == "foo"
    assert db.tables["E"].rows == ()


@pytest.mark.parametrize(
    "text",
    ["X,_p\na,1.2\n", "X,p\na,0.5\n", "_id,X,_p\nk,a,0.1\nk,b,0.2\n", "X,_p\na,b,0.5\n", "X,_p\na,zz\n", ""],
)
def test_load_errors(text):
    with pytest.raises(GroundingError):
        load_tables([("R", text)])


def test_parse_query():
    q = parse_query("Q :- R(X), S(X,Y), T(Y)")
    assert [a.table for a in q.atoms] == ["R", "S", "T"]
    assert q.variables == {"X", "Y"}
    assert len(parse_query("Q :- R(X)").atoms) == 1
    q = parse_query("Q :- S(X,'d')")
    assert q.atoms[0].args == (Variable("X"), "d")


@pytest.mark.parametrize("text", ["R(X)", "Q :- ", "Q :- R(X) S(Y)", "Q :- R()", "Q :- R(X),"])
def test_parse_query_errors(text):
    with pytest.raises(GroundingError):
        parse_query(text)


def test_ground_running_example(db):
    vt, f = ground(parse_query("Q :- R(X), S(X,Y), T(Y)"), db)
    assert len(vt) == 7
    assert dnf(f) == {frozenset(c) for c in [("r1", "s1", "t1"), ("r1", "s2", "t2"), ("r2", "s3", "t2")]}
    assert exact_prob(f, vt.probs) == approx(EXACT, abs=1e-12)
    assert vt.provenance["s3"] == ("S", "s3")


def test_ground_single_atom_and_constants(db):
    _, f = ground(parse_query("Q :- R(X)"), db)
    assert f == disj(Var("r1"), Var("r2"))
    _, f = ground(parse_query("Q :- S(X,'d'), T('d')"), db)
    assert dnf(f) == {frozenset({"s2", "t2"}), frozenset({"s3", "t2"})}


def test_ground_no_match(db):
    vt, f = ground(parse_query("Q :- R(X), S(X,'zzz')"), db)
    assert f == FALSE and len(vt) == 0


def test_ground_errors(db):
    with pytest.raises(GroundingError):
        ground(parse_query("Q :- U(X)"), db)
    with pytest.raises(GroundingError):
        ground(parse_query("Q :- R(X,Y)"), db)


def _random_db(rng):
    def table(name, arity, n):
        dom = "abc"
        rows = tuple(
            Row(f"{name.lower()}{i + 1}", tuple(rng.choice(dom) for _ in range(arity)), round(rng.uniform(0.1, 0.9), 2))
            for i in range(n)
        )
        return Table(name, tuple(f"A{j}" for j in range(arity)), rows)

    return Database({"R": table("R", 1, 3), "S": table("S", 2, 5), "T": table("T", 1, 3)})


def test_join_orders_agree_and_match_nested_loops():
    rng = random.Random(11)
    q = parse_query("Q :- R(X), S(X,Y), T(Y)")
    for _ in range(30):
        db = _random_db(rng)
        expected = {frozenset(a) for a in answers(q, db)}
        values = []
        for order in itertools.permutations(range(3)):
            vt, f = ground(q.permuted(order), db)
            assert dnf(f) == expected
            values.append(exact_prob(f, vt.probs))
        assert max(values) - min(values) <= 1e-12


def test_repeated_variable_in_atom():
    db = load_tables([("S", "X,Y,_p\na,a,0.5\na,b,0.5\n")])
    _, f = ground(parse_query("Q :- S(X,X)"), db)
    assert f == Var("s1")

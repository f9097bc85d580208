import itertools
import random

import hypothesis.strategies as st
import pytest

from lineage_bounds.formula import And, Or, Var, VarTable, parse_lineage, simplify

RUNNING_EXAMPLE = """\
# R(X), S(X,Y), T(Y) over the toy database
var r1 0.5
var r2 0.6
var s1 0.3
var s2 0.4
var s3 0.5
var t1 0.4
var t2 0.8
formula (or (and r1 (or (and s1 t1) (and s2 t2))) (and r2 s3 t2))
"""

TABLES = {
    "R": "X,_p\na,0.5\nb,0.6\n",
    "S": "X,Y,_p\na,c,0.3\na,d,0.4\nb,d,0.5\n",
    "T": "Y,_p\nc,0.4\nd,0.8\n",
}

# frozen values, each computed by hand expansion / enumeration (see test docstrings)
EXACT = 0.38416
COND_T2_TRUE = 0.4652
COND_T2_FALSE = 0.06
SYM_UPPER = 0.392608
MB_UPPERS = (0.41936, 0.44056)
MB_LOWERS = (0.2008, 0.2856)
SYM_LOWER = 0.29704192894581  # 1 - sqrt(0.2) on both copies
FRONTIER_OPT = 0.30434045873906  # grid search, resolution 1e-4
FRONTIER_OPT_PROBS = (0.3900, 0.6721)


@pytest.fixture
def running():
    return parse_lineage(RUNNING_EXAMPLE)


@pytest.fixture
def tables_dir(tmp_path):
    d = tmp_path / "tables"
    d.mkdir()
    for name, text in TABLES.items():
        (d / f"{name}.csv").write_text(text)
    return d


def dnf(f):
    """Clause set of the naive DNF expansion (no absorption)."""
    if isinstance(f, Var):
        return {frozenset([f.name])}
    if isinstance(f, Or):
        return set().union(*(dnf(c) for c in f.children))
    if isinstance(f, And):
        out = {frozenset()}
        for c in f.children:
            out = {a | b for a in out for b in dnf(c)}
        return out
    return {frozenset()} if f.value else set()


def random_formula(rng: random.Random, n_vars: int = 8, depth: int = 3, max_children: int = 3):
    names = [f"v{i}" for i in range(n_vars)]

    def build(d):
        if d == 0 or rng.random() < 0.25:
            return Var(rng.choice(names))
        kind = rng.choice([And, Or])
        return kind(tuple(build(d - 1) for _ in range(rng.randint(2, max_children))))

    f = simplify(build(depth))
    probs = {v: round(rng.uniform(0.05, 0.95), 3) for v in names}
    return VarTable(probs), f


def random_dnf(rng: random.Random, n_vars: int = 10, n_clauses: int = 6, width: int = 3):
    """Lineage-shaped DNF: clauses drawn from a small pool, so variables repeat a lot."""
    names = [f"v{i}" for i in range(n_vars)]
    clauses = [And(tuple(Var(v) for v in rng.sample(names, rng.randint(min(2, n_vars), min(width, n_vars))))) for _ in range(n_clauses)]
    f = simplify(Or(tuple(clauses)))
    probs = {v: round(rng.uniform(0.05, 0.95), 3) for v in names}
    return VarTable(probs), f


def random_read_once(rng: random.Random, n_vars: int = 10):
    names = [f"v{i}" for i in range(n_vars)]
    rng.shuffle(names)

    def build(items, kind):
        if len(items) == 1:
            return Var(items[0])
        k = rng.randint(2, min(4, len(items)))
        cuts = sorted(rng.sample(range(1, len(items)), k - 1))
        parts = [items[a:b] for a, b in zip([0] + cuts, cuts + [len(items)])]
        other = Or if kind is And else And
        return kind(tuple(build(p, other) for p in parts))

    f = simplify(build(names, rng.choice([And, Or])))
    probs = {v: round(rng.uniform(0.01, 0.99), 3) for v in names}
    return VarTable(probs), f


def brute_force(f, probs):
    """Plain Python world enumeration, independent of the numpy oracle."""
    from lineage_bounds.formula import evaluate, variables

    names = sorted(variables(f))
    total = 0.0
    for bits in itertools.product([False, True], repeat=len(names)):
        world = dict(zip(names, bits))
        if evaluate(f, world):
            w = 1.0
            for n, b in world.items():
                w *= probs[n] if b else 1 - probs[n]
            total += w
    return total


@st.composite
def formulas(draw, n_vars=6, depth=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_formula(random.Random(seed), n_vars=draw(st.integers(2, n_vars)), depth=depth)


@st.composite
def read_once_formulas(draw, n_vars=10):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_read_once(random.Random(seed), n_vars=draw(st.integers(1, n_vars)))

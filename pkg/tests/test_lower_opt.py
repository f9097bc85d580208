import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from conftest import EXACT, FRONTIER_OPT, MB_LOWERS, SYM_LOWER, random_formula
from lineage_bounds.dissociation import Context, CopyMap, MixedContext, dissociate
from lineage_bounds.formula import Var, disj, shared_variables
from lineage_bounds.lower_opt import hybrid_lower, pgd_lower, project_simplex
from lineage_bounds.oracle import exact_prob, grid_optimal_lower


def test_project_simplex_examples():
    assert project_simplex([0.6, 0.6]) == approx([0.5, 0.5])
    assert project_simplex([1.2, -0.2]) == approx([1.0, 0.0])
    assert project_simplex([0.5, 0.5]) == approx([0.5, 0.5])
    with pytest.raises(ValueError):
        project_simplex([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8), st.integers(0, 2**31))
def test_projection_is_nearest_simplex_point(v, seed):
    p = project_simplex(v)
    assert np.all(p >= 0) and p.sum() == approx(1.0, abs=1e-12)
    d = np.sum((p - np.asarray(v)) ** 2)
    rng = np.random.default_rng(seed)
    for q in rng.dirichlet(np.ones(len(v)), size=20):
        assert d <= np.sum((q - np.asarray(v)) ** 2) + 1e-12


def test_pgd_running_example(running):
    vt, f = running
    fd, cm = dissociate(f)
    assert pgd_lower(fd, cm, vt.probs, steps=0).bound == approx(SYM_LOWER, abs=1e-12)
    ten = pgd_lower(fd, cm, vt.probs, steps=10, step_size=0.1)
    assert SYM_LOWER - 1e-12 <= ten.bound <= FRONTIER_OPT + 1e-9
    assert ten.steps_taken == 10 and len(ten.trace) == 11
    long = pgd_lower(fd, cm, vt.probs, steps=500)
    assert long.bound == approx(FRONTIER_OPT, abs=1e-6)
    assert long.point.probs["t2#1"] == approx(0.3900, abs=2e-3)
    assert long.point.probs["t2#2"] == approx(0.6721, abs=2e-3)


def test_pgd_trace_monotone_and_on_frontier(running):
    vt, f = running
    fd, cm = dissociate(f)
    prev = -1.0
    for steps in range(0, 30):
        res = pgd_lower(fd, cm, vt.probs, steps=steps)
        bounds = [b for _, b in res.trace]
        assert all(a <= b for a, b in zip(bounds, bounds[1:]))
        assert res.bound >= prev - 1e-15
        prev = res.bound
        q = res.point.probs
        assert (1 - q["t2#1"]) * (1 - q["t2#2"]) == approx(0.2, abs=1e-12)
        assert np.sum(res.point.weights["t2"]) == approx(1.0, abs=1e-12)


def test_pgd_singleton_group_is_plain_evaluation():
    f = disj(Var("a"), Var("x#1"))
    cm = CopyMap({"x": ["x#1"]}, {"x": Context.DISJUNCTIVE})
    res = pgd_lower(f, cm, {"a": 0.3, "x": 0.5}, steps=5)
    assert res.bound == approx(1 - 0.7 * 0.5)


def test_pgd_preconditions(running):
    vt, f = running
    fd, cm = dissociate(f)
    with pytest.raises(ValueError):
        pgd_lower(fd, cm, dict(vt.probs, t2=1.0))
    with pytest.raises(ValueError):
        pgd_lower(fd, cm, vt.probs, steps=-1)
    with pytest.raises(ValueError):
        pgd_lower(fd, cm, vt.probs, step_size=0)
    conj_cm = CopyMap(cm.groups, {"t2": Context.CONJUNCTIVE})
    with pytest.raises(MixedContext):
        pgd_lower(fd, conj_cm, vt.probs)


def test_hybrid_running_example(running):
    vt, f = running
    fd, cm = dissociate(f)
    res = hybrid_lower(fd, cm, vt.probs, steps=10)
    # gradient at the symmetric point favours the second copy; its corner (0.2856) loses to the start
    assert res.influences["t2#1"] == approx(0.146813, abs=1e-6)
    assert res.influences["t2#2"] == approx(0.252813, abs=1e-6)
    assert res.bound == approx(SYM_LOWER, abs=1e-12)
    assert hybrid_lower(fd, cm, vt.probs, steps=0).bound == approx(SYM_LOWER, abs=1e-12)
    assert max(MB_LOWERS) < res.bound < EXACT


def test_hybrid_tie_breaks_to_lower_index():
    # symmetric formula: both copies have identical gradients
    f = disj(Var("x#1"), Var("x#2"))
    cm = CopyMap({"x": ["x#1", "x#2"]}, {"x": Context.DISJUNCTIVE})
    res = hybrid_lower(f, cm, {"x": 0.5}, steps=1)
    assert res.trace[1][1] == approx(0.5)
    # the symmetric start gives the same value on x1 | x2, so best-of keeps it
    assert res.bound == approx(0.5)


def _single_group_corpus(n, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        vt, f = random_formula(rng, n_vars=rng.randint(3, 8), depth=rng.randint(2, 4))
        if len(shared_variables(f)) != 1:
            continue
        fd, cm = dissociate(f)
        (v,) = cm.groups
        if cm.context[v] is Context.DISJUNCTIVE and len(cm.groups[v]) <= 3:
            out.append((vt, f, fd, cm))
    return out


def test_pgd_converges_to_grid_optimum():
    for vt, f, fd, cm in _single_group_corpus(25, seed=4):
        k = len(next(iter(cm.groups.values())))
        _, grid = grid_optimal_lower(fd, cm, vt.probs, 1e-3 if k == 2 else 1e-2)
        # gradients here can be ~1e-3, so a fixed 0.1 step crawls; backtracking keeps a big step safe
        res = pgd_lower(fd, cm, vt.probs, steps=500, step_size=5.0)
        assert res.bound >= grid - 1e-4
        assert res.bound <= exact_prob(f, vt.probs) + 1e-12


def test_pgd_and_hybrid_are_valid_and_beat_symmetric():
    rng = random.Random(8)
    done = 0
    while done < 150:
        vt, f = random_formula(rng, n_vars=rng.randint(3, 10), depth=rng.randint(2, 4))
        if not shared_variables(f):
            continue
        fd, cm = dissociate(f)
        if set(cm.context.values()) != {Context.DISJUNCTIVE}:
            continue
        done += 1
        exact = exact_prob(f, vt.probs)
        sym = pgd_lower(fd, cm, vt.probs, steps=0).bound
        prev = sym
        for steps in (1, 5, 10):
            res = pgd_lower(fd, cm, vt.probs, steps=steps)
            assert prev - 1e-15 <= res.bound <= exact + 1e-12
            prev = res.bound
            for v, copies in cm.groups.items():
                prod = math.prod(1 - res.point.probs[c] for c in copies)
                assert prod == approx(1 - vt[v], abs=1e-12)
        hb = hybrid_lower(fd, cm, vt.probs, steps=10)
        assert sym - 1e-15 <= hb.bound <= exact + 1e-12

"""Seeded synthetic instances of the chain query R(X), S(X,Y), T(Y)."""
from __future__ import annotations

from typing import Tuple

import numpy as np

from .formula import FALSE, Formula, VarTable
from .grounding import Database, Row, Table, ground, parse_query

CHAIN_QUERY = "Q :- R(X), S(X,Y), T(Y)"


class EmptyInstance(ValueError):
    pass


def synthetic_database(num_x: int, num_y: int, density: float, prob_range=(0.1, 0.9), seed: int = 0) -> Database:
    """Random tables for the chain query.

    All random draws happen in a fixed order and do not depend on
    ``density``: a pair (x, y) is kept in S iff its uniform draw is below
    ``density``.  Lowering the density therefore only removes S tuples.
    """
    if num_x < 1 or num_y < 1:
        raise ValueError("num_x and num_y must be >= 1")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    lo, hi = prob_range
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError("prob_range must satisfy 0 <= lo <= hi <= 1")
    rng = np.random.default_rng(seed)
    pr = np.round(rng.uniform(lo, hi, num_x), 4)
    pt = np.round(rng.uniform(lo, hi, num_y), 4)
    ps = np.round(rng.uniform(lo, hi, (num_x, num_y)), 4)
    keep = rng.random((num_x, num_y)) < density

    r_rows = tuple(Row(f"r{i + 1}", (f"x{i + 1}",), float(pr[i])) for i in range(num_x))
    t_rows = tuple(Row(f"t{j + 1}", (f"y{j + 1}",), float(pt[j])) for j in range(num_y))
    s_rows = tuple(
        Row(f"s{i * num_y + j + 1}", (f"x{i + 1}", f"y{j + 1}"), float(ps[i, j]))
        for i in range(num_x)
        for j in range(num_y)
        if keep[i, j]
    )
    return Database({
        "R": Table("R", ("X",), r_rows),
        "S": Table("S", ("X", "Y"), s_rows),
        "T": Table("T", ("Y",), t_rows),
    })


def gen_synthetic(num_x: int, num_y: int, density: float, prob_range=(0.1, 0.9), seed: int = 0) -> Tuple[VarTable, Formula]:
    db = synthetic_database(num_x, num_y, density, prob_range, seed)
    vt, f = ground(parse_query(CHAIN_QUERY), db)
    if f == FALSE:
        raise EmptyInstance(f"seed {seed} produced an empty lineage; retry with another seed")
    return vt, f

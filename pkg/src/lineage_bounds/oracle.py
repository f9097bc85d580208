"""Ground-truth engines used by the tests and the ``--oracle`` CLI flag.

``exact_prob`` enumerates all worlds (vectorised over blocks of the truth
table); ``exact_prob_shannon`` recurses on cofactors.  The two share nothing
but the formula representation, so they can check each other.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Tuple

import numpy as np

from .formula import FALSE, TRUE, And, Const, Formula, Var, condition, leaves, variables

_BLOCK_BITS = 16


class TooManyVariables(ValueError):
    pass


@dataclass(frozen=True)
class OracleLimit:
    max_vars: int = 25

    def __post_init__(self):
        if self.max_vars < 1:
            raise ValueError("max_vars must be >= 1")


def _check(f: Formula, limit: OracleLimit) -> list:
    names = sorted(variables(f))
    if len(names) > limit.max_vars:
        raise TooManyVariables(f"{len(names)} variables exceed oracle limit {limit.max_vars}")
    return names


def _truth(f: Formula, cols: Mapping[str, np.ndarray], n: int) -> np.ndarray:
    if isinstance(f, Var):
        return cols[f.name]
    if isinstance(f, Const):
        return np.full(n, f.value)
    parts = [_truth(c, cols, n) for c in f.children]
    if isinstance(f, And):
        return np.logical_and.reduce(parts)
    return np.logical_or.reduce(parts)


def exact_prob(f: Formula, probs: Mapping[str, float], limit: OracleLimit = OracleLimit()) -> float:
    """Sum of world weights over all satisfying assignments."""
    names = _check(f, limit)
    n = len(names)
    low = names[: min(n, _BLOCK_BITS)]
    high = names[len(low):]
    size = 1 << len(low)
    idx = np.arange(size, dtype=np.int64)
    cols = {}
    weights = np.ones(size)
    for bit, name in enumerate(low):
        on = ((idx >> bit) & 1).astype(bool)
        cols[name] = on
        p = float(probs[name])
        weights *= np.where(on, p, 1.0 - p)

    total = 0.0
    for block in range(1 << len(high)):
        scale = 1.0
        for bit, name in enumerate(high):
            on = bool((block >> bit) & 1)
            cols[name] = np.full(size, on)
            p = float(probs[name])
            scale *= p if on else 1.0 - p
        if scale == 0.0:
            continue
        sat = _truth(f, cols, size)
        total += scale * float(weights[sat].sum())
    return total


def exact_prob_shannon(f: Formula, probs: Mapping[str, float], limit: OracleLimit = OracleLimit()) -> float:
    """Exact probability by repeated Shannon expansion on the first leaf variable."""
    _check(f, limit)

    @lru_cache(maxsize=None)
    def rec(g: Formula) -> float:
        if g == TRUE:
            return 1.0
        if g == FALSE:
            return 0.0
        v = next(leaves(g))
        p = probs[v]
        return p * rec(condition(g, v, True)) + (1.0 - p) * rec(condition(g, v, False))

    return rec(f)


def frontier_probs(p: float, weights) -> np.ndarray:
    """Copy probabilities ``1 - (1-p)**w`` for simplex weights ``w``."""
    return 1.0 - np.power(1.0 - p, np.asarray(weights, dtype=float))


def grid_optimal_lower(fd: Formula, cm, probs: Mapping[str, float], resolution: float) -> Tuple[dict, float]:
    """Best lower bound on a regular grid over the frontier of a single group.

    Returns ``(copy probabilities, bound)``.  Brute force: every weight
    vector with coordinates on multiples of ``resolution`` is evaluated.
    """
    from .dissociation import Context, MixedContext
    from .formula import eval_read_once

    if not 0 < resolution <= 0.5:
        raise ValueError("resolution must lie in (0, 0.5]")
    if len(cm.groups) != 1:
        raise ValueError("grid oracle supports exactly one dissociated group")
    (orig, copies), = cm.groups.items()
    if cm.context[orig] is not Context.DISJUNCTIVE:
        raise MixedContext(orig)
    p = probs[orig]
    if not 0.0 < p < 1.0:
        raise ValueError(f"group {orig} has degenerate probability {p}")

    steps = int(round(1.0 / resolution))
    k = len(copies)
    view = dict(probs)
    best = (None, -1.0)
    for counts in _compositions(steps, k):
        w = np.array(counts, dtype=float) / steps
        q = frontier_probs(p, w)
        view.update(zip(copies, q.tolist()))
        val = eval_read_once(fd, view)
        if val > best[1]:
            best = (dict(zip(copies, q.tolist())), val)
    return best


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest

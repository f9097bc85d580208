"""Searching the frontier of optimal oblivious lower bounds.

For a disjunctively dissociated variable with probability ``p`` and ``k``
copies, every copy assignment with ``prod(1 - q_i) == 1 - p`` is an optimal
oblivious lower bound.  Writing ``q_i = 1 - (1-p)**w_i`` turns that curved
frontier into the unit simplex over ``w``, so projected gradient ascent on
``w`` stays feasible after a Euclidean simplex projection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .dissociation import Context, CopyMap, MixedContext
from .formula import Formula, eval_read_once
from .influence import leaf_influences

DEFAULT_STEPS = 10
DEFAULT_STEP_SIZE = 0.1
BACKTRACK = 0.5
MAX_HALVINGS = 5


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) == 1}`` (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


@dataclass
class FrontierPoint:
    weights: Dict[str, np.ndarray]
    probs: Dict[str, float]


@dataclass
class OptResult:
    point: FrontierPoint
    bound: float
    steps_taken: int
    trace: List[Tuple[int, float]] = field(default_factory=list)
    # influences at the returned point, keyed by copy; reused for variable selection
    influences: Optional[Dict[str, float]] = None


class _Problem:
    """Shared bookkeeping for the two lower-bound searches."""

    def __init__(self, fd: Formula, cm: CopyMap, probs: Mapping[str, float], fixed: Optional[Mapping[str, float]]):
        self.fd = fd
        self.groups: Dict[str, List[str]] = {}
        self.base = dict(probs)
        fixed = dict(fixed or {})
        for v, copies in cm.groups.items():
            if len(copies) < 2:
                continue
            if cm.context[v] is not Context.DISJUNCTIVE:
                if not all(c in fixed for c in copies):
                    raise MixedContext(v)
                continue
            p = probs[v]
            if not 0.0 < p < 1.0:
                raise ValueError(f"group {v!r} has degenerate probability {p}; condition it away first")
            self.groups[v] = copies
        for v, copies in cm.groups.items():
            if len(copies) < 2:
                self.base.update(dict.fromkeys(copies, probs[v]))
        self.base.update(fixed)
        self.log_miss = {v: -math.log1p(-probs[v]) for v in self.groups}
        self.p = {v: probs[v] for v in self.groups}

    def copy_probs(self, weights: Mapping[str, np.ndarray]) -> Dict[str, float]:
        out = {}
        for v, copies in self.groups.items():
            q = -np.expm1(-self.log_miss[v] * weights[v])
            out.update(zip(copies, q.tolist()))
        return out

    def view(self, weights) -> Dict[str, float]:
        view = dict(self.base)
        view.update(self.copy_probs(weights))
        return view

    def value(self, weights) -> float:
        return eval_read_once(self.fd, self.view(weights))

    def gradient(self, weights) -> Tuple[Dict[str, np.ndarray], Dict[str, float]]:
        view = self.view(weights)
        infl = leaf_influences(self.fd, view)
        grad = {}
        for v, copies in self.groups.items():
            grad[v] = np.array([infl[c] * (1.0 - view[c]) * self.log_miss[v] for c in copies])
        return grad, infl

    def barycenter(self) -> Dict[str, np.ndarray]:
        return {v: np.full(len(cs), 1.0 / len(cs)) for v, cs in self.groups.items()}

    def point(self, weights) -> FrontierPoint:
        return FrontierPoint({v: w.copy() for v, w in weights.items()}, self.copy_probs(weights))


def pgd_lower(
    fd: Formula,
    cm: CopyMap,
    probs: Mapping[str, float],
    steps: int = DEFAULT_STEPS,
    step_size: float = DEFAULT_STEP_SIZE,
    fixed: Optional[Mapping[str, float]] = None,
) -> OptResult:
    """Projected gradient ascent on the lower dissociation bound.

    Starts from the symmetric lower bound.  A step is kept only if it does
    not lower the bound; otherwise the step size is halved (at most
    ``MAX_HALVINGS`` times).  Non-disjunctive groups must be given in
    ``fixed`` with already-valid lower-bound probabilities.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if step_size <= 0:
        raise ValueError("step_size must be > 0")
    prob = _Problem(fd, cm, probs, fixed)
    w = prob.barycenter()
    best = prob.value(w)
    trace = [(0, best)]
    infl = None
    taken = 0
    for step in range(1, steps + 1):
        if not prob.groups:
            break
        grad, infl = prob.gradient(w)
        eta = step_size
        for _ in range(MAX_HALVINGS + 1):
            cand = {v: project_simplex(w[v] + eta * grad[v]) for v in w}
            val = prob.value(cand)
            if val >= best:
                w, best = cand, val
                infl = None
                break
            eta *= BACKTRACK
        taken = step
        trace.append((step, best))
    if infl is None and prob.groups:
        infl = prob.gradient(w)[1]
    return OptResult(prob.point(w), best, taken, trace, infl)


def hybrid_lower(
    fd: Formula,
    cm: CopyMap,
    probs: Mapping[str, float],
    steps: int = DEFAULT_STEPS,
    fixed: Optional[Mapping[str, float]] = None,
) -> OptResult:
    """Gradient-guided search over model-based lower corners.

    The gradient at the symmetric point picks one corner per group; then up
    to ``steps - 1`` rounds try single-group swaps toward the copy with the
    largest gradient advantage, keeping a swap only if it improves the
    bound.  The symmetric start is always a candidate for the result.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    prob = _Problem(fd, cm, probs, fixed)
    w0 = prob.barycenter()
    start = prob.value(w0)
    trace = [(0, start)]
    if steps == 0 or not prob.groups:
        return OptResult(prob.point(w0), start, 0, trace)

    grad, infl0 = prob.gradient(w0)
    corner = {v: int(np.argmax(g)) for v, g in grad.items()}  # argmax keeps the lowest index on ties

    def weights_of(c):
        out = {}
        for v, j in c.items():
            e = np.zeros(len(prob.groups[v]))
            e[j] = 1.0
            out[v] = e
        return out

    cur_val = prob.value(weights_of(corner))
    best_w, best = (w0, start) if start >= cur_val else (weights_of(corner), cur_val)
    best_infl = infl0 if start >= cur_val else None
    trace.append((1, best))
    taken = 1
    for step in range(2, steps + 1):
        grad, _ = prob.gradient(weights_of(corner))
        moves = []
        for v, g in grad.items():
            j0 = corner[v]
            for j, gj in enumerate(g):
                if j != j0 and gj > g[j0]:
                    moves.append((-(gj - g[j0]), v, j))
        moves.sort()
        improved = False
        for _, v, j in moves:
            trial = dict(corner)
            trial[v] = j
            val = prob.value(weights_of(trial))
            if val > cur_val:
                corner, cur_val, improved = trial, val, True
                break
        taken = step
        if cur_val > best:
            best_w, best, best_infl = weights_of(corner), cur_val, None
        trace.append((step, best))
        if not improved:
            break
    if best_infl is None:
        best_infl = prob.gradient(best_w)[1]
    return OptResult(prob.point(best_w), best, taken, trace, best_infl)

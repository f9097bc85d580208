"""Anytime branch-and-bound over decomposition trees.

Each round the engine bounds the shared leaves of the tree, propagates
intervals to the root, records them, and Shannon-expands one leaf.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from .decompose import DTree, IndepOr, Leaf, Shannon, Status, decompose, propagate, tighten
from .dissociation import (
    Context,
    CopyMap,
    Direction,
    bound_value,
    dissociate,
    model_based_probs,
    symmetric_probability,
    Assignment,
)
from .formula import Formula, VarTable, occurrences, simplify, substitute, variables
from .influence import influence_all, sum_influences
from .lower_opt import DEFAULT_STEP_SIZE, DEFAULT_STEPS, hybrid_lower, pgd_lower


class Strategy(str, enum.Enum):
    MB = "MB"
    SD = "SD"
    PGD = "PGD"
    HB = "HB"


class Heuristic(str, enum.Enum):
    FREQUENCY = "Frequency"
    INFLUENCE = "Influence"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    strategy: Strategy = Strategy.SD
    heuristic: Heuristic = Heuristic.INFLUENCE
    gd_steps: int = DEFAULT_STEPS
    step_size: float = DEFAULT_STEP_SIZE
    eps_abs: float = 0.0
    eps_rel: float = 0.0
    timeout: float = math.inf  # seconds
    max_expansions: Optional[int] = None
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "heuristic", Heuristic(self.heuristic))
        if self.eps_abs < 0 or self.eps_rel < 0:
            raise ConfigError("eps_abs and eps_rel must be >= 0")
        if self.gd_steps < 0:
            raise ConfigError("gd_steps must be >= 0")
        if self.step_size <= 0:
            raise ConfigError("step_size must be > 0")
        if self.max_expansions is not None and self.max_expansions < 0:
            raise ConfigError("max_expansions must be >= 0")
        if not (self.eps_abs > 0 or self.eps_rel > 0 or math.isfinite(self.timeout) or self.max_expansions is not None):
            raise ConfigError("at least one stopping condition must be finite")


@dataclass(frozen=True)
class TraceRecord:
    elapsed: float
    lower: float
    upper: float
    expansions: int


@dataclass
class BoundTrace:
    records: List[TraceRecord] = field(default_factory=list)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass
class LeafBounds:
    lower: float
    upper: float
    scores: Optional[Dict[str, float]] = None


def _fallback_corner(copies, p, direction, rng) -> Dict[str, float]:
    return model_based_probs(copies, p, int(rng.integers(len(copies))), direction)


def _oblivious(cm: CopyMap, probs, direction, rng, only=None) -> Dict[str, float]:
    """Symmetric probabilities per group; model-based corner for mixed groups."""
    out = {}
    for v, copies in cm.groups.items():
        ctx = cm.context[v]
        if only is not None and ctx not in only:
            continue
        if ctx is Context.MIXED:
            out.update(_fallback_corner(copies, probs[v], direction, rng))
        else:
            out.update(dict.fromkeys(copies, symmetric_probability(probs[v], len(copies), ctx, direction)))
    return out


def leaf_bounds(f: Formula, probs: Mapping[str, float], cfg: EngineConfig, rng: np.random.Generator) -> LeafBounds:
    """Upper and lower dissociation bounds for one shared leaf formula."""
    fd, cm = dissociate(f)
    scores = None
    if cfg.strategy is Strategy.MB:
        up = {}
        lo = {}
        for v, copies in cm.groups.items():
            up.update(_fallback_corner(copies, probs[v], Direction.UPPER, rng))
        for v, copies in cm.groups.items():
            lo.update(_fallback_corner(copies, probs[v], Direction.LOWER, rng))
        upper = bound_value(fd, Assignment(up, Direction.UPPER), probs)
        lower = bound_value(fd, Assignment(lo, Direction.LOWER), probs)
    else:
        up = _oblivious(cm, probs, Direction.UPPER, rng)
        upper = bound_value(fd, Assignment(up, Direction.UPPER), probs)
        if cfg.strategy is Strategy.SD:
            lo = _oblivious(cm, probs, Direction.LOWER, rng)
            lower = bound_value(fd, Assignment(lo, Direction.LOWER), probs)
        else:
            fixed = _oblivious(cm, probs, Direction.LOWER, rng, only=(Context.CONJUNCTIVE, Context.MIXED))
            if cfg.strategy is Strategy.PGD:
                res = pgd_lower(fd, cm, probs, cfg.gd_steps, cfg.step_size, fixed=fixed)
            else:
                res = hybrid_lower(fd, cm, probs, cfg.gd_steps, fixed=fixed)
            lower = res.bound
            if res.influences is not None:
                scores = {v: sum(res.influences[c] for c in cs) for v, cs in cm.groups.items()}
    lower, upper = tighten(0.0, 1.0, lower, upper)
    return LeafBounds(lower, upper, scores)


def influence_scores(f: Formula, probs: Mapping[str, float]) -> Dict[str, float]:
    """Summed copy influences with every copy at its original probability."""
    fd, cm = dissociate(f)
    view = dict(probs)
    for v, copies in cm.groups.items():
        view.update(dict.fromkeys(copies, probs[v]))
    return sum_influences(influence_all(fd, view, cm), cm)


def _argmax_tied(scores: Mapping[str, float], rng: np.random.Generator) -> str:
    top = max(scores.values())
    tied = sorted(v for v, s in scores.items() if s == top)
    if len(tied) == 1:
        return tied[0]
    return tied[int(rng.integers(len(tied)))]


def select_variable(leaf: Leaf, heuristic: Heuristic, rng: np.random.Generator, probs: Mapping[str, float]) -> str:
    counts = occurrences(leaf.formula)
    shared = {v: c for v, c in counts.items() if c > 1}
    if not shared:
        raise ValueError("leaf has no shared variable")
    if Heuristic(heuristic) is Heuristic.FREQUENCY:
        return _argmax_tied(shared, rng)
    scores = leaf.scores if leaf.scores is not None else influence_scores(leaf.formula, probs)
    return _argmax_tied({v: scores[v] for v in shared}, rng)


def shannon_expand(leaf: Leaf, var: str, probs: Mapping[str, float]) -> Shannon:
    """Split a leaf on ``var``; the new node inherits the leaf's interval."""
    if var not in variables(leaf.formula):
        raise ValueError(f"variable {var!r} does not occur in the leaf")
    hi = decompose(substitute(leaf.formula, {var: True}), probs)
    lo = decompose(substitute(leaf.formula, {var: False}), probs)
    return Shannon(var, probs[var], hi, lo, leaf.lower, leaf.upper)


def _walk(node: DTree, sens: float, parent, slot, out: list):
    """Collect (leaf, sensitivity, parent, slot) for every shared leaf."""
    if isinstance(node, Leaf):
        if node.status is Status.SHARED:
            out.append((node, sens, parent, slot))
        return
    if isinstance(node, Shannon):
        _walk(node.child1, sens * node.p, node, "child1", out)
        _walk(node.child0, sens * (1 - node.p), node, "child0", out)
        return
    mids = [(c.lower + c.upper) / 2 for c in node.children]
    if isinstance(node, IndepOr):
        mids = [1.0 - m for m in mids]
    for i, c in enumerate(node.children):
        rest = 1.0
        for j, m in enumerate(mids):
            if j != i:
                rest *= m
        _walk(c, sens * rest, node, i, out)


class _Run:
    def __init__(self, probs: Mapping[str, float], cfg: EngineConfig):
        self.probs = probs
        self.cfg = cfg
        self.serial = 0
        self.leaf_rng: Dict[Leaf, np.random.Generator] = {}

    def rng(self) -> np.random.Generator:
        self.serial += 1
        return np.random.default_rng([self.cfg.rng_seed, self.serial])

    def bound_new(self, tree: DTree):
        for leaf in _shared_leaves(tree):
            rng = self.rng()
            b = leaf_bounds(leaf.formula, self.probs, self.cfg, rng)
            leaf.lower, leaf.upper = tighten(leaf.lower, leaf.upper, b.lower, b.upper)
            leaf.scores = b.scores
            self.leaf_rng[leaf] = rng


def _shared_leaves(tree: DTree) -> list:
    found: list = []
    _walk(tree, 1.0, None, None, found)
    return [leaf for leaf, *_ in found]


def eliminate_deterministic(f: Formula, probs: Mapping[str, float]) -> Formula:
    fixed = {v: probs[v] == 1.0 for v in variables(f) if probs[v] in (0.0, 1.0)}
    return substitute(f, fixed) if fixed else f


def run(f: Formula, vt, cfg: EngineConfig) -> BoundTrace:
    """Anytime bounds on P(f); one record per round until a stop condition holds."""
    probs = vt.probs if isinstance(vt, VarTable) else vt
    start = time.perf_counter()
    f = eliminate_deterministic(simplify(f), probs)
    state = _Run(probs, cfg)
    tree = decompose(f, probs)
    state.bound_new(tree)
    lower, upper = propagate(tree)
    trace = BoundTrace()
    expansions = 0
    while True:
        trace.records.append(TraceRecord(time.perf_counter() - start, lower, upper, expansions))
        gap = upper - lower
        if gap <= cfg.eps_abs or gap / max(lower, 1e-12) <= cfg.eps_rel:
            break
        if cfg.max_expansions is not None and expansions >= cfg.max_expansions:
            break
        if time.perf_counter() - start >= cfg.timeout:
            break
        found: list = []
        _walk(tree, 1.0, None, None, found)
        if not found:
            break
        leaf, _, parent, slot = max(found, key=lambda t: ((t[0].upper - t[0].lower) * t[1], t[0].upper - t[0].lower))
        var = select_variable(leaf, cfg.heuristic, state.leaf_rng.pop(leaf), probs)
        node = shannon_expand(leaf, var, probs)
        state.bound_new(node)
        if parent is None:
            tree = node
        elif isinstance(parent, Shannon):
            setattr(parent, slot, node)
        else:
            parent.children[slot] = node
        expansions += 1
        new_lo, new_hi = propagate(tree)
        lower, upper = tighten(lower, upper, new_lo, new_hi)
    return trace

"""Dissociation: split shared variables into independent copies.

A dissociated formula is read-once, so any assignment of probabilities to
the copies is cheap to evaluate.  ``assign_bounds`` produces the copy
probabilities that make that evaluation a guaranteed upper or lower bound
on the original formula.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Tuple

from .formula import And, Const, Formula, Or, Var, eval_read_once, occurrences

COPY_SEP = "#"


class Context(enum.Enum):
    DISJUNCTIVE = "disjunctive"
    CONJUNCTIVE = "conjunctive"
    MIXED = "mixed"


class Direction(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class NothingToDissociate(ValueError):
    pass


class MixedContext(ValueError):
    def __init__(self, var: str):
        super().__init__(f"group {var!r} is not purely disjunctive/conjunctive")
        self.var = var


class MissingCopy(KeyError):
    pass


@dataclass(frozen=True)
class CopyMap:
    groups: Dict[str, List[str]]
    context: Dict[str, Context]
    origin: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.origin:
            self.origin.update({c: v for v, cs in self.groups.items() for c in cs})


@dataclass(frozen=True)
class Assignment:
    probs: Dict[str, float]
    direction: Direction


def copy_name(var: str, index: int) -> str:
    return f"{var}{COPY_SEP}{index}"


def _occurrence_paths(f: Formula, shared: set) -> Dict[str, list]:
    """For each shared variable, the (child-index path, kinds along it) of every leaf."""
    out: Dict[str, list] = {v: [] for v in shared}

    def walk(node, path, kinds):
        if isinstance(node, Var):
            if node.name in shared:
                out[node.name].append((path, kinds))
        elif isinstance(node, (And, Or)):
            kinds2 = kinds + (type(node),)
            for i, c in enumerate(node.children):
                walk(c, path + (i,), kinds2)

    walk(f, (), ())
    return out


def _lca_kind(a, b) -> type:
    (pa, ka), (pb, _) = a, b
    n = 0
    while n < len(pa) and n < len(pb) and pa[n] == pb[n]:
        n += 1
    return ka[n]


def group_contexts(f: Formula, shared) -> Dict[str, Context]:
    paths = _occurrence_paths(f, set(shared))
    result = {}
    for v, occ in paths.items():
        kinds = {_lca_kind(a, b) for a, b in combinations(occ, 2)}
        if kinds == {Or}:
            result[v] = Context.DISJUNCTIVE
        elif kinds == {And}:
            result[v] = Context.CONJUNCTIVE
        else:
            result[v] = Context.MIXED
    return result


def dissociate(f: Formula) -> Tuple[Formula, CopyMap]:
    """Replace every occurrence of each repeated variable by a fresh copy.

    Copies are numbered left to right: the i-th occurrence of ``x`` becomes
    ``x#i``.
    """
    counts = occurrences(f)
    shared = sorted(v for v, c in counts.items() if c > 1)
    if not shared:
        raise NothingToDissociate("formula is already read-once")
    contexts = group_contexts(f, shared)
    seen = {v: 0 for v in shared}
    shared_set = set(shared)

    def rewrite(node):
        if isinstance(node, Var):
            if node.name not in shared_set:
                return node
            seen[node.name] += 1
            return Var(copy_name(node.name, seen[node.name]))
        if isinstance(node, Const):
            return node
        return type(node)(tuple(rewrite(c) for c in node.children))

    fd = rewrite(f)
    groups = {v: [copy_name(v, i) for i in range(1, counts[v] + 1)] for v in shared}
    return fd, CopyMap(groups, contexts)


@dataclass(frozen=True)
class ModelBased:
    """Keep the original probability on one copy per group (index into the copy list)."""

    choice: Mapping[str, int]


class Symmetric:
    """Equal probability on every copy of a group."""


SYMMETRIC = Symmetric()


def symmetric_probability(p: float, k: int, context: Context, direction: Direction) -> float:
    if context is Context.DISJUNCTIVE:
        return p if direction is Direction.UPPER else 1.0 - (1.0 - p) ** (1.0 / k)
    if context is Context.CONJUNCTIVE:
        return p ** (1.0 / k) if direction is Direction.UPPER else p
    raise ValueError("no symmetric bound for mixed context")


def model_based_probs(copies: List[str], p: float, keep: int, direction: Direction) -> Dict[str, float]:
    if not 0 <= keep < len(copies):
        raise IndexError(f"copy index {keep} out of range for {len(copies)} copies")
    other = 1.0 if direction is Direction.UPPER else 0.0
    return {c: (p if i == keep else other) for i, c in enumerate(copies)}


def assign_bounds(cm: CopyMap, probs: Mapping[str, float], strategy, direction: Direction) -> Assignment:
    """Copy probabilities that turn the dissociated formula into a bound.

    ``strategy`` is either ``SYMMETRIC`` or a ``ModelBased`` choice.
    Model-based corners are valid in any context; symmetric ones need each
    group to be purely disjunctive or purely conjunctive.
    """
    out: Dict[str, float] = {}
    if isinstance(strategy, ModelBased):
        unknown = set(strategy.choice) - set(cm.groups)
        if unknown:
            raise KeyError(f"choice refers to unknown group(s) {sorted(unknown)}")
        for v, copies in cm.groups.items():
            out.update(model_based_probs(copies, probs[v], strategy.choice.get(v, 0), direction))
    else:
        for v, copies in cm.groups.items():
            if cm.context[v] is Context.MIXED:
                raise MixedContext(v)
            q = symmetric_probability(probs[v], len(copies), cm.context[v], direction)
            out.update(dict.fromkeys(copies, q))
    return Assignment(out, direction)


def merged_view(asg: Mapping[str, float], probs: Mapping[str, float]) -> Dict[str, float]:
    view = dict(probs)
    view.update(asg)
    return view


def bound_value(fd: Formula, asg: Assignment, probs: Mapping[str, float], cm: Optional[CopyMap] = None) -> float:
    """Evaluate the dissociated formula under the copy assignment."""
    if cm is not None:
        missing = [c for c in cm.origin if c not in asg.probs]
        if missing:
            raise MissingCopy(f"no probability for copy {missing[0]!r}")
    try:
        return eval_read_once(fd, merged_view(asg.probs, probs))
    except KeyError as exc:
        raise MissingCopy(f"no probability for {exc.args[0]!r}") from None

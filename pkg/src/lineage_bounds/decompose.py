"""Decomposition trees: split a formula into independent parts.

Leaves are either read-once (exact probability known) or shared (some
variable still repeats; needs bounds or Shannon expansion).  Internal
nodes carry the interval last propagated through them.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Union

from .formula import (
    TRUE,
    And,
    Const,
    Formula,
    Or,
    Var,
    make_node,
    eval_read_once,
    is_read_once,
    leaves,
    substitute,
    to_sexpr,
)


class Status(enum.Enum):
    READ_ONCE = "read-once"
    SHARED = "shared"


@dataclass(eq=False)
class Leaf:
    formula: Formula
    status: Status
    lower: Optional[float] = 0.0
    upper: Optional[float] = 1.0
    # per-original influence scores left behind by the lower-bound search
    scores: Optional[dict] = field(default=None, repr=False)


@dataclass(eq=False)
class IndepAnd:
    children: list
    lower: float = 0.0
    upper: float = 1.0


@dataclass(eq=False)
class IndepOr:
    children: list
    lower: float = 0.0
    upper: float = 1.0


@dataclass(eq=False)
class Shannon:
    var: str
    p: float
    child1: "DTree"
    child0: "DTree"
    lower: float = 0.0
    upper: float = 1.0


DTree = Union[Leaf, IndepAnd, IndepOr, Shannon]


def independent_partition(children: List[Formula]) -> List[List[Formula]]:
    """Group formulas into connected components of the shares-a-variable graph."""
    parent = list(range(len(children)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for i, c in enumerate(children):
        for v in leaves(c):
            j = owner.setdefault(v, i)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    comps: dict = {}
    for i, c in enumerate(children):
        comps.setdefault(find(i), []).append(c)
    return [comps[k] for k in sorted(comps)]


def _conjunct_vars(f: Formula) -> set:
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, And):
        return {c.name for c in f.children if isinstance(c, Var)}
    return set()


def _drop_conjuncts(f: Formula, names: set) -> Formula:
    if isinstance(f, Var):
        return TRUE if f.name in names else f
    return make_node(And, [c for c in f.children if not (isinstance(c, Var) and c.name in names)])


def factor_common(f: Formula) -> Formula:
    """Lift variables that are a conjunct of every disjunct: ``xA | xB -> x(A | B)``.

    Repeated until nothing common remains.  Remaining occurrences of a
    lifted variable below the new conjunction are set to true.
    """
    if not isinstance(f, Or):
        raise TypeError("factor_common expects an Or node")
    lifted: list = []
    cur: Formula = f
    while isinstance(cur, Or):
        common = set.intersection(*(_conjunct_vars(c) for c in cur.children))
        if not common:
            break
        names = sorted(common)
        rest = make_node(Or, [_drop_conjuncts(c, common) for c in cur.children])
        lifted.extend(names)
        cur = substitute(rest, dict.fromkeys(names, True))
    if not lifted:
        return f
    return make_node(And, [Var(n) for n in lifted] + [cur])


def _absorb_units(f: Formula) -> Formula:
    """``x & G -> x & G|x=1`` and ``x | G -> x | G|x=0`` for variable children ``x``."""
    units = {c.name for c in f.children if isinstance(c, Var)}
    if not units:
        return f
    value = isinstance(f, And)
    fix = dict.fromkeys(units, value)
    new = [c if isinstance(c, Var) else substitute(c, fix) for c in f.children]
    if all(a is b for a, b in zip(new, f.children)):
        return f
    return make_node(type(f), new)


def _leaf(f: Formula, probs: Mapping[str, float]) -> Leaf:
    p = eval_read_once(f, probs)
    return Leaf(f, Status.READ_ONCE, p, p)


def decompose(f: Formula, probs: Mapping[str, float]) -> DTree:
    """Build a decomposition tree for a simplified formula."""
    if isinstance(f, (Const, Var)) or is_read_once(f):
        return _leaf(f, probs)
    g = _absorb_units(f)
    if g != f:
        return decompose(g, probs)
    kind = type(f)
    comps = independent_partition(list(f.children))
    if len(comps) > 1:
        node_cls = IndepAnd if kind is And else IndepOr
        return node_cls([decompose(make_node(kind, comp), probs) for comp in comps])
    if kind is Or:
        g = factor_common(f)
        if g != f:
            return decompose(g, probs)
    return Leaf(f, Status.SHARED, 0.0, 1.0)


def leaves_of(tree: DTree) -> list:
    out = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            out.append(node)
        elif isinstance(node, Shannon):
            stack.extend([node.child0, node.child1])
        else:
            stack.extend(reversed(node.children))
    return out


def exact_value(tree: DTree, leaf_value) -> float:
    """Combine per-leaf values through the tree (``leaf_value(leaf) -> float``)."""
    if isinstance(tree, Leaf):
        return leaf_value(tree)
    if isinstance(tree, Shannon):
        return tree.p * exact_value(tree.child1, leaf_value) + (1 - tree.p) * exact_value(tree.child0, leaf_value)
    vals = [exact_value(c, leaf_value) for c in tree.children]
    out = 1.0
    if isinstance(tree, IndepAnd):
        for v in vals:
            out *= v
        return out
    for v in vals:
        out *= 1.0 - v
    return 1.0 - out


def _combine(tree, los, his):
    if isinstance(tree, IndepAnd):
        lo = hi = 1.0
        for a, b in zip(los, his):
            lo *= a
            hi *= b
        return lo, hi
    lo = hi = 1.0
    for a, b in zip(los, his):
        lo *= 1.0 - a
        hi *= 1.0 - b
    return 1.0 - lo, 1.0 - hi


def propagate(tree: DTree):
    """Push leaf intervals to the root; every node keeps the tightest interval seen.

    Returns the root interval ``(lower, upper)``.
    """
    if isinstance(tree, Leaf):
        if tree.lower is None or tree.upper is None:
            raise ValueError("leaf interval not initialised")
        return tree.lower, tree.upper
    if isinstance(tree, Shannon):
        l1, u1 = propagate(tree.child1)
        l0, u0 = propagate(tree.child0)
        lo = tree.p * l1 + (1 - tree.p) * l0
        hi = tree.p * u1 + (1 - tree.p) * u0
    else:
        pairs = [propagate(c) for c in tree.children]
        lo, hi = _combine(tree, [a for a, _ in pairs], [b for _, b in pairs])
    tree.lower, tree.upper = tighten(tree.lower, tree.upper, lo, hi)
    return tree.lower, tree.upper


def tighten(old_lo: float, old_hi: float, lo: float, hi: float):
    """Intersect two valid intervals (guarding against rounding crossover)."""
    lo, hi = max(old_lo, lo), min(old_hi, hi)
    if lo > hi:
        lo = hi = 0.5 * (lo + hi)
    return lo, hi


def dump(tree: DTree, indent: int = 0) -> str:
    pad = "  " * indent
    span = f"[{tree.lower:.6g}, {tree.upper:.6g}]"
    if isinstance(tree, Leaf):
        return f"{pad}Leaf {tree.status.value} {span} {to_sexpr(tree.formula)}\n"
    if isinstance(tree, Shannon):
        return (
            f"{pad}Shannon {tree.var} p={tree.p:g} {span}\n"
            + dump(tree.child1, indent + 1)
            + dump(tree.child0, indent + 1)
        )
    name = "IndepAnd" if isinstance(tree, IndepAnd) else "IndepOr"
    return f"{pad}{name} {span}\n" + "".join(dump(c, indent + 1) for c in tree.children)

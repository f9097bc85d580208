"""Influence (partial derivative of the probability) of every leaf of a read-once formula."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping

from .dissociation import COPY_SEP, CopyMap
from .formula import And, Const, Formula, NotReadOnce, Var, leaves


@dataclass(frozen=True)
class InfluenceMap:
    per_leaf: Dict[str, float]
    per_original: Dict[str, float]


def _forward(f: Formula, probs: Mapping[str, float], memo: dict) -> float:
    if isinstance(f, Var):
        val = probs[f.name]
    elif isinstance(f, Const):
        val = 1.0 if f.value else 0.0
    else:
        vals = [_forward(c, probs, memo) for c in f.children]
        if isinstance(f, And):
            val = 1.0
            for v in vals:
                val *= v
        else:
            miss = 1.0
            for v in vals:
                miss *= 1.0 - v
            val = 1.0 - miss
    memo[id(f)] = val
    return val


def _others_product(factors: list) -> list:
    """``out[i] = prod(factors[j] for j != i)`` via prefix/suffix products."""
    n = len(factors)
    prefix = [1.0] * (n + 1)
    for i, x in enumerate(factors):
        prefix[i + 1] = prefix[i] * x
    out = [0.0] * n
    suffix = 1.0
    for i in range(n - 1, -1, -1):
        out[i] = prefix[i] * suffix
        suffix *= factors[i]
    return out


def leaf_influences(f: Formula, probs: Mapping[str, float]) -> Dict[str, float]:
    """dP/dp for each leaf: one forward pass, one backward pass."""
    seen = set()
    for v in leaves(f):
        if v in seen:
            raise NotReadOnce(v)
        seen.add(v)
    memo: dict = {}
    _forward(f, probs, memo)
    out: Dict[str, float] = {}
    stack = [(f, 1.0)]
    while stack:
        node, grad = stack.pop()
        if isinstance(node, Var):
            out[node.name] = grad
        elif isinstance(node, Const):
            continue
        else:
            vals = [memo[id(c)] for c in node.children]
            if isinstance(node, And):
                partial = _others_product(vals)
            else:
                partial = _others_product([1.0 - v for v in vals])
            for c, d in zip(node.children, partial):
                stack.append((c, grad * d))
    return out


def influence_all(f: Formula, probs: Mapping[str, float], cm: CopyMap = None) -> InfluenceMap:
    per_leaf = leaf_influences(f, probs)
    per_original = dict(per_leaf)
    if cm is not None:
        per_original = {}
        for name, val in per_leaf.items():
            key = cm.origin.get(name, name)
            per_original[key] = per_original.get(key, 0.0) + val
    return InfluenceMap(per_leaf, per_original)


def sum_influences(im: InfluenceMap, cm: CopyMap) -> Dict[str, float]:
    """Per shared original variable, the summed influence of its copies."""
    out: Dict[str, float] = {}
    for v, copies in cm.groups.items():
        try:
            out[v] = sum(im.per_leaf[c] for c in copies)
        except KeyError as exc:
            raise KeyError(f"copy {exc.args[0]!r} of {v!r} has no influence value") from None
    stray = [name for name in im.per_leaf if COPY_SEP in name and name not in cm.origin]
    if stray:
        raise KeyError(f"copy {stray[0]!r} is not in the copy map")
    return out

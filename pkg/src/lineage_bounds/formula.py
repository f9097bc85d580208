"""Monotone lineage formulas: representation, parsing, rewriting, evaluation.

Formulas are immutable trees built from ``Var``, ``And``, ``Or`` and the two
constants ``TRUE`` / ``FALSE``.  Rewrites return new trees and share every
subtree they do not touch.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Tuple, Union

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.:\-']*")


class LineageError(ValueError):
    """Base class for malformed lineage input."""


class LineageSyntaxError(LineageError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class NotReadOnce(ValueError):
    def __init__(self, var: str):
        super().__init__(f"variable {var!r} occurs more than once")
        self.var = var


@dataclass(frozen=True)
class Const:
    value: bool

    def __repr__(self) -> str:
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class And:
    children: Tuple["Formula", ...]
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.children:
            raise ValueError("And needs at least one child")
        object.__setattr__(self, "_hash", hash(("and", self.children)))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "And(" + ", ".join(map(repr, self.children)) + ")"


@dataclass(frozen=True)
class Or:
    children: Tuple["Formula", ...]
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.children:
            raise ValueError("Or needs at least one child")
        object.__setattr__(self, "_hash", hash(("or", self.children)))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "Or(" + ", ".join(map(repr, self.children)) + ")"


Formula = Union[Const, Var, And, Or]


def conj(*children: Formula) -> And:
    return And(tuple(children))


def disj(*children: Formula) -> Or:
    return Or(tuple(children))


@dataclass(frozen=True)
class VarTable:
    """Tuple variables with their marginal probabilities.

    ``provenance`` optionally maps a variable to ``(table, tuple key)``.
    """

    probs: Mapping[str, float]
    provenance: Mapping[str, Optional[Tuple[str, str]]] = field(default_factory=dict)

    def __post_init__(self):
        for name, p in self.probs.items():
            if not IDENT_RE.fullmatch(name):
                raise LineageError(f"invalid variable name {name!r}")
            if not 0.0 <= p <= 1.0:
                raise LineageError(f"probability of {name} outside [0,1]: {p}")

    def __getitem__(self, name: str) -> float:
        return self.probs[name]

    def __contains__(self, name: object) -> bool:
        return name in self.probs

    def __len__(self) -> int:
        return len(self.probs)


# --------------------------------------------------------------------------
# traversal helpers


def leaves(f: Formula) -> Iterator[str]:
    """Variable names at the leaves, left to right (with repetition)."""
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            yield node.name
        elif isinstance(node, (And, Or)):
            stack.extend(reversed(node.children))


def occurrences(f: Formula) -> Counter:
    return Counter(leaves(f))


def variables(f: Formula) -> set:
    return set(leaves(f))


def shared_variables(f: Formula) -> list:
    return sorted(v for v, c in occurrences(f).items() if c > 1)


def is_read_once(f: Formula) -> bool:
    seen = set()
    for v in leaves(f):
        if v in seen:
            return False
        seen.add(v)
    return True


def size(f: Formula) -> int:
    if isinstance(f, (And, Or)):
        return 1 + sum(size(c) for c in f.children)
    return 1


def evaluate(f: Formula, world: Mapping[str, bool]) -> bool:
    """Truth value of ``f`` under a total Boolean assignment."""
    if isinstance(f, Var):
        return bool(world[f.name])
    if isinstance(f, Const):
        return f.value
    if isinstance(f, And):
        return all(evaluate(c, world) for c in f.children)
    return any(evaluate(c, world) for c in f.children)


# --------------------------------------------------------------------------
# rewriting


def make_node(kind: type, children: list) -> Formula:
    """Assemble a simplified node of ``kind`` from already-simplified children."""
    unit, zero = (TRUE, FALSE) if kind is And else (FALSE, TRUE)
    flat: list = []
    seen: set = set()
    for c in children:
        if c == zero:
            return zero
        if c == unit:
            continue
        items = c.children if isinstance(c, kind) else (c,)
        for item in items:
            if item not in seen:
                seen.add(item)
                flat.append(item)
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return kind(tuple(flat))


def simplify(f: Formula) -> Formula:
    """Fold constants, flatten same-kind nesting, and drop duplicate children."""
    if isinstance(f, (Var, Const)):
        return f
    new = [simplify(c) for c in f.children]
    if all(a is b for a, b in zip(new, f.children)) and _is_clean(f):
        return f
    return make_node(type(f), new)


def _is_clean(f: Formula) -> bool:
    kind = type(f)
    if len(f.children) < 2:
        return False
    seen = set()
    for c in f.children:
        if isinstance(c, (Const, kind)) or c in seen:
            return False
        seen.add(c)
    return True


def substitute(f: Formula, values: Mapping[str, bool]) -> Formula:
    """Replace variables by constants and simplify.  Untouched subtrees are shared."""
    if not values:
        return f
    if isinstance(f, Var):
        if f.name in values:
            return TRUE if values[f.name] else FALSE
        return f
    if isinstance(f, Const):
        return f
    new = [substitute(c, values) for c in f.children]
    if all(a is b for a, b in zip(new, f.children)):
        return f
    return make_node(type(f), new)


def condition(f: Formula, var: str, value: bool) -> Formula:
    """The cofactor ``f|var=value``."""
    return substitute(f, {var: value})


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    if isinstance(f, Var):
        return Var(mapping.get(f.name, f.name))
    if isinstance(f, Const):
        return f
    return type(f)(tuple(rename(c, mapping) for c in f.children))


# --------------------------------------------------------------------------
# evaluation


def eval_read_once(f: Formula, probs: Mapping[str, float]) -> float:
    """Exact probability of a read-once formula under independence.

    Raises ``NotReadOnce`` naming a repeated variable otherwise.
    """
    seen: set = set()
    for v in leaves(f):
        if v in seen:
            raise NotReadOnce(v)
        seen.add(v)
    return _prob(f, probs)


def _prob(f: Formula, probs: Mapping[str, float]) -> float:
    if isinstance(f, Var):
        return probs[f.name]
    if isinstance(f, Const):
        return 1.0 if f.value else 0.0
    if isinstance(f, And):
        out = 1.0
        for c in f.children:
            out *= _prob(c, probs)
        return out
    miss = 1.0
    for c in f.children:
        miss *= 1.0 - _prob(c, probs)
    return 1.0 - miss


# --------------------------------------------------------------------------
# lineage file format

_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_lineage(text: str) -> Tuple[VarTable, Formula]:
    """Parse a lineage file (``var NAME P`` lines followed by ``formula EXPR``).

    The returned formula is simplified.
    """
    probs: dict = {}
    lines = text.splitlines(keepends=True)
    offset = 0
    expr_start = None
    for line in lines:
        stripped = line.strip()
        start = offset
        offset += len(line)
        if not stripped or stripped.startswith("#"):
            continue
        head, _, rest = stripped.partition(" ")
        col = start + (len(line) - len(line.lstrip()))
        if head == "var":
            parts = rest.split()
            if len(parts) != 2:
                raise LineageSyntaxError("expected 'var NAME PROB'", *_line_col(text, col))
            name, raw = parts
            if not IDENT_RE.fullmatch(name) or name in ("true", "false"):
                raise LineageSyntaxError(f"invalid variable name {name!r}", *_line_col(text, col))
            try:
                p = float(raw)
            except ValueError:
                raise LineageSyntaxError(f"invalid probability {raw!r}", *_line_col(text, col)) from None
            if not 0.0 <= p <= 1.0:
                raise LineageError(f"probability of {name} outside [0,1]: {raw}")
            if name in probs:
                raise LineageError(f"duplicate declaration of variable {name!r}")
            probs[name] = p
        elif head == "formula" or stripped == "formula":
            expr_start = col + len("formula")
            break
        else:
            raise LineageSyntaxError(f"unexpected {head!r}", *_line_col(text, col))
    if expr_start is None:
        raise LineageSyntaxError("missing 'formula' line", *_line_col(text, len(text)))

    body = "".join(
        ln if not ln.lstrip().startswith("#") else "\n"
        for ln in text[expr_start:].splitlines(keepends=True)
    )
    tokens = []
    pos = 0
    while pos < len(body):
        m = _TOKEN_RE.match(body, pos)
        if m is None or m.end() == pos:
            break
        if m.lastindex is not None:
            tokens.append((m.group(m.lastindex), expr_start + m.start(m.lastindex)))
        pos = m.end()

    formula, i = _parse_expr(tokens, 0, text, probs)
    if i != len(tokens):
        raise LineageSyntaxError("trailing input after formula", *_line_col(text, tokens[i][1]))
    return VarTable(probs), simplify(formula)


def _parse_expr(tokens, i, text, probs) -> Tuple[Formula, int]:
    if i >= len(tokens):
        raise LineageSyntaxError("unexpected end of formula", *_line_col(text, len(text)))
    tok, pos = tokens[i]
    if tok == "(":
        if i + 1 >= len(tokens) or tokens[i + 1][0] not in ("and", "or"):
            where = tokens[i + 1][1] if i + 1 < len(tokens) else len(text)
            raise LineageSyntaxError("expected 'and' or 'or'", *_line_col(text, where))
        kind = And if tokens[i + 1][0] == "and" else Or
        i += 2
        children = []
        while i < len(tokens) and tokens[i][0] != ")":
            child, i = _parse_expr(tokens, i, text, probs)
            children.append(child)
        if i >= len(tokens):
            raise LineageSyntaxError("missing ')'", *_line_col(text, len(text)))
        if not children:
            raise LineageSyntaxError("connective needs at least one operand", *_line_col(text, tokens[i][1]))
        return kind(tuple(children)), i + 1
    if tok == ")":
        raise LineageSyntaxError("unexpected ')'", *_line_col(text, pos))
    if tok == "true":
        return TRUE, i + 1
    if tok == "false":
        return FALSE, i + 1
    if not IDENT_RE.fullmatch(tok):
        raise LineageSyntaxError(f"invalid identifier {tok!r}", *_line_col(text, pos))
    if tok not in probs:
        raise LineageError(f"undeclared variable {tok!r}")
    return Var(tok), i + 1


def to_sexpr(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    op = "and" if isinstance(f, And) else "or"
    return "(" + op + " " + " ".join(to_sexpr(c) for c in f.children) + ")"


def format_lineage(vt: VarTable, f: Formula) -> str:
    lines = [f"var {name} {p!r}" for name, p in vt.probs.items()]
    lines.append("formula " + to_sexpr(f))
    return "\n".join(lines) + "\n"

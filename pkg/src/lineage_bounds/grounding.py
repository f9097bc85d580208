"""Probabilistic tables, Boolean conjunctive queries, and lineage grounding."""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .formula import FALSE, IDENT_RE, And, Formula, Or, Var, VarTable, simplify, variables


class GroundingError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    key: str
    values: Tuple[str, ...]
    p: float


@dataclass(frozen=True)
class Table:
    name: str
    schema: Tuple[str, ...]
    rows: Tuple[Row, ...]


@dataclass(frozen=True)
class Database:
    tables: Dict[str, Table] = field(default_factory=dict)

    def probs(self) -> Dict[str, float]:
        return {r.key: r.p for t in self.tables.values() for r in t.rows}


def load_table(name: str, text: str) -> Table:
    """Parse one CSV table: optional ``_id`` first, attributes, ``_p`` last."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise GroundingError(f"table {name}: missing header") from None
    if not header or header[-1] != "_p":
        raise GroundingError(f"table {name}: last column must be '_p'")
    has_id = header[0] == "_id"
    attrs = tuple(header[1 if has_id else 0:-1])
    rows = []
    keys = set()
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise GroundingError(f"table {name}, line {lineno}: expected {len(header)} fields, got {len(rec)}")
        rec = [c.strip() for c in rec]
        key = rec[0] if has_id else f"{name.lower()}{len(rows) + 1}"
        if not IDENT_RE.fullmatch(key):
            raise GroundingError(f"table {name}, line {lineno}: invalid tuple id {key!r}")
        if key in keys:
            raise GroundingError(f"table {name}: duplicate _id {key!r}")
        try:
            p = float(rec[-1])
        except ValueError:
            raise GroundingError(f"table {name}, line {lineno}: bad probability {rec[-1]!r}") from None
        if not 0.0 <= p <= 1.0:
            raise GroundingError(f"table {name}, line {lineno}: probability {rec[-1]} outside [0,1]")
        keys.add(key)
        rows.append(Row(key, tuple(rec[1 if has_id else 0:-1]), p))
    return Table(name, attrs, tuple(rows))


def load_tables(sources: Iterable[Tuple[str, str]]) -> Database:
    tables = {}
    for name, text in sources:
        tables[name] = load_table(name, text)
    return Database(tables)


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Atom:
    table: str
    args: Tuple[Union[Variable, str], ...]


@dataclass(frozen=True)
class Query:
    atoms: Tuple[Atom, ...]

    @property
    def variables(self) -> set:
        return {a.name for atom in self.atoms for a in atom.args if isinstance(a, Variable)}

    def permuted(self, order: Sequence[int]) -> "Query":
        return Query(tuple(self.atoms[i] for i in order))

    def __str__(self) -> str:
        def arg(a):
            return a.name if isinstance(a, Variable) else f"'{a}'"

        return "Q :- " + ", ".join(f"{at.table}({','.join(map(arg, at.args))})" for at in self.atoms)


_HEAD_RE = re.compile(r"\s*[A-Za-z_]\w*\s*(?:\(\s*\))?\s*:-\s*")
_ATOM_RE = re.compile(r"\s*([A-Za-z_]\w*)\s*\(([^()]*)\)\s*")
_ARG_RE = re.compile(r"""\s*(?:'([^']*)'|"([^"]*)"|([A-Za-z0-9_.\-]+))\s*$""")


def parse_query(text: str) -> Query:
    """Parse ``Q :- R(X), S(X,'c'), ...``.  Uppercase identifiers are variables."""
    m = _HEAD_RE.match(text)
    if not m:
        raise GroundingError("query must start with 'Q :-'")
    pos = m.end()
    atoms = []
    while True:
        am = _ATOM_RE.match(text, pos)
        if not am:
            raise GroundingError(f"expected atom at position {pos}")
        args = []
        for raw in am.group(2).split(","):
            gm = _ARG_RE.match(raw)
            if not gm or not raw.strip():
                raise GroundingError(f"bad argument {raw.strip()!r} in atom {am.group(1)}")
            if gm.group(3) is not None and gm.group(3)[0].isupper():
                args.append(Variable(gm.group(3)))
            else:
                args.append(next(g for g in gm.groups() if g is not None))
        atoms.append(Atom(am.group(1), tuple(args)))
        pos = am.end()
        if pos == len(text):
            break
        if text[pos] != ",":
            raise GroundingError(f"expected ',' at position {pos}")
        pos += 1
    if not atoms:
        raise GroundingError("query has no atoms")
    return Query(tuple(atoms))


class _Step:
    """Hash index for one atom given which query variables are already bound."""

    def __init__(self, atom: Atom, table: Table, bound: set):
        if len(atom.args) != len(table.schema):
            raise GroundingError(
                f"atom {atom.table} has {len(atom.args)} arguments, table has {len(table.schema)} attributes"
            )
        self.key_pos = []
        self.key_src = []
        self.binds = []
        self.checks = []
        first_seen: Dict[str, int] = {}
        for i, a in enumerate(atom.args):
            if isinstance(a, Variable):
                if a.name in bound:
                    self.key_pos.append(i)
                    self.key_src.append(a)
                elif a.name in first_seen:
                    self.checks.append((first_seen[a.name], i))
                else:
                    first_seen[a.name] = i
                    self.binds.append((a.name, i))
            else:
                self.key_pos.append(i)
                self.key_src.append(a)
        self.index: Dict[tuple, list] = {}
        for row in table.rows:
            if any(row.values[i] != row.values[j] for i, j in self.checks):
                continue
            self.index.setdefault(tuple(row.values[i] for i in self.key_pos), []).append(row)

    def matches(self, env: Mapping[str, str]) -> list:
        key = tuple(env[s.name] if isinstance(s, Variable) else s for s in self.key_src)
        return self.index.get(key, [])


def _plan(q: Query, db: Database) -> list:
    steps = []
    bound: set = set()
    for atom in q.atoms:
        if atom.table not in db.tables:
            raise GroundingError(f"unknown table {atom.table!r}")
        steps.append(_Step(atom, db.tables[atom.table], bound))
        bound |= {a.name for a in atom.args if isinstance(a, Variable)}
    return steps


def ground(q: Query, db: Database) -> Tuple[VarTable, Formula]:
    """Lineage of a Boolean query, factorised left-deep along the atom order."""
    steps = _plan(q, db)

    def rec(i: int, env: dict) -> Formula:
        step = steps[i]
        last = i == len(steps) - 1
        terms = []
        for row in step.matches(env):
            if last:
                terms.append(Var(row.key))
                continue
            env2 = dict(env)
            env2.update((name, row.values[pos]) for name, pos in step.binds)
            sub = rec(i + 1, env2)
            if sub != FALSE:
                terms.append(And((Var(row.key), sub)))
        if not terms:
            return FALSE
        return Or(tuple(terms))

    f = simplify(rec(0, {}))
    used = variables(f)
    prov = {}
    probs = {}
    for t in db.tables.values():
        for r in t.rows:
            if r.key in used:
                if r.key in probs:
                    raise GroundingError(f"tuple id {r.key!r} appears in more than one table")
                probs[r.key] = r.p
                prov[r.key] = (t.name, r.key)
    return VarTable(probs, prov), f


def answers(q: Query, db: Database) -> List[Tuple[str, ...]]:
    """Satisfying tuple combinations by nested-loop join (one tuple id per atom)."""
    out = []

    def rec(i: int, env: dict, chosen: tuple):
        if i == len(q.atoms):
            out.append(chosen)
            return
        atom = q.atoms[i]
        table = db.tables[atom.table]
        for row in table.rows:
            env2 = dict(env)
            ok = True
            for a, val in zip(atom.args, row.values):
                if isinstance(a, Variable):
                    if env2.setdefault(a.name, val) != val:
                        ok = False
                        break
                elif a != val:
                    ok = False
                    break
            if ok:
                rec(i + 1, env2, chosen + (row.key,))

    if any(a.table not in db.tables for a in q.atoms):
        raise GroundingError("unknown table")
    rec(0, {}, ())
    return out

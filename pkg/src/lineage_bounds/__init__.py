"""Anytime lower/upper bounds on lineage probabilities via dissociation and Shannon expansion."""

from .decompose import decompose, propagate
from .dissociation import SYMMETRIC, Direction, ModelBased, assign_bounds, bound_value, dissociate
from .engine import EngineConfig, Heuristic, Strategy, run
from .formula import TRUE, FALSE, And, Or, Var, VarTable, condition, eval_read_once, parse_lineage, simplify
from .grounding import ground, load_tables, parse_query
from .influence import influence_all, sum_influences
from .lower_opt import hybrid_lower, pgd_lower, project_simplex
from .oracle import exact_prob

__all__ = [
    "And", "Or", "Var", "TRUE", "FALSE", "VarTable",
    "parse_lineage", "simplify", "condition", "eval_read_once",
    "load_tables", "parse_query", "ground",
    "decompose", "propagate",
    "dissociate", "assign_bounds", "bound_value", "ModelBased", "SYMMETRIC", "Direction",
    "influence_all", "sum_influences",
    "project_simplex", "pgd_lower", "hybrid_lower",
    "EngineConfig", "Strategy", "Heuristic", "run",
    "exact_prob",
]

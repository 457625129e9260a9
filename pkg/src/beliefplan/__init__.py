"""Belief-space task planning with knowledge fluents.

Compiles partially observable planning domains into classical
determinized ones, plans over them, and executes with an
observe-update-plan-execute loop against graph-based simulated
environments.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ActionKind,
    And,
    Atom,
    ForAll,
    Formula,
    GroundAction,
    GroundAtom,
    Not,
    ObjectRef,
    OperatorSchema,
    PredicateKind,
    PredicateSchema,
    TruthValue3,
    TypeHierarchy,
    UnknownTest,
    Variable,
    enumerate_groundings,
    eval_atom,
    eval_formula,
    ground,
)

"""Knowledge-fluent compilation and optimistic determinization.

Each belief predicate P becomes a pair of binary fluents ``K<P>+``
(known true) and ``K<P>-`` (known false); both false encodes Unknown.
Occurrences of P in preconditions, effects, and goals are rewritten over
the pair, and every information-gathering action is split into two
deterministic variants, one per outcome, sharing the original
precondition plus the both-unset requirement.  The planner may then
pick whichever outcome suits the plan; execution corrects it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CompileError, ObserveWithoutTarget, UnknownInGoal
from .model import (
    ActionKind,
    And,
    Atom,
    ForAll,
    Formula,
    Not,
    OperatorSchema,
    PredicateKind,
    PredicateSchema,
    TruthValue3,
    UnknownTest,
)
from .pddl import Domain

POSITIVE_SUFFIX = "+"
NEGATIVE_SUFFIX = "-"


def positive_name(pred: str) -> str:
    return f"K{pred}{POSITIVE_SUFFIX}"


def negative_name(pred: str) -> str:
    return f"K{pred}{NEGATIVE_SUFFIX}"


@dataclass
class CompiledDomain:
    """A classical domain plus the bookkeeping to map back to beliefs."""

    domain: Domain
    # belief predicate name -> (known-true schema, known-false schema)
    fluents: dict[str, tuple[PredicateSchema, PredicateSchema]]
    # observe action name -> (positive variant name, negative variant name)
    variants: dict[str, tuple[str, str]]
    # variant name -> declared observe action name
    variant_base: dict[str, str]

    def pair(self, atom: Atom) -> tuple[Atom, Atom]:
        """K+/K- atoms for a belief atom (same arguments)."""
        pos, neg = self.fluents[atom.schema.name]
        return Atom(pos, atom.args), Atom(neg, atom.args)


def _rewrite_atom(atom: Atom, fluents, positive: bool) -> Atom:
    if atom.schema.kind is not PredicateKind.BELIEF:
        return atom
    pos, neg = fluents[atom.schema.name]
    return Atom(pos if positive else neg, atom.args)


def _rewrite_formula(f: Formula, fluents) -> Formula:
    if isinstance(f, Atom):
        return _rewrite_atom(f, fluents, positive=True)
    if isinstance(f, Not):
        if f.atom.schema.kind is PredicateKind.BELIEF:
            return _rewrite_atom(f.atom, fluents, positive=False)
        return f
    if isinstance(f, UnknownTest):
        pos, neg = fluents[f.atom.schema.name]
        return And((Not(Atom(pos, f.atom.args)), Not(Atom(neg, f.atom.args))))
    if isinstance(f, And):
        return And(tuple(_rewrite_formula(p, fluents) for p in f.parts))
    if isinstance(f, ForAll):
        return ForAll(f.var, _rewrite_formula(f.body, fluents))
    raise TypeError(f"not a formula: {f!r}")


def _rewrite_effects(op: OperatorSchema, fluents) -> tuple[frozenset[Atom], frozenset[Atom]]:
    """Adding P asserts known-true (and retracts known-false); deleting P
    asserts known-false.  The acting agent knows what it changed."""
    add: set[Atom] = set()
    delete: set[Atom] = set()
    for atom in op.add:
        if atom.schema.kind is PredicateKind.BELIEF:
            add.add(_rewrite_atom(atom, fluents, positive=True))
            delete.add(_rewrite_atom(atom, fluents, positive=False))
        else:
            add.add(atom)
    for atom in op.delete:
        if atom.schema.kind is PredicateKind.BELIEF:
            add.add(_rewrite_atom(atom, fluents, positive=False))
            delete.add(_rewrite_atom(atom, fluents, positive=True))
        else:
            delete.add(atom)
    return frozenset(add), frozenset(delete)


def compile_predicates(domain: Domain) -> CompiledDomain:
    """Fluent-layer compilation: replace belief predicates by K pairs and
    rewrite all operator formulas.  Observe actions are not yet split."""
    fluents: dict[str, tuple[PredicateSchema, PredicateSchema]] = {}
    predicates: dict[str, PredicateSchema] = {}
    for name, schema in domain.predicates.items():
        if schema.kind is PredicateKind.PHYSICAL:
            predicates[name] = schema
    for name, schema in domain.predicates.items():
        if schema.kind is not PredicateKind.BELIEF:
            continue
        pos = PredicateSchema(positive_name(name), schema.param_types, PredicateKind.PHYSICAL)
        neg = PredicateSchema(negative_name(name), schema.param_types, PredicateKind.PHYSICAL)
        for k in (pos.name, neg.name):
            if k in domain.predicates:
                raise CompileError(f"predicate name {k!r} is reserved for compilation")
        fluents[name] = (pos, neg)
        predicates[pos.name] = pos
        predicates[neg.name] = neg

    operators: dict[str, OperatorSchema] = {}
    for name, op in domain.operators.items():
        if op.kind is ActionKind.OBSERVE:
            if op.observed is None:
                raise ObserveWithoutTarget(f"observe action {name!r} declares no observed atom")
            if op.add or op.delete:
                raise CompileError(
                    f"observe action {name!r} has world-changing effects; "
                    "observation must be effect-separated"
                )
        add, delete = _rewrite_effects(op, fluents)
        operators[name] = OperatorSchema(
            name=op.name,
            params=op.params,
            precondition=_rewrite_formula(op.precondition, fluents),
            add=add,
            delete=delete,
            kind=op.kind,
            observed=op.observed,
            polarity=None,
        )
    compiled = Domain(
        name=domain.name,
        types=domain.types,
        predicates=predicates,
        operators=operators,
    )
    return CompiledDomain(domain=compiled, fluents=fluents, variants={}, variant_base={})


def _both_unset(pair: tuple[Atom, Atom]) -> tuple[Not, Not]:
    pos, neg = pair
    return Not(pos), Not(neg)


def _with_literals(precondition: Formula, extra: tuple[Not, ...]) -> Formula:
    parts = precondition.parts if isinstance(precondition, And) else (precondition,)
    present = set(parts)
    new = tuple(lit for lit in extra if lit not in present)
    return And(parts + new)


def determinize(domain: Domain) -> CompiledDomain:
    """Full compilation: K fluents plus the optimistic split of every
    observe action into a + and a - variant."""
    compiled = compile_predicates(domain)
    operators: dict[str, OperatorSchema] = {}
    variants: dict[str, tuple[str, str]] = {}
    variant_base: dict[str, str] = {}
    for name, op in compiled.domain.operators.items():
        if op.kind is not ActionKind.OBSERVE:
            operators[name] = op
            continue
        assert op.observed is not None
        pair = compiled.pair(op.observed)
        precondition = _with_literals(op.precondition, _both_unset(pair))
        pos_name = f"{name}{POSITIVE_SUFFIX}"
        neg_name = f"{name}{NEGATIVE_SUFFIX}"
        for variant_name, effect_atom, polarity in (
            (pos_name, pair[0], True),
            (neg_name, pair[1], False),
        ):
            if variant_name in compiled.domain.operators:
                raise CompileError(f"action name {variant_name!r} is reserved for compilation")
            operators[variant_name] = OperatorSchema(
                name=variant_name,
                params=op.params,
                precondition=precondition,
                add=frozenset({effect_atom}),
                delete=frozenset(),
                kind=ActionKind.OBSERVE,
                observed=op.observed,
                polarity=polarity,
            )
            variant_base[variant_name] = name
        variants[name] = (pos_name, neg_name)
    out = Domain(
        name=compiled.domain.name,
        types=compiled.domain.types,
        predicates=compiled.domain.predicates,
        operators=operators,
    )
    return CompiledDomain(
        domain=out,
        fluents=compiled.fluents,
        variants=variants,
        variant_base=variant_base,
    )


def lower_goal(goal: Formula, compiled: CompiledDomain) -> Formula:
    """Express a goal purely over compiled fluents.  Requiring an atom to
    be Unknown is not a permissible goal."""
    if isinstance(goal, Atom):
        return _rewrite_atom(goal, compiled.fluents, positive=True)
    if isinstance(goal, Not):
        if goal.atom.schema.kind is PredicateKind.BELIEF:
            return _rewrite_atom(goal.atom, compiled.fluents, positive=False)
        return goal
    if isinstance(goal, UnknownTest):
        raise UnknownInGoal(f"goal may not require {goal.atom} to be Unknown")
    if isinstance(goal, And):
        return And(tuple(lower_goal(p, compiled) for p in goal.parts))
    if isinstance(goal, ForAll):
        return ForAll(goal.var, lower_goal(goal.body, compiled))
    raise TypeError(f"not a formula: {goal!r}")


# Read-only views in the four-predicate style; the K pair is the single
# source of truth.
def believes_true(belief, compiled: CompiledDomain, atom: Atom) -> bool:
    pos, _ = compiled.pair(atom)
    return belief.atom_value(pos) is TruthValue3.TRUE


def believes_false(belief, compiled: CompiledDomain, atom: Atom) -> bool:
    _, neg = compiled.pair(atom)
    return belief.atom_value(neg) is TruthValue3.TRUE


def is_known(belief, compiled: CompiledDomain, atom: Atom) -> bool:
    return believes_true(belief, compiled, atom) or believes_false(belief, compiled, atom)


def is_unknown(belief, compiled: CompiledDomain, atom: Atom) -> bool:
    return not is_known(belief, compiled, atom)

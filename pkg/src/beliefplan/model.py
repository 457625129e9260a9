"""Symbolic vocabulary: types, objects, predicates, formulas, operators.

Everything here is an immutable value.  Formula evaluation follows
strong Kleene three-valued semantics, with universal quantifiers
expanded over the objects currently conjectured to exist.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Protocol, Sequence, Union

from .errors import MissingBinding, TypeMismatch, UnknownObject


class TruthValue3(enum.Enum):
    """Three-valued truth: True, False, or Unknown."""

    TRUE = "T"
    FALSE = "F"
    UNKNOWN = "U"

    @classmethod
    def from_bool(cls, b: bool) -> "TruthValue3":
        return cls.TRUE if b else cls.FALSE

    @property
    def is_true(self) -> bool:
        return self is TruthValue3.TRUE

    @property
    def is_false(self) -> bool:
        return self is TruthValue3.FALSE

    @property
    def is_unknown(self) -> bool:
        return self is TruthValue3.UNKNOWN

    def negate(self) -> "TruthValue3":
        if self is TruthValue3.TRUE:
            return TruthValue3.FALSE
        if self is TruthValue3.FALSE:
            return TruthValue3.TRUE
        return TruthValue3.UNKNOWN

    def __invert__(self) -> "TruthValue3":
        return self.negate()

    @staticmethod
    def conjoin(values: Iterable["TruthValue3"]) -> "TruthValue3":
        """Strong-Kleene conjunction: False dominates, then Unknown."""
        result = TruthValue3.TRUE
        for v in values:
            if v is TruthValue3.FALSE:
                return TruthValue3.FALSE
            if v is TruthValue3.UNKNOWN:
                result = TruthValue3.UNKNOWN
        return result

    def __and__(self, other: "TruthValue3") -> "TruthValue3":
        return TruthValue3.conjoin((self, other))


TRUE = TruthValue3.TRUE
FALSE = TruthValue3.FALSE
UNKNOWN = TruthValue3.UNKNOWN


class TypeHierarchy:
    """Forest of type names; parent None marks a root."""

    def __init__(self, parents: Mapping[str, str | None] | None = None):
        self._parents: dict[str, str | None] = dict(parents or {})
        self._check()

    def _check(self) -> None:
        for name, parent in self._parents.items():
            if parent is not None and parent not in self._parents:
                raise TypeMismatch(f"type {name!r} has undeclared parent {parent!r}")
        for name in self._parents:
            seen = {name}
            cur = self._parents[name]
            while cur is not None:
                if cur in seen:
                    raise TypeMismatch(f"type hierarchy contains a cycle through {cur!r}")
                seen.add(cur)
                cur = self._parents[cur]

    def add(self, name: str, parent: str | None = None) -> None:
        self._parents[name] = parent
        self._check()

    def __contains__(self, name: str) -> bool:
        return name in self._parents

    def __iter__(self) -> Iterator[str]:
        return iter(self._parents)

    @property
    def parents(self) -> Mapping[str, str | None]:
        return dict(self._parents)

    def is_subtype(self, child: str, ancestor: str) -> bool:
        """True if child equals ancestor or descends from it."""
        cur: str | None = child
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self._parents.get(cur)
        return False

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TypeHierarchy) and self._parents == other._parents

    def __repr__(self) -> str:
        return f"TypeHierarchy({self._parents!r})"


@dataclass(frozen=True, order=True)
class ObjectRef:
    name: str
    type: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Variable:
    name: str  # conventionally starts with '?'
    type: str

    def __str__(self) -> str:
        return self.name


Term = Union[ObjectRef, Variable]


class PredicateKind(enum.Enum):
    PHYSICAL = "physical"
    BELIEF = "belief"


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    param_types: tuple[str, ...]
    kind: PredicateKind = PredicateKind.PHYSICAL

    @property
    def arity(self) -> int:
        return len(self.param_types)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    """A predicate applied to terms; ground when all terms are objects."""

    schema: PredicateSchema
    args: tuple[Term, ...]

    def __post_init__(self):
        if len(self.args) != self.schema.arity:
            raise TypeMismatch(
                f"{self.schema.name} expects {self.schema.arity} args, got {len(self.args)}"
            )

    @property
    def is_ground(self) -> bool:
        return all(isinstance(a, ObjectRef) for a in self.args)

    def substitute(self, binding: Mapping[Variable, ObjectRef]) -> "Atom":
        return Atom(self.schema, tuple(binding.get(a, a) if isinstance(a, Variable) else a for a in self.args))

    def variables(self) -> set[Variable]:
        return {a for a in self.args if isinstance(a, Variable)}

    def __str__(self) -> str:
        if not self.args:
            return f"{self.schema.name}()"
        return f"{self.schema.name}({', '.join(str(a) for a in self.args)})"

    def __lt__(self, other: "Atom") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self) -> tuple:
        return (self.schema.name, tuple(str(a) for a in self.args))


GroundAtom = Atom  # alias used where groundness is required by contract


@dataclass(frozen=True)
class Not:
    """Negation, restricted to atoms (STRIPS-style negative literals)."""

    atom: Atom


@dataclass(frozen=True)
class UnknownTest:
    """Satisfied exactly when the belief value of the atom is Unknown."""

    atom: Atom


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class ForAll:
    var: Variable
    body: "Formula"


Formula = Union[Atom, Not, UnknownTest, And, ForAll]


class Belief(Protocol):
    """What formula evaluation needs from a belief state."""

    def has_object(self, name: str) -> bool: ...

    def atom_value(self, atom: Atom) -> TruthValue3: ...

    def objects_of_type(self, type_name: str) -> Sequence[ObjectRef]: ...


def eval_atom(atom: Atom, belief: Belief) -> TruthValue3:
    """Evaluate a ground atom.  Physical atoms are closed-world (absent
    means False); belief atoms are open-world (absent means Unknown)."""
    for arg in atom.args:
        if not isinstance(arg, ObjectRef):
            raise UnknownObject(f"atom {atom} is not ground")
        if not belief.has_object(arg.name):
            raise UnknownObject(f"object {arg.name!r} is not in the belief")
    return belief.atom_value(atom)


def eval_formula(f: Formula, belief: Belief) -> TruthValue3:
    """Strong-Kleene evaluation; forall expands over the current objects."""
    if isinstance(f, Atom):
        return eval_atom(f, belief)
    if isinstance(f, Not):
        return eval_atom(f.atom, belief).negate()
    if isinstance(f, UnknownTest):
        return TruthValue3.from_bool(eval_atom(f.atom, belief).is_unknown)
    if isinstance(f, And):
        return TruthValue3.conjoin(eval_formula(p, belief) for p in f.parts)
    if isinstance(f, ForAll):
        objs = sorted(belief.objects_of_type(f.var.type))
        return TruthValue3.conjoin(
            eval_formula(substitute_formula(f.body, {f.var: o}), belief) for o in objs
        )
    raise TypeError(f"not a formula: {f!r}")


def substitute_formula(f: Formula, binding: Mapping[Variable, ObjectRef]) -> Formula:
    if isinstance(f, Atom):
        return f.substitute(binding)
    if isinstance(f, Not):
        return Not(f.atom.substitute(binding))
    if isinstance(f, UnknownTest):
        return UnknownTest(f.atom.substitute(binding))
    if isinstance(f, And):
        return And(tuple(substitute_formula(p, binding) for p in f.parts))
    if isinstance(f, ForAll):
        inner = {k: v for k, v in binding.items() if k != f.var}
        return ForAll(f.var, substitute_formula(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def formula_literals(f: Formula) -> Iterator[Formula]:
    """Yield the atomic parts (Atom / Not / UnknownTest) of a formula."""
    if isinstance(f, (Atom, Not, UnknownTest)):
        yield f
    elif isinstance(f, And):
        for p in f.parts:
            yield from formula_literals(p)
    elif isinstance(f, ForAll):
        yield from formula_literals(f.body)
    else:
        raise TypeError(f"not a formula: {f!r}")


def formula_variables(f: Formula) -> set[Variable]:
    """Free variables of a formula."""
    if isinstance(f, Atom):
        return f.variables()
    if isinstance(f, Not):
        return f.atom.variables()
    if isinstance(f, UnknownTest):
        return f.atom.variables()
    if isinstance(f, And):
        out: set[Variable] = set()
        for p in f.parts:
            out |= formula_variables(p)
        return out
    if isinstance(f, ForAll):
        return formula_variables(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


class ActionKind(enum.Enum):
    PHYSICAL = "physical"
    OBSERVE = "observe"


@dataclass(frozen=True)
class OperatorSchema:
    """Lifted action.  Observe operators name the atom they observe;
    determinized variants additionally carry the assumed polarity."""

    name: str
    params: tuple[Variable, ...]
    precondition: Formula
    add: frozenset[Atom]
    delete: frozenset[Atom]
    kind: ActionKind = ActionKind.PHYSICAL
    observed: Atom | None = None
    polarity: bool | None = None

    def __post_init__(self):
        declared = set(self.params)
        free = formula_variables(self.precondition)
        for atom in itertools.chain(self.add, self.delete):
            free |= atom.variables()
        if self.observed is not None:
            free |= self.observed.variables()
        undeclared = free - declared
        if undeclared:
            names = ", ".join(sorted(v.name for v in undeclared))
            raise TypeMismatch(f"operator {self.name}: variables not in params: {names}")

    def __str__(self) -> str:
        return f"{self.name}({', '.join(v.name for v in self.params)})"


@dataclass(frozen=True)
class GroundAction:
    """Fully instantiated action."""

    schema_name: str
    args: tuple[ObjectRef, ...]
    precondition: Formula
    add: frozenset[Atom]
    delete: frozenset[Atom]
    kind: ActionKind = ActionKind.PHYSICAL
    observed: Atom | None = None
    polarity: bool | None = None

    def __str__(self) -> str:
        return f"{self.schema_name}({', '.join(o.name for o in self.args)})"

    def sort_key(self) -> tuple:
        return (self.schema_name, tuple(o.name for o in self.args))

    def __lt__(self, other: "GroundAction") -> bool:
        return self.sort_key() < other.sort_key()


def ground(
    schema: OperatorSchema,
    binding: Mapping[Variable, ObjectRef],
    types: TypeHierarchy,
) -> GroundAction:
    """Instantiate a schema with a complete, type-compatible binding."""
    for var in schema.params:
        if var not in binding:
            raise MissingBinding(f"{schema.name}: no binding for {var.name}")
        obj = binding[var]
        if not types.is_subtype(obj.type, var.type):
            raise TypeMismatch(
                f"{schema.name}: {obj.name} has type {obj.type}, expected {var.type}"
            )
    return GroundAction(
        schema_name=schema.name,
        args=tuple(binding[v] for v in schema.params),
        precondition=substitute_formula(schema.precondition, binding),
        add=frozenset(a.substitute(binding) for a in schema.add),
        delete=frozenset(a.substitute(binding) for a in schema.delete),
        kind=schema.kind,
        observed=schema.observed.substitute(binding) if schema.observed else None,
        polarity=schema.polarity,
    )


def enumerate_groundings(
    schema: OperatorSchema,
    objects: Iterable[ObjectRef],
    types: TypeHierarchy,
) -> list[GroundAction]:
    """All type-consistent groundings, ordered lexicographically by the
    argument names (stable across runs)."""
    pool = sorted(objects, key=lambda o: o.name)
    candidates = [[o for o in pool if types.is_subtype(o.type, v.type)] for v in schema.params]
    out = []
    for combo in itertools.product(*candidates):
        out.append(ground(schema, dict(zip(schema.params, combo)), types))
    return out

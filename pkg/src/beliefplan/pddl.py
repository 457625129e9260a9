"""Reader and writer for the ``.bpddl`` dialect.

The dialect is a PDDL subset extended with two annotations: a
``:belief-predicates`` block marking predicates that may be Unknown, and
an ``:observe`` clause on actions that gather information.  Knowledge
fluents (``K<Pred>+`` / ``K<Pred>-``) never appear in source files; they
are generated by the compiler.  Problem files may initialize belief
atoms with ``(unknown ...)`` or ``(not ...)`` markers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import GoalTypeError, ParseError, UndeclaredName
from .model import (
    ActionKind,
    And,
    Atom,
    ForAll,
    Formula,
    Not,
    ObjectRef,
    OperatorSchema,
    PredicateKind,
    PredicateSchema,
    TruthValue3,
    TypeHierarchy,
    UnknownTest,
    Variable,
)


@dataclass
class Domain:
    name: str
    types: TypeHierarchy
    predicates: dict[str, PredicateSchema]
    operators: dict[str, OperatorSchema]

    def predicate(self, name: str) -> PredicateSchema:
        return self.predicates[name]

    @property
    def belief_predicates(self) -> list[PredicateSchema]:
        return [p for p in self.predicates.values() if p.kind is PredicateKind.BELIEF]


@dataclass
class Problem:
    name: str
    domain_name: str
    objects: dict[str, ObjectRef]
    init: dict[Atom, TruthValue3]
    goal: Formula


# ---------------------------------------------------------------------------
# s-expression layer


@dataclass(frozen=True)
class SWord:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    line: int
    col: int


SExpr = SWord | SList


def _tokenize(text: str) -> Iterator[tuple[str, int, int]]:
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            yield text[start:i], line, start_col


def _read_sexprs(text: str) -> list[SExpr]:
    stack: list[list[SExpr]] = [[]]
    positions: list[tuple[int, int]] = []
    last = (1, 1)
    for tok, line, col in _tokenize(text):
        last = (line, col)
        if tok == "(":
            stack.append([])
            positions.append((line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            items = stack.pop()
            pline, pcol = positions.pop()
            stack[-1].append(SList(tuple(items), pline, pcol))
        else:
            stack[-1].append(SWord(tok, line, col))
    if len(stack) > 1:
        line, col = positions[-1]
        raise ParseError("unclosed '('", line, col, expected="')'")
    _ = last
    return stack[0]


def _as_word(e: SExpr, what: str) -> SWord:
    if not isinstance(e, SWord):
        raise ParseError(f"expected {what}", e.line, e.col, expected=what)
    return e


def _as_list(e: SExpr, what: str) -> SList:
    if not isinstance(e, SList):
        raise ParseError(f"expected {what}", e.line, e.col, expected=what)
    return e


def _keyword(e: SExpr) -> str | None:
    if isinstance(e, SWord):
        return e.text.lower()
    return None


def _parse_typed_names(items: Sequence[SExpr], *, require_type: bool, what: str) -> list[tuple[SWord, str | None]]:
    """Parse ``a b - T c - S`` lists; names without a type get None."""
    out: list[tuple[SWord, str | None]] = []
    pending: list[SWord] = []
    i = 0
    while i < len(items):
        word = _as_word(items[i], what)
        if word.text == "-":
            if not pending:
                raise ParseError("dangling '-' in typed list", word.line, word.col)
            if i + 1 >= len(items):
                raise ParseError("missing type after '-'", word.line, word.col, expected="type name")
            type_word = _as_word(items[i + 1], "type name")
            for name in pending:
                out.append((name, type_word.text))
            pending = []
            i += 2
        else:
            pending.append(word)
            i += 1
    for name in pending:
        if require_type:
            raise ParseError(f"{name.text!r} has no declared type", name.line, name.col, expected="'- <type>'")
        out.append((name, None))
    return out


# ---------------------------------------------------------------------------
# domain parsing


class _FormulaReader:
    """Parses formulas and literals against a declared vocabulary."""

    def __init__(self, domain_types: TypeHierarchy, predicates: dict[str, PredicateSchema]):
        self.types = domain_types
        self.predicates = predicates

    def atom(self, e: SExpr, scope: dict[str, Term_]) -> Atom:
        lst = _as_list(e, "atom")
        if not lst.items:
            raise ParseError("empty atom", lst.line, lst.col, expected="predicate name")
        head = _as_word(lst.items[0], "predicate name")
        schema = self.predicates.get(head.text)
        if schema is None:
            raise UndeclaredName(f"undeclared predicate {head.text!r}", head.line, head.col)
        args = []
        if len(lst.items) - 1 != schema.arity:
            raise ParseError(
                f"{schema.name} takes {schema.arity} arguments, got {len(lst.items) - 1}",
                lst.line,
                lst.col,
            )
        for expected_type, item in zip(schema.param_types, lst.items[1:]):
            word = _as_word(item, "argument")
            term = scope.get(word.text)
            if term is None:
                raise UndeclaredName(f"undeclared name {word.text!r}", word.line, word.col)
            if not self.types.is_subtype(term.type, expected_type):
                raise ParseError(
                    f"{word.text} has type {term.type}, expected {expected_type}",
                    word.line,
                    word.col,
                )
            args.append(term)
        return Atom(schema, tuple(args))

    def formula(self, e: SExpr, scope: dict[str, Term_]) -> Formula:
        lst = _as_list(e, "formula")
        if not lst.items:
            return And(())
        head = _keyword(lst.items[0])
        if head == "and":
            return And(tuple(self.formula(p, scope) for p in lst.items[1:]))
        if head == "not":
            if len(lst.items) != 2:
                raise ParseError("'not' takes one atom", lst.line, lst.col)
            return Not(self.atom(lst.items[1], scope))
        if head == "unknown":
            if len(lst.items) != 2:
                raise ParseError("'unknown' takes one atom", lst.line, lst.col)
            atom = self.atom(lst.items[1], scope)
            if atom.schema.kind is not PredicateKind.BELIEF:
                raise ParseError(
                    f"'unknown' applies only to belief predicates, not {atom.schema.name}",
                    lst.line,
                    lst.col,
                )
            return UnknownTest(atom)
        if head == "forall":
            if len(lst.items) != 3:
                raise ParseError("'forall' takes a variable list and a body", lst.line, lst.col)
            var_list = _as_list(lst.items[1], "variable list")
            typed = _parse_typed_names(var_list.items, require_type=True, what="variable")
            if len(typed) != 1:
                raise ParseError("'forall' binds exactly one variable", var_list.line, var_list.col)
            word, type_name = typed[0]
            self._check_type(word, type_name)
            var = Variable(word.text, type_name)  # type: ignore[arg-type]
            inner = dict(scope)
            inner[var.name] = var
            return ForAll(var, self.formula(lst.items[2], inner))
        return self.atom(lst, scope)

    def _check_type(self, word: SWord, type_name: str | None) -> None:
        if type_name is None or type_name not in self.types:
            raise UndeclaredName(f"undeclared type {type_name!r}", word.line, word.col)


Term_ = ObjectRef | Variable


def parse_domain(text: str) -> Domain:
    """Parse a domain document; raises positioned ParseError diagnostics."""
    top = _read_sexprs(text)
    if len(top) != 1:
        raise ParseError("expected a single (define ...) form", 1, 1, expected="(define (domain ...))")
    form = _as_list(top[0], "(define ...)")
    if not form.items or _keyword(form.items[0]) != "define":
        raise ParseError("expected (define ...)", form.line, form.col, expected="define")
    if len(form.items) < 2:
        raise ParseError("missing (domain <name>)", form.line, form.col)
    head = _as_list(form.items[1], "(domain <name>)")
    if len(head.items) != 2 or _keyword(head.items[0]) != "domain":
        raise ParseError("expected (domain <name>)", head.line, head.col)
    name = _as_word(head.items[1], "domain name").text

    types = TypeHierarchy()
    predicates: dict[str, PredicateSchema] = {}
    operators: dict[str, OperatorSchema] = {}
    seen_types = False

    for section in form.items[2:]:
        sec = _as_list(section, "domain section")
        if not sec.items:
            raise ParseError("empty section", sec.line, sec.col)
        key = _keyword(sec.items[0])
        if key == ":types":
            seen_types = True
            for word, parent in _parse_typed_names(sec.items[1:], require_type=False, what="type name"):
                if parent is not None and parent not in types:
                    types.add(parent, None)
                types.add(word.text, parent)
        elif key in (":predicates", ":belief-predicates"):
            kind = PredicateKind.BELIEF if key == ":belief-predicates" else PredicateKind.PHYSICAL
            for entry in sec.items[1:]:
                schema = _parse_predicate(entry, types, kind)
                if schema.name in predicates:
                    raise ParseError(f"duplicate predicate {schema.name!r}", sec.line, sec.col)
                predicates[schema.name] = schema
        elif key == ":action":
            op = _parse_action(sec, types, predicates)
            if op.name in operators:
                raise ParseError(f"duplicate action {op.name!r}", sec.line, sec.col)
            operators[op.name] = op
        else:
            raise ParseError(f"unknown section {key!r}", sec.line, sec.col)
    if not seen_types:
        raise ParseError("domain has no :types section", form.line, form.col, expected=":types")
    return Domain(name=name, types=types, predicates=predicates, operators=operators)


def _parse_predicate(e: SExpr, types: TypeHierarchy, kind: PredicateKind) -> PredicateSchema:
    lst = _as_list(e, "predicate declaration")
    if not lst.items:
        raise ParseError("empty predicate declaration", lst.line, lst.col)
    head = _as_word(lst.items[0], "predicate name")
    typed = _parse_typed_names(lst.items[1:], require_type=True, what="parameter")
    for word, type_name in typed:
        if not word.text.startswith("?"):
            raise ParseError("predicate parameters must be variables", word.line, word.col)
        if type_name not in types:
            raise UndeclaredName(f"undeclared type {type_name!r}", word.line, word.col)
    return PredicateSchema(head.text, tuple(t for _, t in typed), kind)  # type: ignore[misc]


def _parse_action(
    sec: SList, types: TypeHierarchy, predicates: dict[str, PredicateSchema]
) -> OperatorSchema:
    if len(sec.items) < 2:
        raise ParseError("action has no name", sec.line, sec.col, expected="action name")
    name = _as_word(sec.items[1], "action name").text
    clauses: dict[str, SExpr] = {}
    i = 2
    while i < len(sec.items):
        key_word = _as_word(sec.items[i], "clause keyword")
        key = key_word.text.lower()
        if key == ":effects":
            key = ":effect"
        if not key.startswith(":"):
            raise ParseError(f"expected a clause keyword, got {key_word.text!r}", key_word.line, key_word.col)
        if i + 1 >= len(sec.items):
            raise ParseError(f"clause {key} has no body", key_word.line, key_word.col, expected="clause body")
        if key in clauses:
            raise ParseError(f"duplicate clause {key}", key_word.line, key_word.col)
        clauses[key] = sec.items[i + 1]
        i += 2

    params_expr = clauses.get(":parameters")
    if params_expr is None:
        raise ParseError(f"action {name} has no :parameters", sec.line, sec.col, expected=":parameters")
    typed = _parse_typed_names(_as_list(params_expr, "parameter list").items, require_type=True, what="parameter")
    params = []
    scope: dict[str, Term_] = {}
    for word, type_name in typed:
        if not word.text.startswith("?"):
            raise ParseError("action parameters must be variables", word.line, word.col)
        if type_name not in types:
            raise UndeclaredName(f"undeclared type {type_name!r}", word.line, word.col)
        var = Variable(word.text, type_name)  # type: ignore[arg-type]
        params.append(var)
        scope[var.name] = var

    reader = _FormulaReader(types, predicates)
    precondition: Formula = And(())
    if ":precondition" in clauses:
        precondition = reader.formula(clauses[":precondition"], scope)

    add: set[Atom] = set()
    delete: set[Atom] = set()
    if ":effect" in clauses:
        add, delete = _parse_effect(clauses[":effect"], reader, scope)

    observed = None
    kind = ActionKind.PHYSICAL
    if ":observe" in clauses:
        kind = ActionKind.OBSERVE
        observed = reader.atom(clauses[":observe"], scope)
        if observed.schema.kind is not PredicateKind.BELIEF:
            obs = _as_list(clauses[":observe"], "observed atom")
            raise ParseError(
                f"observed predicate {observed.schema.name!r} is not a belief predicate",
                obs.line,
                obs.col,
            )
    return OperatorSchema(
        name=name,
        params=tuple(params),
        precondition=precondition,
        add=frozenset(add),
        delete=frozenset(delete),
        kind=kind,
        observed=observed,
    )


def _parse_effect(e: SExpr, reader: _FormulaReader, scope: dict[str, Term_]) -> tuple[set[Atom], set[Atom]]:
    lst = _as_list(e, "effect")
    items: Sequence[SExpr]
    if lst.items and _keyword(lst.items[0]) == "and":
        items = lst.items[1:]
    else:
        items = [lst] if lst.items else []
    add: set[Atom] = set()
    delete: set[Atom] = set()
    for item in items:
        ilst = _as_list(item, "effect literal")
        if ilst.items and _keyword(ilst.items[0]) == "not":
            if len(ilst.items) != 2:
                raise ParseError("'not' takes one atom", ilst.line, ilst.col)
            delete.add(reader.atom(ilst.items[1], scope))
        else:
            add.add(reader.atom(ilst, scope))
    return add, delete


# ---------------------------------------------------------------------------
# problem parsing


def parse_problem(text: str, domain: Domain) -> Problem:
    top = _read_sexprs(text)
    if len(top) != 1:
        raise ParseError("expected a single (define ...) form", 1, 1, expected="(define (problem ...))")
    form = _as_list(top[0], "(define ...)")
    if not form.items or _keyword(form.items[0]) != "define":
        raise ParseError("expected (define ...)", form.line, form.col, expected="define")
    if len(form.items) < 2:
        raise ParseError("missing (problem <name>)", form.line, form.col)
    head = _as_list(form.items[1], "(problem <name>)")
    if len(head.items) != 2 or _keyword(head.items[0]) != "problem":
        raise ParseError("expected (problem <name>)", head.line, head.col)
    name = _as_word(head.items[1], "problem name").text

    objects: dict[str, ObjectRef] = {}
    init: dict[Atom, TruthValue3] = {}
    goal: Formula | None = None
    domain_name: str | None = None
    reader = _FormulaReader(domain.types, domain.predicates)

    for section in form.items[2:]:
        sec = _as_list(section, "problem section")
        if not sec.items:
            raise ParseError("empty section", sec.line, sec.col)
        key = _keyword(sec.items[0])
        if key == ":domain":
            if len(sec.items) != 2:
                raise ParseError("(:domain <name>)", sec.line, sec.col)
            domain_name = _as_word(sec.items[1], "domain name").text
            if domain_name != domain.name:
                raise ParseError(
                    f"problem is for domain {domain_name!r}, got {domain.name!r}",
                    sec.line,
                    sec.col,
                )
        elif key == ":objects":
            for word, type_name in _parse_typed_names(sec.items[1:], require_type=True, what="object"):
                if type_name not in domain.types:
                    raise UndeclaredName(f"undeclared type {type_name!r}", word.line, word.col)
                if word.text in objects:
                    raise ParseError(f"duplicate object {word.text!r}", word.line, word.col)
                objects[word.text] = ObjectRef(word.text, type_name)  # type: ignore[arg-type]
        elif key == ":init":
            scope: dict[str, Term_] = dict(objects)
            for entry in sec.items[1:]:
                atom, value = _parse_init_entry(entry, reader, scope)
                if atom in init and init[atom] is not value:
                    raise ParseError("conflicting init values for one atom", sec.line, sec.col)
                init[atom] = value
        elif key == ":goal":
            if len(sec.items) != 2:
                raise ParseError("(:goal <formula>)", sec.line, sec.col)
            try:
                goal = reader.formula(sec.items[1], dict(objects))
            except UndeclaredName as exc:
                raise GoalTypeError(str(exc)) from exc
            except ParseError as exc:
                raise GoalTypeError(str(exc)) from exc
        else:
            raise ParseError(f"unknown section {key!r}", sec.line, sec.col)

    if goal is None:
        raise ParseError("problem has no :goal", form.line, form.col, expected=":goal")
    return Problem(
        name=name,
        domain_name=domain_name or domain.name,
        objects=objects,
        init=init,
        goal=goal,
    )


def _parse_init_entry(e: SExpr, reader: _FormulaReader, scope: dict[str, Term_]) -> tuple[Atom, TruthValue3]:
    lst = _as_list(e, "init atom")
    head = _keyword(lst.items[0]) if lst.items else None
    if head == "not":
        if len(lst.items) != 2:
            raise ParseError("'not' takes one atom", lst.line, lst.col)
        atom = reader.atom(lst.items[1], scope)
        if atom.schema.kind is not PredicateKind.BELIEF:
            raise ParseError(
                "physical init atoms are closed-world; omit them instead of negating",
                lst.line,
                lst.col,
            )
        return atom, TruthValue3.FALSE
    if head == "unknown":
        if len(lst.items) != 2:
            raise ParseError("'unknown' takes one atom", lst.line, lst.col)
        atom = reader.atom(lst.items[1], scope)
        if atom.schema.kind is not PredicateKind.BELIEF:
            raise ParseError("'unknown' applies only to belief predicates", lst.line, lst.col)
        return atom, TruthValue3.UNKNOWN
    atom = reader.atom(lst, scope)
    return atom, TruthValue3.TRUE


def parse_goal(text: str, domain: Domain, objects: dict[str, ObjectRef]) -> Formula:
    """Parse a bare goal formula (the structured goal entry point)."""
    top = _read_sexprs(text)
    if len(top) != 1:
        raise ParseError("expected a single formula", 1, 1, expected="(...)")
    reader = _FormulaReader(domain.types, domain.predicates)
    try:
        return reader.formula(top[0], dict(objects))
    except UndeclaredName as exc:
        raise GoalTypeError(str(exc)) from exc


# ---------------------------------------------------------------------------
# serialization


def _format_typed(terms: Sequence[Variable | ObjectRef]) -> str:
    return " ".join(f"{t.name} - {t.type}" for t in terms)


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return f"({atom.schema.name})"
    return f"({atom.schema.name} {' '.join(a.name for a in atom.args)})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return format_atom(f)
    if isinstance(f, Not):
        return f"(not {format_atom(f.atom)})"
    if isinstance(f, UnknownTest):
        return f"(unknown {format_atom(f.atom)})"
    if isinstance(f, And):
        if not f.parts:
            return "(and)"
        return f"(and {' '.join(format_formula(p) for p in f.parts)})"
    if isinstance(f, ForAll):
        return f"(forall ({f.var.name} - {f.var.type}) {format_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _serialize_operator(op: OperatorSchema) -> str:
    lines = [f"(:action {op.name}"]
    lines.append(f" :parameters ({_format_typed(op.params)})")
    lines.append(f" :precondition {format_formula(op.precondition)}")
    literals = [format_atom(a) for a in sorted(op.add)]
    literals += [f"(not {format_atom(a)})" for a in sorted(op.delete)]
    if literals:
        lines.append(f" :effect (and {' '.join(literals)})")
    if op.kind is ActionKind.OBSERVE and op.polarity is None and op.observed is not None:
        lines.append(f" :observe {format_atom(op.observed)}")
    return "\n".join(lines) + ")"


def serialize_domain(domain: Domain) -> str:
    """Deterministic text form; reparses to an equal structure."""
    out = [f"(define (domain {domain.name})"]
    # roots must trail the typed groups: a bare name before "x - parent"
    # would be folded into that group on reparse
    parents = domain.types.parents
    type_lines = [f"{n} - {parents[n]}" for n in sorted(domain.types) if parents[n] is not None]
    type_lines += [n for n in sorted(domain.types) if parents[n] is None]
    out.append("(:types " + "\n        ".join(type_lines) + ")")
    physical = [p for p in domain.predicates.values() if p.kind is PredicateKind.PHYSICAL]
    belief = [p for p in domain.predicates.values() if p.kind is PredicateKind.BELIEF]
    if physical:
        out.append("(:predicates\n  " + "\n  ".join(_format_predicate(p) for p in physical) + ")")
    if belief:
        out.append("(:belief-predicates\n  " + "\n  ".join(_format_predicate(p) for p in belief) + ")")
    for op in domain.operators.values():
        out.append(_serialize_operator(op))
    out.append(")")
    return "\n\n".join(out) + "\n"


def _format_predicate(p: PredicateSchema) -> str:
    params = " ".join(f"?a{i} - {t}" for i, t in enumerate(p.param_types))
    return f"({p.name}{' ' + params if params else ''})"


def serialize_problem(problem: Problem) -> str:
    out = [f"(define (problem {problem.name})", f"(:domain {problem.domain_name})"]
    objs = sorted(problem.objects.values(), key=lambda o: o.name)
    out.append("(:objects\n  " + "\n  ".join(f"{o.name} - {o.type}" for o in objs) + ")")
    entries = []
    for atom in sorted(problem.init, key=lambda a: a.sort_key()):
        value = problem.init[atom]
        if value is TruthValue3.TRUE:
            entries.append(format_atom(atom))
        elif value is TruthValue3.FALSE:
            entries.append(f"(not {format_atom(atom)})")
        else:
            entries.append(f"(unknown {format_atom(atom)})")
    out.append("(:init\n  " + "\n  ".join(entries) + ")")
    out.append(f"(:goal {format_formula(problem.goal)})")
    out.append(")")
    return "\n\n".join(out) + "\n"

"""Knowledge-fluent compilation and determinization tests."""

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefplan.compiler import (
    CompiledDomain,
    believes_false,
    believes_true,
    compile_predicates,
    determinize,
    is_known,
    is_unknown,
    lower_goal,
    negative_name,
    positive_name,
)
from beliefplan.errors import CompileError, ObserveWithoutTarget, UnknownInGoal
from beliefplan.model import (
    ActionKind,
    And,
    Atom,
    ForAll,
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
)
from beliefplan.pddl import Domain, parse_domain, serialize_domain

GOLDEN = Path(__file__).parent / "golden"
OBSERVE_DEMO = parse_domain((GOLDEN / "observe_emptiness.bpddl").read_text())


def test_k_pair_names():
    assert positive_name("Empty") == "KEmpty+"
    assert negative_name("Empty") == "KEmpty-"


def test_belief_predicate_becomes_k_pair():
    compiled = compile_predicates(OBSERVE_DEMO)
    assert "Empty" not in compiled.domain.predicates
    pos, neg = compiled.fluents["Empty"]
    assert pos.name == "KEmpty+" and neg.name == "KEmpty-"
    assert pos.param_types == neg.param_types == ("object",)
    assert pos.kind is PredicateKind.PHYSICAL


def test_identity_compilation_without_belief_predicates():
    d = parse_domain((GOLDEN / "pick_intro.bpddl").read_text())
    compiled = determinize(d)
    assert compiled.fluents == {}
    assert compiled.variants == {}
    assert compiled.domain.predicates == d.predicates
    assert compiled.domain.operators == d.operators


def _mini_domain(*, observe_pre_unknown: bool) -> Domain:
    types = TypeHierarchy({"object": None})
    belief = PredicateSchema("Wet", ("object",), PredicateKind.BELIEF)
    seen = PredicateSchema("Seen", ("object",), PredicateKind.PHYSICAL)
    v = Variable("?x", "object")
    pre_parts: tuple = (Atom(seen, (v,)),)
    if observe_pre_unknown:
        pre_parts += (UnknownTest(Atom(belief, (v,))),)
    look = OperatorSchema(
        name="LookAt",
        params=(v,),
        precondition=And(pre_parts),
        add=frozenset(),
        delete=frozenset(),
        kind=ActionKind.OBSERVE,
        observed=Atom(belief, (v,)),
    )
    dry = OperatorSchema(
        name="Dry",
        params=(v,),
        precondition=Atom(belief, (v,)),
        add=frozenset({Atom(seen, (v,))}),
        delete=frozenset({Atom(belief, (v,))}),
    )
    return Domain(
        name="mini",
        types=types,
        predicates={"Wet": belief, "Seen": seen},
        operators={"LookAt": look, "Dry": dry},
    )


def test_unknown_precondition_compiles_to_both_unset():
    compiled = compile_predicates(_mini_domain(observe_pre_unknown=True))
    look = compiled.domain.operators["LookAt"]
    pos, neg = compiled.fluents["Wet"]
    v = Variable("?x", "object")
    expected = And((Not(Atom(pos, (v,))), Not(Atom(neg, (v,)))))
    assert expected in look.precondition.parts


def test_positive_and_negative_belief_literals_rewrite():
    compiled = compile_predicates(_mini_domain(observe_pre_unknown=False))
    dry = compiled.domain.operators["Dry"]
    pos, neg = compiled.fluents["Wet"]
    v = Variable("?x", "object")
    # precondition Wet -> KWet+
    assert dry.precondition == Atom(pos, (v,))
    # effect "delete Wet" -> now known false
    assert Atom(neg, (v,)) in dry.add
    assert Atom(pos, (v,)) in dry.delete


def test_determinize_splits_observe_into_two_variants():
    compiled = determinize(OBSERVE_DEMO)
    assert compiled.variants["ObserveEmptiness"] == ("ObserveEmptiness+", "ObserveEmptiness-")
    plus = compiled.domain.operators["ObserveEmptiness+"]
    minus = compiled.domain.operators["ObserveEmptiness-"]
    assert plus.precondition == minus.precondition
    pos, neg = compiled.fluents["Empty"]
    o = Variable("?o", "object")
    assert Not(Atom(pos, (o,))) in plus.precondition.parts
    assert Not(Atom(neg, (o,))) in plus.precondition.parts
    assert plus.add == frozenset({Atom(pos, (o,))})
    assert minus.add == frozenset({Atom(neg, (o,))})
    assert plus.delete == minus.delete == frozenset()
    assert compiled.variant_base["ObserveEmptiness+"] == "ObserveEmptiness"


def test_determinized_serialization_matches_golden():
    compiled = determinize(OBSERVE_DEMO)
    golden = (GOLDEN / "observe_emptiness_determinized.pddl").read_text()
    assert serialize_domain(compiled.domain) == golden


def test_drawer_pair_reproduced_from_single_declared_action():
    text = """
(define (domain drawers)
(:types Robot Container - BaseObject)
(:predicates (DrawerOpen ?c - Container) (Reachable ?r - Robot ?c - Container))
(:belief-predicates (ContainerEmpty ?c - Container))
(:action ObserveDrawer
 :parameters (?robot - Robot ?container - Container)
 :precondition (and (DrawerOpen ?container) (Reachable ?robot ?container)
                    (unknown (ContainerEmpty ?container)))
 :observe (ContainerEmpty ?container))
)
"""
    compiled = determinize(parse_domain(text))
    assert set(compiled.variants["ObserveDrawer"]) == {"ObserveDrawer+", "ObserveDrawer-"}
    plus = compiled.domain.operators["ObserveDrawer+"]
    minus = compiled.domain.operators["ObserveDrawer-"]
    c = Variable("?container", "Container")
    pos, neg = compiled.fluents["ContainerEmpty"]
    assert plus.add == frozenset({Atom(pos, (c,))})
    assert minus.add == frozenset({Atom(neg, (c,))})
    # the explicit unknown-precondition is not duplicated by the split
    literals = list(plus.precondition.parts)
    assert literals.count(Not(Atom(pos, (c,)))) == 1
    assert literals.count(Not(Atom(neg, (c,)))) == 1


def test_physical_actions_pass_through_unchanged():
    d = parse_domain((GOLDEN / "observe_emptiness.bpddl").read_text())
    on = d.predicates["On"]
    hand = d.predicates["HandEmpty"]
    o = Variable("?o", "object")
    s = Variable("?s", "surface")
    pick = OperatorSchema(
        name="Pick",
        params=(o, s),
        precondition=And((Atom(on, (o, s)), Atom(hand, ()))),
        add=frozenset(),
        delete=frozenset({Atom(on, (o, s)), Atom(hand, ())}),
    )
    d.operators["Pick"] = pick
    compiled = determinize(d)
    assert compiled.domain.operators["Pick"] == pick


def test_action_count_is_physical_plus_twice_observe():
    d = _mini_domain(observe_pre_unknown=True)
    compiled = determinize(d)
    n_physical = sum(1 for op in d.operators.values() if op.kind is ActionKind.PHYSICAL)
    n_observe = sum(1 for op in d.operators.values() if op.kind is ActionKind.OBSERVE)
    assert len(compiled.domain.operators) == n_physical + 2 * n_observe


def test_observe_with_effects_is_rejected():
    d = _mini_domain(observe_pre_unknown=False)
    v = Variable("?x", "object")
    seen = d.predicates["Seen"]
    bad = OperatorSchema(
        name="LookAt",
        params=(v,),
        precondition=And(()),
        add=frozenset({Atom(seen, (v,))}),
        delete=frozenset(),
        kind=ActionKind.OBSERVE,
        observed=Atom(d.predicates["Wet"], (v,)),
    )
    d.operators["LookAt"] = bad
    with pytest.raises(CompileError):
        compile_predicates(d)


def test_observe_without_target_is_rejected():
    d = _mini_domain(observe_pre_unknown=False)
    v = Variable("?x", "object")
    bad = OperatorSchema(
        name="LookAt",
        params=(v,),
        precondition=And(()),
        add=frozenset(),
        delete=frozenset(),
        kind=ActionKind.OBSERVE,
        observed=None,
    )
    d.operators["LookAt"] = bad
    with pytest.raises(ObserveWithoutTarget):
        compile_predicates(d)


def test_reserved_k_name_collision_is_rejected():
    types = TypeHierarchy({"object": None})
    belief = PredicateSchema("Empty", ("object",), PredicateKind.BELIEF)
    taken = PredicateSchema("KEmpty+", ("object",), PredicateKind.PHYSICAL)
    d = Domain("clash", types, {"Empty": belief, "KEmpty+": taken}, {})
    with pytest.raises(CompileError):
        compile_predicates(d)


# ---------------------------------------------------------------------------
# goal lowering


def _drawer_goal_fixture():
    types = TypeHierarchy({"Container": None, "Movable": None})
    empty = PredicateSchema("Empty", ("Container",), PredicateKind.BELIEF)
    inside = PredicateSchema("Inside", ("Movable", "Container"), PredicateKind.PHYSICAL)
    d = Domain("g", types, {"Empty": empty, "Inside": inside}, {})
    return d, empty, inside


def test_goal_known_true_lowering():
    d, empty, _ = _drawer_goal_fixture()
    compiled = compile_predicates(d)
    drawer = ObjectRef("drawer1", "Container")
    lowered = lower_goal(Atom(empty, (drawer,)), compiled)
    assert lowered == Atom(compiled.fluents["Empty"][0], (drawer,))


def test_goal_physical_atom_passes_through():
    d, _, inside = _drawer_goal_fixture()
    compiled = compile_predicates(d)
    block = ObjectRef("block1", "Movable")
    box = ObjectRef("box1", "Container")
    goal = Atom(inside, (block, box))
    assert lower_goal(goal, compiled) == goal


def test_goal_negative_belief_literal_lowers_to_known_false():
    d, empty, _ = _drawer_goal_fixture()
    compiled = compile_predicates(d)
    drawer = ObjectRef("drawer1", "Container")
    lowered = lower_goal(Not(Atom(empty, (drawer,))), compiled)
    assert lowered == Atom(compiled.fluents["Empty"][1], (drawer,))


def test_goal_forall_lowers_recursively():
    d, empty, _ = _drawer_goal_fixture()
    compiled = compile_predicates(d)
    v = Variable("?c", "Container")
    lowered = lower_goal(ForAll(v, Atom(empty, (v,))), compiled)
    assert lowered == ForAll(v, Atom(compiled.fluents["Empty"][0], (v,)))


def test_unknown_in_goal_is_rejected():
    d, empty, _ = _drawer_goal_fixture()
    compiled = compile_predicates(d)
    drawer = ObjectRef("drawer1", "Container")
    with pytest.raises(UnknownInGoal):
        lower_goal(And((UnknownTest(Atom(empty, (drawer,))),)), compiled)


# ---------------------------------------------------------------------------
# four-predicate read-only views


class _Valuation:
    def __init__(self, true_atoms):
        self.true_atoms = set(true_atoms)

    def atom_value(self, atom):
        return TruthValue3.from_bool(atom in self.true_atoms)


def test_four_views_derive_from_k_pair():
    d, empty, _ = _drawer_goal_fixture()
    compiled = compile_predicates(d)
    drawer = ObjectRef("drawer1", "Container")
    atom = Atom(empty, (drawer,))
    pos, neg = compiled.pair(atom)

    b = _Valuation([])
    assert is_unknown(b, compiled, atom) and not is_known(b, compiled, atom)
    b = _Valuation([pos])
    assert believes_true(b, compiled, atom) and is_known(b, compiled, atom)
    assert not believes_false(b, compiled, atom)
    b = _Valuation([neg])
    assert believes_false(b, compiled, atom) and is_known(b, compiled, atom)


# ---------------------------------------------------------------------------
# structural invariants


def _compiled_corpus():
    out = [determinize(OBSERVE_DEMO), determinize(_mini_domain(observe_pre_unknown=True))]
    out.append(determinize(parse_domain((GOLDEN / "pick_intro.bpddl").read_text())))
    return out


def test_no_operator_adds_both_polarities():
    for compiled in _compiled_corpus():
        for op in compiled.domain.operators.values():
            names = {a.schema.name: a for a in op.add}
            for pred, (pos, neg) in compiled.fluents.items():
                both = [a for a in op.add if a.schema.name in (pos.name, neg.name)]
                by_args = {}
                for a in both:
                    by_args.setdefault(a.args, set()).add(a.schema.name)
                for args, found in by_args.items():
                    assert found != {pos.name, neg.name}, (op.name, pred, args)
        _ = names


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_no_operator_adds_both_polarities_random_domains(data):
    """Random domains with random belief-effect patterns keep exclusion."""
    n_beliefs = data.draw(st.integers(1, 3))
    types = TypeHierarchy({"object": None})
    v = Variable("?x", "object")
    predicates = {}
    beliefs = []
    for i in range(n_beliefs):
        b = PredicateSchema(f"B{i}", ("object",), PredicateKind.BELIEF)
        predicates[b.name] = b
        beliefs.append(b)
    phys = PredicateSchema("P", ("object",), PredicateKind.PHYSICAL)
    predicates["P"] = phys
    operators = {}
    n_ops = data.draw(st.integers(1, 4))
    for j in range(n_ops):
        adds, dels = set(), set()
        for b in beliefs:
            mode = data.draw(st.sampled_from(["none", "add", "delete"]))
            if mode == "add":
                adds.add(Atom(b, (v,)))
            elif mode == "delete":
                dels.add(Atom(b, (v,)))
        operators[f"Op{j}"] = OperatorSchema(
            name=f"Op{j}",
            params=(v,),
            precondition=And(()),
            add=frozenset(adds),
            delete=frozenset(dels),
        )
    d = Domain("rand", types, predicates, operators)
    compiled = determinize(d)
    for op in compiled.domain.operators.values():
        for pred, (pos, neg) in compiled.fluents.items():
            pos_args = {a.args for a in op.add if a.schema == pos}
            neg_args = {a.args for a in op.add if a.schema == neg}
            assert not (pos_args & neg_args)


# ---------------------------------------------------------------------------
# reachability soundness (brute-force BFS over ground compiled states)


def _eval_ground_condition(f, state) -> bool:
    if isinstance(f, Atom):
        return f in state
    if isinstance(f, Not):
        return f.atom not in state
    if isinstance(f, And):
        return all(_eval_ground_condition(p, state) for p in f.parts)
    raise TypeError(f"unsupported precondition node: {f!r}")


def test_reachable_states_never_hold_both_polarities():
    compiled = determinize(OBSERVE_DEMO)
    objects = [
        ObjectRef("cup1", "object"),
        ObjectRef("cup2", "object"),
        ObjectRef("table", "surface"),
    ]
    on = compiled.domain.predicates["On"]
    hand = compiled.domain.predicates["HandEmpty"]
    init = frozenset(
        {
            Atom(on, (objects[0], objects[2])),
            Atom(on, (objects[1], objects[2])),
            Atom(hand, ()),
        }
    )
    actions = []
    for op in compiled.domain.operators.values():
        actions.extend(enumerate_groundings(op, objects, compiled.domain.types))

    pairs = [compiled.pair(Atom(OBSERVE_DEMO.predicates["Empty"], (o,)))
             for o in objects if o.type == "object"]

    frontier = [init]
    seen = {init}
    for _ in range(8):
        nxt = []
        for state in frontier:
            for act in actions:
                if not _eval_ground_condition(act.precondition, state):
                    continue
                succ = frozenset((state - act.delete) | act.add)
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
        frontier = nxt
    assert len(seen) > 1
    for state in seen:
        for pos_atom, neg_atom in pairs:
            assert not (pos_atom in state and neg_atom in state)

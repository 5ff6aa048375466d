"""
Type checking of messages, processes, networks and reachable states.
"""
from collections import ChainMap

import pytest

from app.models.ast_model import (
    NIL, AgentCall, AgentDef, CInput, Located, MultisetLit, Near, Output, ParN, Pattern,
    SelectorApp, Var,
)
from app.models.reduction_model import Limits, Mode
from app.models.type_model import (
    AMBIENT, LOC, Arrow, Base, ChanB, ChanC, MultisetT, Product, TypeEnv,
)
from app.services.congruence_service import denote
from app.services.names_service import free_names
from app.services.parser_service import parse_program
from app.services.protocol_service import gen_hierarchical, hierarchy_spec
from app.services.reduction_service import initial_state, state_graph, successors
from app.services.typesys_service import (
    check_network, check_process, check_state, natural_env, type_of_message,
    typecheck_program,
)
from app.utils.errors import TypeCheckError
from tests.generators import ill_typed, typed_program


def env(**names):
    return TypeEnv(ChainMap(names))


class TestMessages:
    def test_variable(self):
        assert type_of_message(env(x=LOC), Var("x")) == LOC

    def test_multiset_literal_has_exact_arity(self):
        channel = Base("ch")
        literal = MultisetLit.of([Var("a"), Var("a"), Var("a")])
        assert type_of_message(env(a=channel), literal) == MultisetT(channel, 3)

    def test_selector_arity_mismatch(self):
        base = Base("B")
        scope = TypeEnv(ChainMap({"a": base, "b": base, "c": base}),
                        {"g": Arrow(MultisetT(base, 2), base)})
        literal = MultisetLit.of([Var("a"), Var("b"), Var("c")])
        with pytest.raises(TypeCheckError, match="expects 2 elements"):
            type_of_message(scope, SelectorApp("g", literal))
        pair = MultisetLit.of([Var("a"), Var("b")])
        assert type_of_message(scope, SelectorApp("g", pair)) == base

    def test_disagreeing_elements(self):
        with pytest.raises(TypeCheckError, match="disagree"):
            type_of_message(env(a=AMBIENT, l=LOC), MultisetLit.of([Var("a"), Var("l")]))

    def test_unbound_name(self):
        with pytest.raises(TypeCheckError, match="unbound name"):
            type_of_message(env(), Var("ghost"))

    def test_tuples_are_products(self):
        program = parse_program("net = l::[ a!<(m, n)>.0 ]")
        scope = natural_env(program)
        message = program.network.process.msg
        assert type_of_message(scope, message) == Product((AMBIENT, AMBIENT))


class TestProcesses:
    def test_output_on_broadcast_channel(self):
        check_process(env(a=ChanB(LOC), m=LOC), frozenset(), Output("a", Var("m"), NIL))

    def test_collection_input_needs_a_collection_channel(self):
        proc = CInput("a", Pattern(("x",), Var("x")), "S", NIL)
        with pytest.raises(TypeCheckError, match="needs a C<T>"):
            check_process(env(a=ChanB(AMBIENT)), frozenset(), proc)
        check_process(env(a=ChanC(AMBIENT)), frozenset(), proc)

    def test_payload_mismatch(self):
        with pytest.raises(TypeCheckError, match="carries"):
            check_process(env(a=ChanB(LOC), m=AMBIENT), frozenset(),
                          Output("a", Var("m"), NIL))

    def test_recursive_agent(self):
        definition = AgentDef("A", ("x",), Output("x", Var("m"), AgentCall("A", (Var("x"),))))
        scope = TypeEnv(ChainMap({"a": ChanB(AMBIENT), "m": AMBIENT}))
        check_process(scope, frozenset(), AgentCall("A", (Var("a"),)), {"A": definition})

    def test_agent_in_the_assumed_set_is_discharged(self):
        check_process(env(a=ChanB(AMBIENT)), frozenset({"A"}), AgentCall("A", (Var("a"),)))

    def test_assumed_agent_arguments_are_typed(self):
        with pytest.raises(TypeCheckError, match="unbound name `b`"):
            check_process(env(a=ChanB(AMBIENT)), frozenset({"A"}), AgentCall("A", (Var("b"),)))

    def test_agent_body_sees_the_caller_scope(self):
        definition = AgentDef("Relay", ("x",), Output("out", Var("x"), NIL))
        call = AgentCall("Relay", (Var("m"),))
        check_process(env(out=ChanB(AMBIENT), m=AMBIENT), frozenset(), call,
                      {"Relay": definition})
        with pytest.raises(TypeCheckError, match="unbound channel `out`"):
            check_process(env(m=AMBIENT), frozenset(), call, {"Relay": definition})

    def test_unbound_agent(self):
        with pytest.raises(TypeCheckError, match="unbound agent"):
            check_process(env(a=ChanB(AMBIENT)), frozenset(), AgentCall("A", (Var("a"),)))

    def test_guard_sides_must_agree(self):
        program = parse_program("net = l::[ [m = l]a!<m>.0 ]")
        report = typecheck_program(program)
        assert not report.ok
        assert "guard compares" in report.network_error


class TestNetworks:
    def test_located_needs_a_location(self):
        check_network(env(l=LOC), Located("l", NIL))
        with pytest.raises(TypeCheckError, match="expected Loc"):
            check_network(env(l=ChanB(AMBIENT)), Located("l", NIL))

    def test_connectivity_endpoints(self):
        check_network(env(l=LOC, m=LOC), Near("l", "m"))
        with pytest.raises(TypeCheckError, match="not a location"):
            check_network(env(l=LOC, m=AMBIENT), ParN(Near("l", "m"), Located("l", NIL)))

    def test_restricted_locations_default_to_loc(self):
        program = parse_program("net = new h in (h::[ 0 ] | h -> l) | l::[ 0 ]")
        assert typecheck_program(program).ok


class TestPrograms:
    @pytest.mark.parametrize("stem", ["typed_relay", "electoral2"])
    def test_corpus_is_well_typed(self, corpus, stem):
        report = typecheck_program(corpus(stem))
        assert report.ok, report.network_error
        assert report.unchecked_agents == frozenset()

    def test_collection_on_an_untyped_channel(self, corpus):
        report = typecheck_program(corpus("collect_find"))
        assert not report.ok
        assert "output on `a` which is not a channel (Name)" in report.network_error

    def test_natural_env(self, corpus):
        scope = natural_env(corpus("typed_relay"))
        assert scope.lookup("req") == ChanB(AMBIENT)
        assert scope.lookup("ack") == ChanC(AMBIENT)
        assert scope.lookup("hub") == LOC
        assert scope.lookup("ping") == AMBIENT
        assert scope.symbol("elect") is None

    def test_errors_inside_agents_are_reported(self):
        program = parse_program("""
type a : C<Name>
agent Bad(p) = p?<x>(x).0
net = l::[ Bad(a) ]
""")
        report = typecheck_program(program)
        assert not report.ok
        assert "Bad" in report.agent_errors

    def test_unused_agents_are_listed(self):
        program = parse_program("agent Idle(p) = p!<p>.0\nnet = l::[ 0 ]")
        report = typecheck_program(program)
        assert report.ok
        assert report.unchecked_agents == frozenset({"Idle"})


class TestSubjectReduction:
    @pytest.mark.parametrize("stem", ["typed_relay", "electoral2"])
    def test_reachable_states_stay_well_typed(self, corpus, stem):
        program = corpus(stem)
        graph = state_graph(program, Limits(max_states=300))
        for state in graph.states:
            check_state(program, state)

    @pytest.mark.parametrize("seed", range(20))
    def test_generated_programs(self, seed):
        program = typed_program(seed)
        assert typecheck_program(program).ok
        state = initial_state(program)
        for mode in (Mode.DEFAULT, Mode.EXHAUSTIVE):
            for _, successor in successors(state, program, mode):
                check_state(program, successor)

    @pytest.mark.parametrize("seed", range(5))
    def test_misuse_is_rejected(self, seed):
        program = ill_typed(typed_program(seed))
        assert not typecheck_program(program).ok

    def test_counted_collections_stay_well_typed(self):
        program = gen_hierarchical(hierarchy_spec(depth=0, branching=[2]))
        graph = state_graph(program, Limits(max_states=500), Mode.EXHAUSTIVE)
        assert not graph.truncated
        assert any("1" in free_names(denote(state)) for state in graph.states)
        for state in graph.states:
            check_state(program, state)

    def test_unknown_names_in_states_are_still_rejected(self):
        program = parse_program("type a : B<Name>\nnet = l::[ a!<m>.0 ]")
        state = initial_state(parse_program("net = l::[ a!<k>.0 ]"))
        with pytest.raises(TypeCheckError, match="unbound name `k`"):
            check_state(program, state)

    def test_states_keep_their_free_names(self, corpus):
        program = corpus("typed_relay")
        graph = state_graph(program, Limits(max_states=50))
        for state in graph.states:
            check_state(program, state)
            assert free_names(program.network) >= {name for name, _ in state.located}

"""
Rule firing, enumeration modes, runs and state graphs.
"""
import pytest

from app.models.ast_model import NIL, AgentCall, MultisetLit, Output, TupleMsg, Var
from app.models.reduction_model import BroadLabel, CollLabel, Limits, LocalLabel, Mode
from app.services.congruence_service import canonical_form, denote
from app.services.eval_service import build_registry
from app.services.names_service import free_names
from app.services.parser_service import parse_program
from app.services.reduction_service import (
    ReductionService, as_digraph, initial_state, reachability, run, state_graph, successors,
)
from app.utils.errors import ReductionError


def moves(text: str, mode: Mode = Mode.EXHAUSTIVE):
    program = parse_program(text)
    return successors(initial_state(program), program, mode)


def pair(left, right):
    return TupleMsg((Var(left), Var(right)))


class TestCollection:
    def test_default_mode_collects_from_every_sender(self, corpus):
        program = corpus("collect_find")
        found = successors(initial_state(program), program, Mode.DEFAULT)
        assert len(found) == 1
        label, state = found[0]
        assert label == CollLabel("a", "l3", ("l1", "l2"),
                                  MultisetLit.of([pair("a", "b"), pair("c", "b")]))
        expected = parse_program(
            "net = l1 -> l3 | l2 -> l3 | l1::[ 0 ] | l2::[ 0 ] | l3::[ d!<a>.0 ]").network
        assert state == canonical_form(expected, build_registry(program))

    def test_exhaustive_mode_enumerates_every_sender_set(self, corpus):
        program = corpus("collect_find")
        found = successors(initial_state(program), program, Mode.EXHAUSTIVE)
        assert [label.senders for label, _ in found] == [("l1",), ("l1", "l2"), ("l2",)]
        residuals = {label.senders: dict(state.located)["l3"] for label, state in found}
        assert residuals[("l2",)] == Output("d", Var("k"), NIL)
        assert residuals[("l1", "l2")] == Output("d", Var("a"), NIL)

    def test_collection_needs_connectivity_towards_the_receiver(self):
        text = "net = l3 -> l1 | l1::[ a!<m>.0 ] | l3::[ a?*<x>(x) as S.0 ]"
        assert moves(text) == []


class TestBroadcast:
    def test_bound_caps_the_delivered_set(self, corpus):
        program = corpus("broadcast_bound")
        exhaustive = successors(initial_state(program), program, Mode.EXHAUSTIVE)
        assert [label.receivers for label, _ in exhaustive] == [("m1",), ("m2",)]
        default = successors(initial_state(program), program, Mode.DEFAULT)
        assert [label.receivers for label, _ in default] == [("m1",)]

    def test_no_broadcast_into_silence(self):
        assert moves("net = l::[ a!<m>.0 ]") == []

    def test_connectivity_is_directional(self):
        assert moves("net = k -> l | l::[ a!<m>.0 ] | k::[ a?<x>(x).0 ]") == []
        found = moves("net = l -> k | l::[ a!<m>.0 ] | k::[ a?<x>(x).0 ]")
        assert [label for label, _ in found] == [BroadLabel("a", "l", ("k",), Var("m"))]

    def test_pattern_mismatch_blocks(self):
        assert moves("net = l -> k | l::[ a!<m>.0 ] | k::[ a?<x>((x, n)).0 ]") == []

    def test_sum_discards_the_other_branch(self):
        found = moves("net = l -> k | l::[ a!<m>.0 + b!<m>.0 ] | k::[ a?<x>(x).x!<n>.0 ]")
        assert len(found) == 1
        state = found[0][1]
        assert dict(state.located) == {"l": NIL, "k": Output("m", Var("n"), NIL)}

    def test_receiver_side_sum_commits(self):
        found = moves("net = l -> k | l::[ a!<m>.0 ] | k::[ a?<x>(x).0 + b?<y>(y).y!<n>.0 ]")
        assert len(found) == 1
        assert dict(found[0][1].located)["k"] == NIL


class TestLocal:
    def test_communication_inside_one_location(self):
        found = moves("net = l::[ a!<m>.0 | a?<x>(x).x!<n>.0 ]")
        assert [label for label, _ in found] == [LocalLabel("a", "l", Var("m"))]
        assert found[0][1].located == (("l", Output("m", Var("n"), NIL)),)

    def test_guards_gate_prefixes(self):
        assert moves("net = l::[ [m = n]a!<m>.0 | a?<x>(x).0 ]") == []
        assert len(moves("net = l::[ [m != n]a!<m>.0 | a?<x>(x).0 ]")) == 1


class TestRestrictions:
    def test_lifted_names_stay_bound(self):
        program = parse_program("""
net = l -> k
    | l::[ new w in a!<w>.w!<m>.0 ]
    | k::[ a?<x>(x).x?<y>(y).y!<n>.0 ]
""")
        graph = state_graph(program, Limits(max_states=50))
        assert not graph.truncated
        assert len(graph.states) == 3
        for state in graph.states:
            assert not state.restricted & free_names(denote(state))
        final = graph.states[graph.maximal_states()[0]]
        assert dict(final.located)["k"] == Output("m", Var("n"), NIL)


class TestAgents:
    def test_calls_are_unfolded(self, corpus):
        program = corpus("typed_relay")
        found = successors(initial_state(program), program, Mode.EXHAUSTIVE)
        assert [label for label, _ in found] == [
            BroadLabel("req", "hub", ("s1", "s2"), Var("ping"))]

    def test_recursive_server_graph_is_finite(self, corpus):
        graph = state_graph(corpus("typed_relay"), Limits(max_states=200))
        assert not graph.truncated
        assert graph.maximal_states()

    def test_unguarded_recursion_exhausts_the_budget(self):
        program = parse_program("agent Loop(a) = Loop(a)\nnet = l::[ Loop(c) ]")
        service = ReductionService(program, unfold_budget=4)
        assert service.successors(initial_state(program)) == []
        assert service.budget_exhausted
        assert state_graph(program, Limits(unfold_budget=4)).truncated

    def test_undefined_agent(self, corpus):
        service = ReductionService(corpus("typed_relay"))
        with pytest.raises(ReductionError):
            service.unfold(AgentCall("Missing", (Var("m"),)))


class TestExploration:
    def test_successors_are_pure(self, corpus):
        program = corpus("collect_find")
        state = initial_state(program)
        assert successors(state, program, Mode.EXHAUSTIVE) == \
            successors(state, program, Mode.EXHAUSTIVE)

    def test_default_moves_are_exhaustive_moves(self, corpus):
        for stem in ("collect_find", "broadcast_bound", "electoral2", "typed_relay"):
            program = corpus(stem)
            state = initial_state(program)
            default = set(successors(state, program, Mode.DEFAULT))
            assert default <= set(successors(state, program, Mode.EXHAUSTIVE))

    def test_state_graph_and_reachability(self, corpus):
        graph = state_graph(corpus("broadcast_bound"), Limits(max_states=10))
        assert len(graph.states) == 3
        assert len(graph.edges) == 2
        reach = reachability(graph)
        assert reach[0] == frozenset({0, 1, 2})
        assert reach[1] == frozenset({1})
        assert as_digraph(graph).number_of_edges() == 2

    def test_state_limit_truncates(self, corpus):
        graph = state_graph(corpus("broadcast_bound"), Limits(max_states=1))
        assert graph.truncated
        assert len(graph.states) == 1

    def test_default_mode_graph(self, corpus):
        graph = state_graph(corpus("collect_find"), Limits(max_states=10), Mode.DEFAULT)
        assert (len(graph.states), len(graph.edges)) == (2, 1)
        exhaustive = state_graph(corpus("collect_find"), Limits(max_states=10))
        assert len(exhaustive.states) == 4

    def test_limits_must_be_positive(self):
        with pytest.raises(ValueError):
            Limits(max_states=0)


class TestRun:
    def test_runs_are_reproducible(self, corpus):
        program = corpus("typed_relay")
        assert run(program, seed=5, max_steps=20) == run(program, seed=5, max_steps=20)

    def test_run_stops_when_stuck(self, corpus):
        trace = run(corpus("collect_find"), seed=0, max_steps=10)
        assert trace.stuck
        assert len(trace.steps) == 1
        assert isinstance(trace.steps[0][0], CollLabel)
        assert trace.final == trace.steps[0][1]

    def test_step_limit(self, corpus):
        trace = run(corpus("broadcast_bound"), seed=1, max_steps=0)
        assert not trace.stuck
        assert trace.final == trace.initial

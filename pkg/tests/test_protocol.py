"""
Hierarchical aggregation, flattening and the electoral system.
"""
import pytest

from app.models.ast_model import NIL, Bound, ConstructorApp, Var
from app.models.reduction_model import BroadLabel, CollLabel, Limits, LocalLabel, Mode
from app.services.names_service import alpha_canonical_program
from app.services.parser_service import parse_program, pretty_print
from app.services.protocol_service import (
    electoral_spec, election_outcomes, final_decisions, flat_spec, flatten, gen_electoral,
    gen_hierarchical, hierarchy_spec, is_electoral, pending_outputs, protocol_summary,
    restricted_names, validate_selection,
)
from app.services.reduction_service import initial_state, state_graph
from app.services.typesys_service import typecheck_program
from app.utils.errors import SpecError

SPECS = [
    {"depth": 0, "branching": [2]},
    {"depth": 1, "branching": [2, 2]},
    {"depth": 1, "branching": [2], "leaf_body": "echo"},
    {"depth": 0, "branching": [3], "rounds": "repeat", "contributions": "indexed"},
]


class TestSpecs:
    @pytest.mark.parametrize("fields", [
        {"depth": -1},
        {"branching": []},
        {"branching": [2, 0]},
        {"branching": [3], "bound": 2},
        {"rounds": "twice"},
    ])
    def test_invalid_hierarchies(self, fields):
        with pytest.raises(SpecError, match="invalid hierarchy"):
            hierarchy_spec(**fields)

    def test_single_participant_election(self):
        with pytest.raises(SpecError, match="invalid electoral system"):
            electoral_spec(participants=1)

    @pytest.mark.parametrize("selection", ["find", "nosuch", "size"])
    def test_selection_must_be_an_idempotent_builtin(self, selection):
        with pytest.raises(SpecError):
            validate_selection(selection)

    def test_fanouts_repeat_the_last_value(self):
        spec = hierarchy_spec(depth=2, branching=[3, 2])
        assert spec.fanouts() == [3, 2, 2]
        assert spec.leaf_count() == 12
        assert spec.effective_bound() == 3


class TestHierarchy:
    def test_one_level(self):
        program = gen_hierarchical(hierarchy_spec(depth=0, branching=[2]))
        assert protocol_summary(program) == {"located": 4, "near": 4, "restrictions": 3}
        assert restricted_names(program) == ("up_r", "down_r", "fwd")

    def test_two_levels(self):
        program = gen_hierarchical(hierarchy_spec(depth=1, branching=[2, 2]))
        assert protocol_summary(program) == {"located": 8, "near": 12, "restrictions": 9}
        assert restricted_names(program) == ("up_r", "down_r", "fwd", "up_1", "down_1",
                                             "up_2", "down_2", "c1", "c2")
        bounds = []
        net = program.network
        while hasattr(net, "body"):
            bounds.append(net.bound)
            net = net.body
        assert set(bounds[:7]) == {Bound(2)}

    def test_root_collision(self):
        with pytest.raises(SpecError, match="collides"):
            gen_hierarchical(hierarchy_spec(depth=0, branching=[2]), root="l2")

    @pytest.mark.parametrize("fields", SPECS)
    def test_generated_programs_print_parse_and_typecheck(self, fields):
        program = gen_hierarchical(hierarchy_spec(**fields))
        reparsed = parse_program(pretty_print(program))
        assert alpha_canonical_program(reparsed) == alpha_canonical_program(program)
        assert typecheck_program(program).ok

    def test_single_leaf_runs_in_three_steps(self):
        program = gen_hierarchical(hierarchy_spec(depth=0, branching=[1]))
        graph = state_graph(program, Limits(max_states=50))
        assert not graph.truncated
        assert (len(graph.states), len(graph.edges)) == (4, 3)
        kinds = []
        current = graph.initial
        while graph.successors(current):
            (label, current), = graph.successors(current)
            kinds.append(type(label))
        assert kinds == [CollLabel, LocalLabel, BroadLabel]
        final = graph.states[current]
        assert final.located == (("l0", NIL), ("l1", NIL))
        assert final.restrictions == ()

    def test_once_graphs_are_finite(self):
        program = gen_hierarchical(hierarchy_spec(depth=1, branching=[2], leaf_body="echo"))
        graph = state_graph(program, Limits(max_states=5000))
        assert not graph.truncated
        assert len(final_decisions(graph)) == 1


class TestFlatten:
    def test_flat_spec_is_identity_at_depth_zero(self):
        spec = hierarchy_spec(depth=0, branching=[2])
        assert flat_spec(spec) == spec
        assert flatten(spec) == gen_hierarchical(spec)

    def test_all_leaves_attach_to_the_hub(self):
        spec = hierarchy_spec(depth=1, branching=[2, 2])
        program = flatten(spec)
        assert protocol_summary(program) == {"located": 6, "near": 8, "restrictions": 3}
        assert flat_spec(spec).effective_bound() == 4
        assert flat_spec(flat_spec(spec)) == flat_spec(spec)

    def test_decisions_agree(self):
        spec = hierarchy_spec(depth=1, branching=[2], leaf_body="echo", contributions="indexed")
        tree = state_graph(gen_hierarchical(spec), Limits(max_states=5000))
        flat = state_graph(flatten(spec), Limits(max_states=5000))
        assert final_decisions(tree) == final_decisions(flat) == {Var("1")}

    def test_leaves_echo_the_decision(self):
        spec = hierarchy_spec(depth=0, branching=[2], leaf_body="echo", contributions="indexed")
        graph = state_graph(gen_hierarchical(spec), Limits(max_states=500))
        echoed = [pending_outputs(graph.states[index], "echo")
                  for index in graph.maximal_states()]
        assert {"l1": (Var("1"),), "l2": (Var("1"),)} in echoed


class TestElectoral:
    def test_two_participants(self):
        program = gen_electoral(electoral_spec(participants=2))
        assert protocol_summary(program) == {"located": 2, "near": 2, "restrictions": 0}
        assert program.bound_of("a") == Bound(2)
        assert typecheck_program(program).ok

    def test_every_computation_announces_once(self):
        graph = state_graph(gen_electoral(electoral_spec(participants=2)), Limits(max_states=500))
        outcomes = election_outcomes(graph)
        assert is_electoral(outcomes)
        for (announced,) in outcomes:
            assert isinstance(announced, ConstructorApp)
            assert announced.constructor == "chosen"

    def test_truncated_graphs_are_refused(self):
        graph = state_graph(gen_electoral(electoral_spec(participants=2)), Limits(max_states=2))
        with pytest.raises(SpecError, match="complete"):
            election_outcomes(graph)

    def test_matches_the_corpus_program(self, corpus):
        generated = state_graph(gen_electoral(electoral_spec(participants=2)))
        written = state_graph(corpus("electoral2"))
        assert len(generated.states) == len(written.states)

    def test_sequential_participants_cannot_move(self):
        program = gen_electoral(electoral_spec(participants=2, shape="sequential"))
        assert typecheck_program(program).ok
        assert set(program.channel_bounds) == {"a"}
        state = initial_state(program)
        assert pending_outputs(state, "a") == {"l1": (Var("1"),), "l2": (Var("2"),)}
        for mode in (Mode.DEFAULT, Mode.EXHAUSTIVE):
            graph = state_graph(program, Limits(max_states=500), mode)
            assert len(graph.states) == 1
            assert not graph.edges
            assert election_outcomes(graph) == frozenset({()})
            assert not is_electoral(election_outcomes(graph))

    def test_repeated_elections_cycle(self):
        program = gen_electoral(electoral_spec(participants=2, repeat=True))
        assert [agent.name for agent in program.agents] == ["Participant"]
        assert typecheck_program(program).ok
        graph = state_graph(program, Limits(max_states=500))
        assert not graph.truncated
        assert graph.initial in {target for _, _, target in graph.edges}
        with pytest.raises(SpecError, match="acyclic"):
            election_outcomes(graph)

    def test_nothing_is_pending_before_the_vote(self):
        state = initial_state(gen_electoral(electoral_spec(participants=2)))
        assert pending_outputs(state, "a") == {}
        assert not is_electoral(frozenset())

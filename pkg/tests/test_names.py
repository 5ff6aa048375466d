"""
Free names, fresh names, substitution and alpha-canonicalization.
"""
import pytest

from app.models.ast_model import NIL, MultisetLit, Output, SetVar, TupleMsg, Var
from app.services.names_service import (
    alpha_canonical, apply_subst, bound_names, canonical_prefix, free_names, fresh_name,
    substitute_process,
)
from app.services.parser_service import parse_program
from app.utils.errors import SubstitutionError


def located(text: str, header: str = ""):
    """Process hosted by the single location of `net = l::[ text ]`."""
    return parse_program(f"{header}\nnet = l::[ {text} ]").network.process


class TestFreeNames:
    def test_pattern_binders_are_bound(self):
        proc = located("a?<x>((x, b)).c!<x>.0")
        assert free_names(proc) == {"a", "b", "c"}
        assert bound_names(proc) == {"x"}

    def test_set_variable_scopes_over_continuation_only(self):
        proc = located("a?*<x>(x) as S. d!<min{S}>.0", "selector min")
        assert free_names(proc) == {"a", "d"}
        assert bound_names(proc) == {"x", "S"}

    def test_restriction_hides_its_name(self):
        assert free_names(located("new k in k!<m>.0")) == {"m"}

    def test_network_names_include_locations_and_bound_exceptions(self):
        net = parse_program("net = new r bound 1 {l2: 1} in l1::[ r!<m>.0 ]").network
        assert free_names(net) == {"l1", "l2", "m"}


class TestFreshName:
    def test_skips_taken_candidates(self):
        assert fresh_name("x", {"x", "x_1"}) == "x_2"

    def test_reuses_the_stem_of_an_indexed_name(self):
        assert fresh_name("x_3", {"x_1"}) == "x_2"

    def test_strips_primes(self):
        assert fresh_name("y'", set()) == "y_1"


class TestSubstitution:
    def test_name_cannot_become_a_multiset(self):
        with pytest.raises(SubstitutionError):
            apply_subst(Var("x"), {"x": MultisetLit.of([Var("a")])})

    def test_set_variable_needs_a_multiset(self):
        with pytest.raises(SubstitutionError):
            apply_subst(SetVar("S"), {"S": Var("a")})

    def test_multiset_stays_canonical(self):
        result = apply_subst(MultisetLit.of([Var("x"), Var("b")]), {"x": Var("c")})
        assert result == MultisetLit.of([Var("c"), Var("b")])

    def test_binder_is_renamed_instead_of_capturing(self):
        proc = located("a?<x>((x, y)).b!<y>.0")
        result = substitute_process(proc, {"y": Var("x")})
        assert free_names(result) == {"a", "b", "x"}
        assert result.pattern.binders != ("x",)
        assert result.cont == Output("b", Var("x"), NIL)

    def test_bound_occurrences_are_untouched(self):
        proc = located("a?<x>(x).b!<x>.0")
        assert substitute_process(proc, {"x": Var("z")}) == proc

    def test_compound_message_in_channel_position_is_rejected(self):
        with pytest.raises(SubstitutionError):
            substitute_process(Output("a", Var("m"), NIL),
                               {"a": TupleMsg((Var("b"), Var("c")))})


class TestAlphaCanonical:
    def test_alpha_equivalent_networks_coincide(self):
        first = parse_program("net = l::[ new k in k!<m>.0 ] | l::[ a?<x>(x).0 ]").network
        second = parse_program("net = l::[ new j in j!<m>.0 ] | l::[ a?<y>(y).0 ]").network
        assert alpha_canonical(first) == alpha_canonical(second)

    def test_different_free_names_stay_apart(self):
        first = parse_program("net = l::[ a?<x>(x).0 ]").network
        second = parse_program("net = l::[ b?<x>(x).0 ]").network
        assert alpha_canonical(first) != alpha_canonical(second)

    def test_prefix_avoids_free_names(self):
        assert canonical_prefix({"a", "b"}) == "_"
        assert canonical_prefix({"_a", "b"}) == "__"

"""
Parsing, load-time checks and the pretty-printer.
"""
import pytest

from app.models.ast_model import (
    NIL, Bound, CInput, Located, MultisetLit, Near, Output, ParN, SelectorApp, SetVar, Var,
)
from app.models.type_model import AMBIENT, Arrow, ChanB, MultisetT, Product
from app.services.names_service import alpha_canonical_program
from app.services.parser_service import (
    format_bound, format_type, parse_program, pretty_print,
)
from app.utils.errors import ParseError, ProgramError

CORPUS_STEMS = ["collect_find", "broadcast_bound", "electoral2", "typed_relay"]


class TestParse:
    def test_output_continuation_defaults_to_nil(self):
        net = parse_program("net = l::[ a!<m> ]").network
        assert net == Located("l", Output("a", Var("m"), NIL))

    def test_bidirectional_connectivity_expands(self):
        net = parse_program("net = l <-> m").network
        assert net == ParN(Near("l", "m"), Near("m", "l"))

    def test_comments_are_ignored(self):
        program = parse_program("-- nothing but a nil\nnet = l::[ 0 ] -- trailing")
        assert program.network == Located("l", NIL)

    def test_set_variables_are_resolved(self):
        proc = parse_program("selector min\nnet = l::[ a?*<x>(x) as S. b!<min{S}>.0 ]") \
            .network.process
        assert isinstance(proc, CInput)
        assert proc.cont.msg == SelectorApp("min", SetVar("S"))

    def test_multiset_literals_are_order_insensitive(self):
        first = parse_program("selector min\nnet = l::[ a!<min{{b, a, b}}> ]").network
        second = parse_program("selector min\nnet = l::[ a!<min{{b, b, a}}> ]").network
        assert first == second
        assert first.process.msg.arg == MultisetLit.of([Var("a"), Var("b"), Var("b")])

    def test_declarations(self, corpus):
        program = corpus("typed_relay")
        assert program.bound_of("req") == Bound(2)
        assert program.bound_of("ack") == Bound()
        assert program.type_decls["req"] == ChanB(AMBIENT)
        assert [agent.name for agent in program.agents] == ["Server"]

    def test_selector_with_parameters(self, corpus):
        program = corpus("collect_find")
        assert program.selectors[0].builtin == "find"
        assert program.selectors[0].params == ("a", "k")

    @pytest.mark.parametrize("stem", CORPUS_STEMS)
    def test_corpus_loads(self, corpus, stem):
        assert corpus(stem).network is not None


class TestSyntaxErrors:
    def test_position_of_unexpected_token(self):
        with pytest.raises(ParseError) as info:
            parse_program("channel a bound 2\nnet = l::[ a!<m>.0 ] | ]")
        assert not isinstance(info.value, ProgramError)
        assert (info.value.line, info.value.column) == (2, 24)
        assert str(info.value).startswith("2:24: unexpected token")

    def test_truncated_input(self):
        with pytest.raises(ParseError) as info:
            parse_program("net = l::[ a!<m>.0 ")
        assert info.value.line >= 1
        assert info.value.column >= 1

    def test_missing_network(self):
        with pytest.raises(ParseError):
            parse_program("channel a bound 1")


class TestProgramErrors:
    @pytest.mark.parametrize("text", [
        "net = l::[ A(m) ]",
        "net = l::[ a?<x>(m).0 ]",
        "net = l -> l",
        "net = l::[ new l in l!<m>.0 ]",
        "selector min\nnet = l::[ a?<x>(min{{x}}).0 ]",
        "net = l::[ a!<g(m)>.0 ]",
        "net = l::[ a!<min{{m}}>.0 ]",
        "selector s = find(a)\nnet = l::[ 0 ]",
        "selector s = median\nnet = l::[ 0 ]",
        "agent A(p) = p!<q>.0\nnet = l::[ A(m) ]",
        "agent A(p) = p!<p>.0\nnet = l::[ A(m, n) ]",
        "channel a bound 1\nchannel a bound 2\nnet = l::[ 0 ]",
        "net = l::[ a?<x, x>((x, x)).0 ]",
    ])
    def test_rejected(self, text):
        with pytest.raises(ProgramError):
            parse_program(text)

    def test_program_errors_are_parse_errors(self):
        assert issubclass(ProgramError, ParseError)


class TestPrinter:
    def test_types(self):
        assert format_type(Arrow(MultisetT(AMBIENT, None), AMBIENT)) == "Name{*} -> Name"
        assert format_type(Product((AMBIENT, ChanB(AMBIENT)))) == "(Name, B<Name>)"

    def test_bounds(self):
        assert format_bound(Bound(2, (("l", 1),))) == "bound 2 {l: 1}"
        assert format_bound(Bound()) == "bound inf"

    @pytest.mark.parametrize("stem", CORPUS_STEMS)
    def test_corpus_round_trip(self, corpus, stem):
        program = corpus(stem)
        reparsed = parse_program(pretty_print(program))
        assert alpha_canonical_program(reparsed) == alpha_canonical_program(program)

    def test_nested_operators_round_trip(self):
        text = """
constructor f
type min : Name{*} -> Name
selector min
net =
    new k : (Name, Loc) bound 1 {l: 2} in
    l::[ (a!<m>.0 | b!<f(m)>.0) + new w in [m != n](w!<m> | c?<x>((x, m)).x!<n>) ]
    | m::[ a?*<y>(f(y)) as S. b!<min{S}>.(new z in z!<m>) | 0 ]
"""
        program = parse_program(text)
        reparsed = parse_program(pretty_print(program))
        assert alpha_canonical_program(reparsed) == alpha_canonical_program(program)

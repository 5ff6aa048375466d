"""
Concrete syntax of BBC programs: Lark grammar, AST construction, load-time
checks and the pretty-printer that forms a round-trip pair with the parser.
"""
# pylint: disable=R0911,R0912,C0116
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Union

from lark import Lark, Transformer
from lark.exceptions import LarkError, UnexpectedInput, VisitError

from app.models.ast_model import (
    UNBOUNDED, AgentCall, AgentDef, BInput, Bound, CInput, ConstructorApp, Located, Match,
    Message, Mismatch, MultisetLit, Near, Network, New, NewN, Nil, NIL, Output, Par, ParN,
    Pattern, Process, Program, SelectorApp, SelectorDecl, SetVar, Sum, TupleMsg, Var,
)
from app.models.type_model import (
    LOC, Arrow, Base, ChanB, ChanC, LocT, MultisetT, Product, Type,
)
from app.services.eval_service import bind_selector
from app.services.names_service import message_names, process_names
from app.utils.errors import BBCError, ParseError, ProgramError
from app.utils.logger import get_logger, log_debug

logger = get_logger(__name__)

GRAMMAR = r"""
    start: decl* "net" "=" network

    ?decl: "channel" NAME boundspec                         -> channel_decl
         | "agent" NAME "(" [names] ")" "=" process          -> agent_decl
         | "selector" NAME "=" NAME "(" [names] ")"          -> selector_call
         | "selector" NAME "=" NAME                          -> selector_alias
         | "selector" NAME                                   -> selector_plain
         | "constructor" NAME                                -> constructor_decl
         | "type" NAME ":" type                              -> type_decl

    boundspec: "bound" bound_value [bound_exceptions]
    ?bound_value: NUMBER                                     -> finite_bound
                | "inf"                                      -> infinite_bound
    bound_exceptions: "{" bound_entry ("," bound_entry)* "}"
    bound_entry: NAME ":" NUMBER

    names: NAME ("," NAME)*
    msgs: msg ("," msg)*

    ?network: network "|" netatom                            -> net_par
            | netatom
    ?netatom: NAME "::" "[" process "]"                      -> located
            | NAME "->" NAME                                 -> near
            | NAME "<->" NAME                                -> near_both
            | "new" NAME [":" type] [boundspec] "in" network -> net_new
            | "(" network ")"

    ?process: process "|" sum                                -> par
            | sum
    ?sum: sum "+" prefix                                     -> choice
        | prefix
    ?prefix: NAME "!" "<" msg ">" ["." prefix]               -> output
           | NAME "?" "<" [names] ">" "(" msg ")" "." prefix  -> binput
           | NAME "?*" "<" [names] ">" "(" msg ")" "as" NAME "." prefix -> cinput
           | "new" NAME [":" type] [boundspec] "in" process  -> new
           | "[" msg "=" msg "]" prefix                      -> match
           | "[" msg "!=" msg "]" prefix                     -> mismatch
           | NAME "(" [msgs] ")"                             -> call
           | "0"                                             -> nil
           | "(" process ")"

    ?msg: NAME                                               -> var
        | NUMBER                                             -> var
        | "(" msg ("," msg)+ ")"                             -> tuple
        | NAME "(" msg ")"                                   -> cons
        | NAME "{" msgexpr "}"                               -> select
        | "{" msg ("," msg)* "}"                             -> multiset
    ?msgexpr: "{" msg ("," msg)* "}"                         -> multiset
            | NAME                                           -> setvar

    ?type: mtype "->" type                                   -> arrow
         | mtype
    ?mtype: mtype "{" NUMBER "}"                             -> mset
          | mtype "{" "*" "}"                                -> mset_any
          | tatom
    ?tatom: "B" "<" type ">"                                 -> chan_b
          | "C" "<" type ">"                                 -> chan_c
          | "Loc"                                            -> loc
          | NAME                                             -> base
          | "(" type ("," type)+ ")"                         -> product
          | "(" type ")"

    NAME: /[A-Za-z_][A-Za-z0-9_']*/
    NUMBER: /[0-9]+/
    COMMENT: /--[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_PARSER = Lark(GRAMMAR, parser="lalr", lexer="contextual", maybe_placeholders=True)
_TERMINAL_TEXT = {
    terminal.name: (f'"{terminal.pattern.value}"' if terminal.pattern.type == "str"
                    else terminal.name)
    for terminal in _PARSER.terminals
}


@dataclass(frozen=True)
class SourceProgram:
    """Program text and where it came from."""

    text: str
    origin: str = "<string>"


class _ProgramBuilder(Transformer):
    """Turns the parse tree into AST values; semantic checks run afterwards."""

    # pylint: disable=too-many-public-methods

    def start(self, items):
        *decls, network = items
        return decls, network

    def channel_decl(self, items):
        return ("channel", str(items[0]), items[1])

    def agent_decl(self, items):
        return ("agent", AgentDef(str(items[0]), tuple(items[1] or ()), items[2]))

    def selector_call(self, items):
        return ("selector", SelectorDecl(str(items[0]), str(items[1]), tuple(items[2] or ())))

    def selector_alias(self, items):
        return ("selector", SelectorDecl(str(items[0]), str(items[1])))

    def selector_plain(self, items):
        return ("selector", SelectorDecl(str(items[0]), str(items[0])))

    def constructor_decl(self, items):
        return ("constructor", str(items[0]))

    def type_decl(self, items):
        return ("type", str(items[0]), items[1])

    def boundspec(self, items):
        default, exceptions = items
        return Bound(default, tuple(exceptions or ()))

    def finite_bound(self, items):
        return int(items[0])

    def infinite_bound(self, _items):
        return None

    def bound_exceptions(self, items):
        return list(items)

    def bound_entry(self, items):
        return (str(items[0]), int(items[1]))

    def names(self, items):
        return [str(item) for item in items]

    def msgs(self, items):
        return list(items)

    def net_par(self, items):
        return ParN(items[0], items[1])

    def located(self, items):
        return Located(str(items[0]), items[1])

    def near(self, items):
        return Near(str(items[0]), str(items[1]))

    def near_both(self, items):
        source, target = str(items[0]), str(items[1])
        return ParN(Near(source, target), Near(target, source))

    def net_new(self, items):
        name, type_ann, bound, body = items
        return NewN(str(name), bound or UNBOUNDED, body, type_ann)

    def par(self, items):
        return Par(items[0], items[1])

    def choice(self, items):
        return Sum(items[0], items[1])

    def output(self, items):
        channel, msg, cont = items
        return Output(str(channel), msg, NIL if cont is None else cont)

    def binput(self, items):
        channel, binders, body, cont = items
        return BInput(str(channel), Pattern(tuple(binders or ()), body), cont)

    def cinput(self, items):
        channel, binders, body, setvar, cont = items
        return CInput(str(channel), Pattern(tuple(binders or ()), body), str(setvar), cont)

    def new(self, items):
        name, type_ann, bound, body = items
        return New(str(name), bound or UNBOUNDED, body, type_ann)

    def match(self, items):
        return Match(items[0], items[1], items[2])

    def mismatch(self, items):
        return Mismatch(items[0], items[1], items[2])

    def call(self, items):
        return AgentCall(str(items[0]), tuple(items[1] or ()))

    def nil(self, _items):
        return NIL

    def var(self, items):
        return Var(str(items[0]))

    def tuple(self, items):
        return TupleMsg(tuple(items))

    def cons(self, items):
        return ConstructorApp(str(items[0]), items[1])

    def select(self, items):
        return SelectorApp(str(items[0]), items[1])

    def multiset(self, items):
        return MultisetLit.of(items)

    def setvar(self, items):
        return SetVar(str(items[0]))

    def arrow(self, items):
        return Arrow(items[0], items[1])

    def mset(self, items):
        return MultisetT(items[0], int(items[1]))

    def mset_any(self, items):
        return MultisetT(items[0], None)

    def chan_b(self, items):
        return ChanB(items[0])

    def chan_c(self, items):
        return ChanC(items[0])

    def loc(self, _items):
        return LOC

    def base(self, items):
        return Base(str(items[0]))

    def product(self, items):
        return Product(tuple(items))


class _ProgramChecker:
    """Load-time checks; also turns names bound by `as S` into set variables."""

    def __init__(self, selectors: Sequence[SelectorDecl], constructors: Sequence[str],
                 agents: Dict[str, AgentDef]):
        self.selectors = {decl.name for decl in selectors}
        self.constructors = set(constructors)
        self.agents = agents

    def message(self, msg: Message, setvars: FrozenSet[str], in_pattern: bool = False) -> Message:
        if isinstance(msg, Var):
            return SetVar(msg.name) if msg.name in setvars else msg
        if isinstance(msg, SetVar):
            if msg.name not in setvars:
                raise ProgramError(f"unbound set variable `{msg.name}`")
            return msg
        if isinstance(msg, TupleMsg):
            return TupleMsg(tuple(self.message(item, setvars, in_pattern) for item in msg.items))
        if isinstance(msg, MultisetLit):
            return MultisetLit.of(self.message(item, setvars, in_pattern) for item in msg.items)
        if isinstance(msg, SelectorApp):
            if in_pattern:
                raise ProgramError(f"selector `{msg.selector}` is not allowed in a pattern")
            if msg.selector not in self.selectors:
                raise ProgramError(f"unknown selector `{msg.selector}`")
            return SelectorApp(msg.selector, self.message(msg.arg, setvars))
        if msg.constructor not in self.constructors:
            raise ProgramError(f"unknown constructor `{msg.constructor}`")
        return ConstructorApp(msg.constructor, self.message(msg.arg, setvars, in_pattern))

    def pattern(self, pattern: Pattern, setvars: FrozenSet[str]) -> Pattern:
        if len(set(pattern.binders)) != len(pattern.binders):
            raise ProgramError(f"duplicate binder in pattern <{', '.join(pattern.binders)}>")
        missing = set(pattern.binders) - message_names(pattern.body)
        if missing:
            raise ProgramError(
                f"pattern binder(s) {', '.join(sorted(missing))} do not occur in the body")
        return Pattern(pattern.binders, self.message(pattern.body, setvars, in_pattern=True))

    def process(self, proc: Process, setvars: FrozenSet[str], location: Optional[str]) -> Process:
        if isinstance(proc, Nil):
            return proc
        if isinstance(proc, BInput):
            inner = setvars - set(proc.pattern.binders)
            return BInput(proc.channel, self.pattern(proc.pattern, inner),
                          self.process(proc.cont, inner, location))
        if isinstance(proc, CInput):
            pattern_scope = setvars - set(proc.pattern.binders)
            return CInput(proc.channel, self.pattern(proc.pattern, pattern_scope), proc.setvar,
                          self.process(proc.cont, setvars | {proc.setvar}, location))
        if isinstance(proc, Output):
            return Output(proc.channel, self.message(proc.msg, setvars),
                          self.process(proc.cont, setvars, location))
        if isinstance(proc, New):
            if proc.name == location:
                raise ProgramError(
                    f"restriction of `{proc.name}` inside its own location `{location}`")
            return New(proc.name, proc.bound,
                       self.process(proc.body, setvars - {proc.name}, location), proc.type_ann)
        if isinstance(proc, (Match, Mismatch)):
            return type(proc)(self.message(proc.left, setvars), self.message(proc.right, setvars),
                              self.process(proc.body, setvars, location))
        if isinstance(proc, (Par, Sum)):
            return type(proc)(self.process(proc.left, setvars, location),
                              self.process(proc.right, setvars, location))
        agent = self.agents.get(proc.agent)
        if agent is None:
            raise ProgramError(f"unknown agent `{proc.agent}`")
        if len(agent.params) != len(proc.args):
            raise ProgramError(f"agent `{proc.agent}` expects {len(agent.params)} "
                               f"argument(s), got {len(proc.args)}")
        return AgentCall(proc.agent, tuple(self.message(arg, setvars) for arg in proc.args))

    def network(self, net: Network) -> Network:
        if isinstance(net, Located):
            return Located(net.location, self.process(net.process, frozenset(), net.location))
        if isinstance(net, ParN):
            return ParN(self.network(net.left), self.network(net.right))
        if isinstance(net, NewN):
            return NewN(net.name, net.bound, self.network(net.body), net.type_ann)
        if net.source == net.target:
            raise ProgramError(f"connectivity atom `{net.source} -> {net.target}` is reflexive")
        return net

    def agent(self, agent: AgentDef) -> AgentDef:
        if len(set(agent.params)) != len(agent.params):
            raise ProgramError(f"duplicate parameter in agent `{agent.name}`")
        body = self.process(agent.body, frozenset(), None)
        extra = process_names(body) - set(agent.params)
        if extra:
            raise ProgramError(f"agent `{agent.name}` has free name(s) "
                               f"{', '.join(sorted(extra))} outside its parameters")
        return AgentDef(agent.name, agent.params, body)


def _assemble(decls: List[tuple], network: Network) -> Program:
    constructors: List[str] = []
    selectors: List[SelectorDecl] = []
    channels: Dict[str, Bound] = {}
    agents: Dict[str, AgentDef] = {}
    types: Dict[str, Type] = {}
    for decl in decls:
        kind = decl[0]
        if kind == "constructor":
            if decl[1] in constructors:
                raise ProgramError(f"constructor `{decl[1]}` declared twice")
            constructors.append(decl[1])
        elif kind == "selector":
            if any(existing.name == decl[1].name for existing in selectors):
                raise ProgramError(f"selector `{decl[1].name}` declared twice")
            bind_selector(decl[1].builtin, decl[1].params)
            selectors.append(decl[1])
        elif kind == "channel":
            if decl[1] in channels:
                raise ProgramError(f"channel `{decl[1]}` declared twice")
            channels[decl[1]] = decl[2]
        elif kind == "agent":
            if decl[1].name in agents:
                raise ProgramError(f"agent `{decl[1].name}` defined twice")
            agents[decl[1].name] = decl[1]
        else:
            if decl[1] in types:
                raise ProgramError(f"type of `{decl[1]}` declared twice")
            types[decl[1]] = decl[2]

    checker = _ProgramChecker(selectors, constructors, agents)
    checked_agents = tuple(checker.agent(agent) for agent in agents.values())
    return Program(
        network=checker.network(network),
        constructors=tuple(constructors),
        selectors=tuple(selectors),
        channels=tuple(channels.items()),
        agents=checked_agents,
        types=tuple(types.items()),
    )


def _syntax_error(exc: UnexpectedInput, text: str) -> ParseError:
    lines = text.split("\n")
    line = exc.line if isinstance(exc.line, int) and exc.line >= 1 else len(lines)
    line = min(line, len(lines))
    width = len(lines[line - 1]) + 1
    column = exc.column if isinstance(exc.column, int) and exc.column >= 1 else width
    column = min(column, width)
    expected = getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ()
    token = getattr(exc, "token", None)
    if token is not None and getattr(token, "type", "") == "$END":
        message = "unexpected end of input"
    elif token is not None:
        message = f"unexpected token `{token}`"
    elif getattr(exc, "char", None) is not None:
        message = f"unexpected character `{exc.char}`"
    else:
        message = "syntax error"
    return ParseError(message, line, column,
                      [_TERMINAL_TEXT.get(name, name) for name in expected])


def parse_program(source: Union[str, SourceProgram]) -> Program:
    """Parse and check a program.

    Args:
        source: Program text or a SourceProgram.

    Returns:
        Program: checked AST.

    Raises:
        ParseError: syntax violation, with a position inside the source.
        ProgramError: semantic load error (unknown agent/selector/constructor, arity,
            pattern binders, free names of an agent body).
    """
    if isinstance(source, str):
        source = SourceProgram(source)
    try:
        tree = _PARSER.parse(source.text)
        decls, network = _ProgramBuilder().transform(tree)
    except UnexpectedInput as exc:
        raise _syntax_error(exc, source.text) from exc
    except VisitError as exc:
        original = exc.orig_exc
        if isinstance(original, BBCError):
            raise original from exc
        raise ProgramError(str(original)) from exc
    except LarkError as exc:
        raise ParseError(str(exc)) from exc
    except RecursionError as exc:
        raise ParseError("input nested too deeply") from exc
    try:
        program = _assemble(decls, network)
    except RecursionError as exc:
        raise ParseError("input nested too deeply") from exc
    log_debug(logger, "Parsed program", {"origin": source.origin,
                                         "agents": len(program.agents)})
    return program


def load_program(path: Union[str, Path]) -> Program:
    """Read and parse a .bbc file."""
    file_path = Path(path)
    return parse_program(SourceProgram(file_path.read_text(encoding="utf-8"), str(file_path)))


def format_type(ty: Type, atomic: bool = False) -> str:
    """Concrete syntax of a type."""
    if isinstance(ty, ChanB):
        return f"B<{format_type(ty.payload)}>"
    if isinstance(ty, ChanC):
        return f"C<{format_type(ty.payload)}>"
    if isinstance(ty, LocT):
        return "Loc"
    if isinstance(ty, Base):
        return ty.name
    if isinstance(ty, Product):
        return "(" + ", ".join(format_type(item) for item in ty.items) + ")"
    if isinstance(ty, MultisetT):
        arity = "*" if ty.arity is None else str(ty.arity)
        return f"{format_type(ty.elem, atomic=True)}{{{arity}}}"
    text = f"{format_type(ty.domain, atomic=True)} -> {format_type(ty.codomain)}"
    return f"({text})" if atomic else text


def format_message(msg: Message) -> str:
    """Concrete syntax of a message."""
    if isinstance(msg, (Var, SetVar)):
        return msg.name
    if isinstance(msg, TupleMsg):
        return "(" + ", ".join(format_message(item) for item in msg.items) + ")"
    if isinstance(msg, MultisetLit):
        return "{" + ", ".join(format_message(item) for item in msg.items) + "}"
    if isinstance(msg, SelectorApp):
        return f"{msg.selector}{{{format_message(msg.arg)}}}"
    return f"{msg.constructor}({format_message(msg.arg)})"


def format_bound(bound: Bound) -> str:
    """`bound 2 {l: 1}` syntax."""
    text = "bound " + ("inf" if bound.default is None else str(bound.default))
    if bound.exceptions:
        text += " {" + ", ".join(f"{loc}: {value}" for loc, value in bound.exceptions) + "}"
    return text


def _binder_header(name: str, bound: Bound, type_ann: Optional[Type]) -> str:
    text = f"new {name}"
    if type_ann is not None:
        text += f" : {format_type(type_ann)}"
    if bound != UNBOUNDED:
        text += f" {format_bound(bound)}"
    return text + " in "


_PAR, _SUM, _PREFIX = 0, 1, 2


def format_process(proc: Process, level: int = _PAR, tail: bool = True) -> str:
    """Concrete syntax of a process.

    `level` is the weakest operator allowed without parentheses; `tail` says
    whether nothing follows, which is where a restriction may stay bare.
    """
    if isinstance(proc, Par):
        left = format_process(proc.left, _PAR, False)
        right = format_process(proc.right, _SUM, tail or level > _PAR)
        text = f"{left} | {right}"
        return f"({text})" if level > _PAR else text
    if isinstance(proc, Sum):
        left = format_process(proc.left, _SUM, False)
        right = format_process(proc.right, _PREFIX, tail or level > _SUM)
        text = f"{left} + {right}"
        return f"({text})" if level > _SUM else text
    if isinstance(proc, New):
        text = _binder_header(proc.name, proc.bound, proc.type_ann) + format_process(proc.body)
        return text if tail else f"({text})"
    if isinstance(proc, Nil):
        return "0"
    if isinstance(proc, Output):
        return (f"{proc.channel}!<{format_message(proc.msg)}>."
                f"{format_process(proc.cont, _PREFIX, tail)}")
    if isinstance(proc, BInput):
        return (f"{proc.channel}?<{', '.join(proc.pattern.binders)}>"
                f"({format_message(proc.pattern.body)}).{format_process(proc.cont, _PREFIX, tail)}")
    if isinstance(proc, CInput):
        return (f"{proc.channel}?*<{', '.join(proc.pattern.binders)}>"
                f"({format_message(proc.pattern.body)}) as {proc.setvar}."
                f"{format_process(proc.cont, _PREFIX, tail)}")
    if isinstance(proc, (Match, Mismatch)):
        operator = "=" if isinstance(proc, Match) else "!="
        return (f"[{format_message(proc.left)} {operator} {format_message(proc.right)}]"
                f"{format_process(proc.body, _PREFIX, tail)}")
    return f"{proc.agent}({', '.join(format_message(arg) for arg in proc.args)})"


def format_network(net: Network, atomic: bool = False, tail: bool = True) -> str:
    """Concrete syntax of a network."""
    if isinstance(net, Located):
        return f"{net.location}::[ {format_process(net.process)} ]"
    if isinstance(net, Near):
        return f"{net.source} -> {net.target}"
    if isinstance(net, NewN):
        text = _binder_header(net.name, net.bound, net.type_ann) + format_network(net.body)
        return text if tail and not atomic else f"({text})"
    text = (f"{format_network(net.left, tail=False)} | "
            f"{format_network(net.right, atomic=True, tail=tail and not atomic)}")
    return f"({text})" if atomic else text


def pretty_print(program: Program) -> str:
    """Program text that parses back to an alpha-equivalent program."""
    lines: List[str] = []
    for name in program.constructors:
        lines.append(f"constructor {name}")
    for decl in program.selectors:
        if decl.params:
            lines.append(f"selector {decl.name} = {decl.builtin}({', '.join(decl.params)})")
        elif decl.builtin != decl.name:
            lines.append(f"selector {decl.name} = {decl.builtin}")
        else:
            lines.append(f"selector {decl.name}")
    for name, bound in program.channels:
        lines.append(f"channel {name} {format_bound(bound)}")
    for name, ty in program.types:
        lines.append(f"type {name} : {format_type(ty)}")
    for agent in program.agents:
        lines.append(f"agent {agent.name}({', '.join(agent.params)}) =")
        lines.append(f"    {format_process(agent.body)}")
    lines.append("net =")
    lines.append(f"    {format_network(program.network)}")
    return "\n".join(lines) + "\n"

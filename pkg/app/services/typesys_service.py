"""
Channel type discipline: typing of messages, processes and networks.
"""
# pylint: disable=R0911,R0912
from __future__ import annotations

from collections import ChainMap
from typing import Dict, FrozenSet, Mapping, Optional, Set, Tuple

from app.models.ast_model import (
    AgentCall, AgentDef, BInput, CInput, ConstructorApp, Located, Match, Message, Mismatch,
    MultisetLit, Near, Network, New, NewN, Nil, Output, Par, ParN, Pattern, Process, Program,
    SelectorApp, SetVar, Sum, TupleMsg, Var,
)
from app.models.normal_form_model import NormalForm
from app.models.type_model import (
    AMBIENT, LOC, Arrow, ChanB, ChanC, LocT, MultisetT, Product, Type, TypeEnv,
    TypeReport,
)
from app.services.congruence_service import denote
from app.services.names_service import free_names, process_names
from app.services.parser_service import format_message, format_process, format_type
from app.utils.errors import TypeCheckError
from app.utils.logger import get_logger, log_debug

logger = get_logger(__name__)

_NAME_SET = MultisetT(AMBIENT, None)

BUILTIN_SELECTOR_TYPES: Dict[str, Arrow] = {
    "min": Arrow(_NAME_SET, AMBIENT),
    "max": Arrow(_NAME_SET, AMBIENT),
    "elect": Arrow(_NAME_SET, AMBIENT),
    "size": Arrow(_NAME_SET, AMBIENT),
    "find": Arrow(MultisetT(Product((AMBIENT, AMBIENT)), None), AMBIENT),
}

BUILTIN_CONSTRUCTOR_TYPES: Dict[str, Arrow] = {
    "first": Arrow(Product((AMBIENT, AMBIENT)), AMBIENT),
    "chosen": Arrow(AMBIENT, AMBIENT),
}


def compatible(expected: Type, actual: Type) -> bool:
    """Type equality where a wildcard multiset arity matches any arity."""
    if isinstance(expected, MultisetT) and isinstance(actual, MultisetT):
        arity_ok = expected.arity is None or actual.arity is None \
            or expected.arity == actual.arity
        return arity_ok and compatible(expected.elem, actual.elem)
    if isinstance(expected, Product) and isinstance(actual, Product):
        return len(expected.items) == len(actual.items) and all(
            compatible(left, right) for left, right in zip(expected.items, actual.items))
    if isinstance(expected, (ChanB, ChanC)) and type(expected) is type(actual):
        return compatible(expected.payload, actual.payload)
    if isinstance(expected, Arrow) and isinstance(actual, Arrow):
        return compatible(expected.domain, actual.domain) and \
            compatible(expected.codomain, actual.codomain)
    return expected == actual


def location_names(net: Network) -> Set[str]:
    """Names used as location labels or connectivity endpoints."""
    if isinstance(net, Located):
        return {net.location}
    if isinstance(net, Near):
        return {net.source, net.target}
    if isinstance(net, ParN):
        return location_names(net.left) | location_names(net.right)
    return location_names(net.body)


def natural_env(program: Program) -> TypeEnv:
    """Environment for a program's free names and signature.

    Declared types win. Undeclared selectors and constructors take the type of
    the builtin they are bound to (inert constructors are Name -> Name), names
    in location position default to Loc and every other name to Name.
    """
    declared = program.type_decls
    symbols: Dict[str, Arrow] = {}
    for decl in program.selectors:
        symbols[decl.name] = BUILTIN_SELECTOR_TYPES[decl.builtin]
    for name in program.constructors:
        symbols[name] = BUILTIN_CONSTRUCTOR_TYPES.get(name, Arrow(AMBIENT, AMBIENT))
    for name, ty in declared.items():
        if name in symbols:
            if not isinstance(ty, Arrow):
                raise TypeCheckError(f"`{name}` must be declared with an arrow type",
                                     format_type(ty))
            symbols[name] = ty
    locations = location_names(program.network)
    names: Dict[str, Type] = {}
    for name in free_names(program.network) | set(program.channel_bounds):
        if name in declared:
            names[name] = declared[name]
        else:
            names[name] = LOC if name in locations else AMBIENT
    for name, ty in declared.items():
        if name not in symbols:
            names.setdefault(name, ty)
    return TypeEnv(ChainMap(names), symbols)


def type_of_message(env: TypeEnv, msg: Message) -> Type:
    """Syntax-directed type of a message.

    Raises:
        TypeCheckError: unbound symbol, disagreeing multiset elements, or a
            selector applied to a multiset of the wrong arity.
    """
    if isinstance(msg, (Var, SetVar)):
        ty = env.lookup(msg.name)
        if ty is None:
            raise TypeCheckError(f"unbound name `{msg.name}`", format_message(msg))
        return ty
    if isinstance(msg, TupleMsg):
        return Product(tuple(type_of_message(env, item) for item in msg.items))
    if isinstance(msg, MultisetLit):
        if not msg.items:
            raise TypeCheckError("cannot type an empty multiset", format_message(msg))
        elem = type_of_message(env, msg.items[0])
        for item in msg.items[1:]:
            if not compatible(elem, type_of_message(env, item)):
                raise TypeCheckError("multiset elements disagree on their type",
                                     format_message(msg))
        return MultisetT(elem, len(msg.items))
    if isinstance(msg, SelectorApp):
        arrow = env.symbol(msg.selector)
        if arrow is None:
            raise TypeCheckError(f"unbound selector `{msg.selector}`", format_message(msg))
        arg = type_of_message(env, msg.arg)
        domain = arrow.domain
        if not isinstance(domain, MultisetT) or not isinstance(arg, MultisetT):
            raise TypeCheckError("selectors apply to multisets", format_message(msg))
        if domain.arity is not None and arg.arity != domain.arity:
            shown = "*" if arg.arity is None else arg.arity
            raise TypeCheckError(f"selector `{msg.selector}` expects {domain.arity} "
                                 f"elements, got {shown}", format_message(msg))
        if not compatible(domain.elem, arg.elem):
            raise TypeCheckError(f"selector `{msg.selector}` expects elements of type "
                                 f"{format_type(domain.elem)}", format_message(msg))
        return arrow.codomain
    if isinstance(msg, ConstructorApp):
        arrow = env.symbol(msg.constructor)
        if arrow is None:
            raise TypeCheckError(f"unbound constructor `{msg.constructor}`",
                                 format_message(msg))
        if not compatible(arrow.domain, type_of_message(env, msg.arg)):
            raise TypeCheckError(f"constructor `{msg.constructor}` expects "
                                 f"{format_type(arrow.domain)}", format_message(msg))
        return arrow.codomain
    raise TypeCheckError(f"unknown message {msg!r}")


def _bind_pattern(env: TypeEnv, body: Message, expected: Type, binders: FrozenSet[str],
                  bindings: Dict[str, Type]) -> None:
    if isinstance(body, Var) and body.name in binders:
        previous = bindings.get(body.name)
        if previous is not None and not compatible(previous, expected):
            raise TypeCheckError(f"binder `{body.name}` used at two types",
                                 format_message(body))
        bindings[body.name] = expected
    elif isinstance(body, TupleMsg) and isinstance(expected, Product) \
            and len(expected.items) == len(body.items):
        for item, ty in zip(body.items, expected.items):
            _bind_pattern(env, item, ty, binders, bindings)
    elif isinstance(body, MultisetLit) and isinstance(expected, MultisetT):
        for item in body.items:
            _bind_pattern(env, item, expected.elem, binders, bindings)
    elif isinstance(body, ConstructorApp):
        arrow = env.symbol(body.constructor)
        if arrow is not None and compatible(expected, arrow.codomain):
            _bind_pattern(env, body.arg, arrow.domain, binders, bindings)


def type_pattern(env: TypeEnv, pattern: Pattern, payload: Type) -> TypeEnv:
    """Environment extended with the binders of a pattern read at `payload`.

    Raises:
        TypeCheckError: If the pattern body does not have the payload type.
    """
    bindings: Dict[str, Type] = {}
    _bind_pattern(env, pattern.body, payload, frozenset(pattern.binders), bindings)
    missing = [name for name in pattern.binders if name not in bindings]
    if missing:
        raise TypeCheckError(f"cannot type binder `{missing[0]}` against "
                             f"{format_type(payload)}", format_message(pattern.body))
    extended = env.extend(bindings)
    if not compatible(payload, type_of_message(extended, pattern.body)):
        raise TypeCheckError(f"pattern does not carry {format_type(payload)}",
                             format_message(pattern.body))
    return extended


def _channel(env: TypeEnv, channel: str, node: str) -> Type:
    ty = env.lookup(channel)
    if ty is None:
        raise TypeCheckError(f"unbound channel `{channel}`", node)
    return ty


def _arg_types(env: TypeEnv, args: Tuple[Message, ...]) -> Tuple[Type, ...]:
    return tuple(type_of_message(env, arg) for arg in args)


class _ProcessChecker:
    """Checks processes against agent definitions, caching successful calls."""

    def __init__(self, definitions: Mapping[str, AgentDef], symbols: Mapping[str, Arrow]):
        self.definitions = definitions
        self.symbols = symbols
        self.checked: Set[tuple] = set()
        self.visited: Set[str] = set()

    def check(self, env: TypeEnv, agents: FrozenSet[str], proc: Process) -> None:
        """Raise TypeCheckError unless `proc` is well typed."""
        if isinstance(proc, Nil):
            return
        if isinstance(proc, BInput):
            node = format_process(proc)
            ty = _channel(env, proc.channel, node)
            if not isinstance(ty, ChanB):
                raise TypeCheckError(f"broadcast input on `{proc.channel}` needs a B<T> "
                                     f"channel, found {format_type(ty)}", node)
            self.check(type_pattern(env, proc.pattern, ty.payload), agents, proc.cont)
        elif isinstance(proc, CInput):
            node = format_process(proc)
            ty = _channel(env, proc.channel, node)
            if not isinstance(ty, ChanC):
                raise TypeCheckError(f"collection input on `{proc.channel}` needs a C<T> "
                                     f"channel, found {format_type(ty)}", node)
            type_pattern(env, proc.pattern, ty.payload)
            self.check(env.extend({proc.setvar: MultisetT(ty.payload, None)}), agents,
                       proc.cont)
        elif isinstance(proc, Output):
            node = format_process(proc)
            ty = _channel(env, proc.channel, node)
            if not isinstance(ty, (ChanB, ChanC)):
                raise TypeCheckError(f"output on `{proc.channel}` which is not a channel "
                                     f"({format_type(ty)})", node)
            payload = type_of_message(env, proc.msg)
            if not compatible(ty.payload, payload):
                raise TypeCheckError(f"`{proc.channel}` carries {format_type(ty.payload)}, "
                                     f"got {format_type(payload)}", node)
            self.check(env, agents, proc.cont)
        elif isinstance(proc, (Par, Sum)):
            self.check(env, agents, proc.left)
            self.check(env, agents, proc.right)
        elif isinstance(proc, (Match, Mismatch)):
            left, right = type_of_message(env, proc.left), type_of_message(env, proc.right)
            if not compatible(left, right):
                raise TypeCheckError(f"guard compares {format_type(left)} with "
                                     f"{format_type(right)}", format_process(proc))
            self.check(env, agents, proc.body)
        elif isinstance(proc, New):
            self.check(env.extend({proc.name: proc.type_ann or AMBIENT}), agents, proc.body)
        elif isinstance(proc, AgentCall):
            self.call(env, agents, proc)
        else:
            raise TypeCheckError(f"unknown process {proc!r}")

    def call(self, env: TypeEnv, agents: FrozenSet[str], proc: AgentCall) -> None:
        """Rules Agent and Call.

        The arguments are typed in every case. An assumed agent is discharged;
        otherwise its body is checked once per argument types and context,
        under the caller's environment extended with the parameters.
        """
        types = _arg_types(env, proc.args)
        if proc.agent in agents:
            return
        definition = self.definitions.get(proc.agent)
        if definition is None:
            raise TypeCheckError(f"unbound agent `{proc.agent}`", format_process(proc))
        outer = sorted(process_names(definition.body) - set(definition.params))
        key = (proc.agent, types, tuple((name, env.lookup(name)) for name in outer))
        if key in self.checked:
            return
        self.visited.add(proc.agent)
        body_env = env.extend(dict(zip(definition.params, types)))
        try:
            self.check(body_env, agents | {proc.agent}, definition.body)
        except TypeCheckError as exc:
            if exc.message.startswith("in agent "):
                raise
            raise TypeCheckError(f"in agent `{proc.agent}`: {exc.message}", exc.node) from exc
        self.checked.add(key)


def check_process(env: TypeEnv, agents: FrozenSet[str], proc: Process,
                  definitions: Optional[Mapping[str, AgentDef]] = None) -> None:
    """Check a process under an environment and a set of assumed agents.

    Raises:
        TypeCheckError: On mode misuse, payload mismatch or an unbound agent.
    """
    _ProcessChecker(definitions or {}, env.symbols).check(env, frozenset(agents), proc)


def _network(checker: _ProcessChecker, env: TypeEnv, net: Network,
             locations: Set[str]) -> None:
    if isinstance(net, Located):
        ty = env.lookup(net.location)
        if not isinstance(ty, LocT):
            shown = "an unbound name" if ty is None else format_type(ty)
            raise TypeCheckError(f"location `{net.location}` has {shown}, expected Loc",
                                 net.location)
        checker.check(env, frozenset(), net.process)
    elif isinstance(net, Near):
        for end in (net.source, net.target):
            if not isinstance(env.lookup(end), LocT):
                raise TypeCheckError(f"connectivity endpoint `{end}` is not a location",
                                     f"{net.source} -> {net.target}")
    elif isinstance(net, ParN):
        _network(checker, env, net.left, locations)
        _network(checker, env, net.right, locations)
    elif isinstance(net, NewN):
        ty = net.type_ann or (LOC if net.name in locations else AMBIENT)
        _network(checker, env.extend({net.name: ty}), net.body, locations)
    else:
        raise TypeCheckError(f"unknown network {net!r}")


def check_network(env: TypeEnv, net: Network,
                  definitions: Optional[Mapping[str, AgentDef]] = None) -> None:
    """Check a network; unannotated restrictions in location position are Loc.

    Raises:
        TypeCheckError: On a non-Loc location label or a body error.
    """
    checker = _ProcessChecker(definitions or {}, env.symbols)
    _network(checker, env, net, location_names(net))


def numeral_names(net: Network, env: TypeEnv) -> Dict[str, Type]:
    """Unbound numerals free in `net`, typed as names.

    Counting selectors such as `size` evaluate to numerals that need not occur
    in the program text; they stand for plain data.
    """
    return {name: AMBIENT for name in free_names(net)
            if name.isdigit() and env.lookup(name) is None}


def check_state(program: Program, nf: NormalForm, env: Optional[TypeEnv] = None) -> None:
    """Check a reachable state under the program's natural environment."""
    env = env or natural_env(program)
    net = denote(nf)
    check_network(env.extend(numeral_names(net, env)), net, program.agent_map)


def typecheck_program(program: Program) -> TypeReport:
    """Check the network of a program and report per-agent failures."""
    env = natural_env(program)
    checker = _ProcessChecker(program.agent_map, env.symbols)
    try:
        _network(checker, env, program.network, location_names(program.network))
    except TypeCheckError as exc:
        agent_errors = {}
        if exc.message.startswith("in agent `"):
            agent = exc.message.split("`")[1]
            agent_errors[agent] = str(exc)
        log_debug(logger, "Type error", {"error": str(exc)})
        return TypeReport(str(exc), agent_errors,
                          frozenset(program.agent_map) - checker.visited)
    return TypeReport(None, {}, frozenset(program.agent_map) - checker.visited)

"""
Name hygiene: free and bound names, fresh names, substitution and
alpha-canonicalization over messages, processes and networks.
"""
# pylint: disable=R0911,R0912
from __future__ import annotations

import itertools
from typing import Dict, FrozenSet, Iterable, Mapping, Set, Union

from app.models.ast_model import (
    AgentCall, AgentDef, BInput, Bound, CInput, ConstructorApp, Located, Match, Message,
    Mismatch, MultisetLit, Near, Network, New, NewN, Nil, Output, Par, ParN, Pattern,
    Process, Program, SelectorApp, SetVar, Sum, TupleMsg, Var,
)
from app.utils.errors import SubstitutionError

Substitution = Mapping[str, Message]
Term = Union[Message, Process, Network]


def message_names(msg: Message) -> Set[str]:
    """Free names of a message (selector and constructor symbols excluded)."""
    if isinstance(msg, (Var, SetVar)):
        return {msg.name}
    if isinstance(msg, (TupleMsg, MultisetLit)):
        names: Set[str] = set()
        for item in msg.items:
            names |= message_names(item)
        return names
    return message_names(msg.arg)


def _bound_locations(bound: Bound) -> Set[str]:
    return {location for location, _ in bound.exceptions}


def process_names(proc: Process) -> Set[str]:
    """Free names of a process."""
    if isinstance(proc, Nil):
        return set()
    if isinstance(proc, BInput):
        binders = set(proc.pattern.binders)
        return ({proc.channel}
                | (message_names(proc.pattern.body) - binders)
                | (process_names(proc.cont) - binders))
    if isinstance(proc, CInput):
        return ({proc.channel}
                | (message_names(proc.pattern.body) - set(proc.pattern.binders))
                | (process_names(proc.cont) - {proc.setvar}))
    if isinstance(proc, Output):
        return {proc.channel} | message_names(proc.msg) | process_names(proc.cont)
    if isinstance(proc, New):
        return (process_names(proc.body) - {proc.name}) | _bound_locations(proc.bound)
    if isinstance(proc, (Match, Mismatch)):
        return message_names(proc.left) | message_names(proc.right) | process_names(proc.body)
    if isinstance(proc, (Par, Sum)):
        return process_names(proc.left) | process_names(proc.right)
    names: Set[str] = set()
    for arg in proc.args:
        names |= message_names(arg)
    return names


def network_names(net: Network) -> Set[str]:
    """Free names of a network."""
    if isinstance(net, Located):
        return {net.location} | process_names(net.process)
    if isinstance(net, ParN):
        return network_names(net.left) | network_names(net.right)
    if isinstance(net, NewN):
        return (network_names(net.body) - {net.name}) | _bound_locations(net.bound)
    return {net.source, net.target}


def free_names(term: Term) -> FrozenSet[str]:
    """fn(t) for a message, process or network."""
    if isinstance(term, (Located, ParN, NewN, Near)):
        return frozenset(network_names(term))
    if isinstance(term, (BInput, CInput, Output, New, Match, Mismatch, Par, Sum, Nil,
                         AgentCall)):
        return frozenset(process_names(term))
    return frozenset(message_names(term))


def bound_names(proc: Process) -> FrozenSet[str]:
    """Names bound anywhere inside a process."""
    found: Set[str] = set()

    def walk(node: Process) -> None:
        if isinstance(node, BInput):
            found.update(node.pattern.binders)
            walk(node.cont)
        elif isinstance(node, CInput):
            found.update(node.pattern.binders)
            found.add(node.setvar)
            walk(node.cont)
        elif isinstance(node, Output):
            walk(node.cont)
        elif isinstance(node, New):
            found.add(node.name)
            walk(node.body)
        elif isinstance(node, (Match, Mismatch)):
            walk(node.body)
        elif isinstance(node, (Par, Sum)):
            walk(node.left)
            walk(node.right)

    walk(proc)
    return frozenset(found)


def all_names(term: Term) -> Set[str]:
    """Every name occurring in a term, free or bound."""
    if isinstance(term, (Located, ParN, NewN, Near)):
        if isinstance(term, Located):
            proc = term.process
            return {term.location} | process_names(proc) | set(bound_names(proc))
        if isinstance(term, ParN):
            return all_names(term.left) | all_names(term.right)
        if isinstance(term, NewN):
            return {term.name} | all_names(term.body) | _bound_locations(term.bound)
        return {term.source, term.target}
    if isinstance(term, (BInput, CInput, Output, New, Match, Mismatch, Par, Sum, Nil,
                         AgentCall)):
        return process_names(term) | set(bound_names(term)) | _pattern_names(term)
    return message_names(term)


def _pattern_names(proc: Process) -> Set[str]:
    names: Set[str] = set()
    stack = [proc]
    while stack:
        node = stack.pop()
        if isinstance(node, (BInput, CInput)):
            names |= message_names(node.pattern.body)
            stack.append(node.cont)
        elif isinstance(node, (Output,)):
            stack.append(node.cont)
        elif isinstance(node, (New, Match, Mismatch)):
            stack.append(node.body)
        elif isinstance(node, (Par, Sum)):
            stack.extend((node.left, node.right))
    return names


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """A name built from `base` that is not in `avoid`."""
    taken = set(avoid)
    stem = base.rstrip("'")
    if "_" in stem and stem.rsplit("_", 1)[1].isdigit():
        stem = stem.rsplit("_", 1)[0] or "_"
    for index in itertools.count(1):
        candidate = f"{stem}_{index}"
        if candidate not in taken:
            return candidate
    raise AssertionError("unreachable")


def apply_subst(msg: Message, theta: Substitution) -> Message:
    """Simultaneous substitution of free names in a message.

    Raises:
        SubstitutionError: a name maps to a multiset, or a set variable to a
            first-order message.
    """
    if not theta:
        return msg
    if isinstance(msg, Var):
        if msg.name not in theta:
            return msg
        value = theta[msg.name]
        if isinstance(value, (MultisetLit, SetVar)):
            raise SubstitutionError(
                f"name `{msg.name}` cannot be instantiated with a multiset")
        return value
    if isinstance(msg, SetVar):
        if msg.name not in theta:
            return msg
        value = theta[msg.name]
        if not isinstance(value, (MultisetLit, SetVar)):
            raise SubstitutionError(
                f"set variable `{msg.name}` must be instantiated with a multiset")
        return value
    if isinstance(msg, TupleMsg):
        return TupleMsg(tuple(apply_subst(item, theta) for item in msg.items))
    if isinstance(msg, MultisetLit):
        return MultisetLit.of(apply_subst(item, theta) for item in msg.items)
    if isinstance(msg, SelectorApp):
        return SelectorApp(msg.selector, apply_subst(msg.arg, theta))
    return ConstructorApp(msg.constructor, apply_subst(msg.arg, theta))


def _subject(name: str, theta: Substitution) -> str:
    """Instantiate a name in channel, location or agent-argument-free position."""
    if name not in theta:
        return name
    value = theta[name]
    if not isinstance(value, Var):
        raise SubstitutionError(f"`{name}` is used as a channel or location and "
                                f"cannot be instantiated with a compound message")
    return value.name


def _subst_bound(bound: Bound, theta: Substitution) -> Bound:
    if not bound.exceptions:
        return bound
    return Bound(bound.default,
                 tuple((_subject(location, theta), value)
                       for location, value in bound.exceptions))


class _Substituter:
    """Capture-avoiding substitution into processes and networks."""

    def __init__(self, theta: Substitution):
        self.theta = dict(theta)
        self.range_names: Set[str] = set()
        for value in self.theta.values():
            self.range_names |= message_names(value)

    def _restrict(self, theta: Dict[str, Message], binders: Iterable[str]) -> Dict[str, Message]:
        binders = set(binders)
        return {key: value for key, value in theta.items() if key not in binders}

    def _clash(self, binder: str, theta: Dict[str, Message]) -> bool:
        if not theta:
            return False
        for value in theta.values():
            if binder in message_names(value):
                return True
        return False

    def _rename_binders(self, binders, bodies, theta, make):
        """Rename the binders that would capture names of theta's range."""
        mapping: Dict[str, Message] = {}
        avoid = set(self.range_names) | set(theta)
        for body in bodies:
            avoid |= all_names(body)
        avoid |= set(binders)
        renamed = []
        for binder in binders:
            if self._clash(binder, theta):
                new = fresh_name(binder, avoid)
                avoid.add(new)
                mapping[binder] = make(new)
                renamed.append(new)
            else:
                renamed.append(binder)
        return tuple(renamed), mapping

    def process(self, proc: Process, theta: Dict[str, Message]) -> Process:
        """Substitute into a process."""
        if not theta or isinstance(proc, Nil):
            return proc
        if isinstance(proc, BInput):
            inner = self._restrict(theta, proc.pattern.binders)
            binders, mapping = self._rename_binders(
                proc.pattern.binders, (proc.pattern.body, proc.cont), inner, Var)
            body, cont = proc.pattern.body, proc.cont
            if mapping:
                body = apply_subst(body, mapping)
                cont = substitute_process(cont, mapping)
            return BInput(_subject(proc.channel, theta),
                          Pattern(binders, apply_subst(body, inner)),
                          self.process(cont, inner))
        if isinstance(proc, CInput):
            pattern_theta = self._restrict(theta, proc.pattern.binders)
            binders, mapping = self._rename_binders(
                proc.pattern.binders, (proc.pattern.body,), pattern_theta, Var)
            body = apply_subst(proc.pattern.body, mapping) if mapping else proc.pattern.body
            cont_theta = self._restrict(theta, (proc.setvar,))
            (setvar,), set_mapping = self._rename_binders(
                (proc.setvar,), (proc.cont,), cont_theta, SetVar)
            cont = substitute_process(proc.cont, set_mapping) if set_mapping else proc.cont
            return CInput(_subject(proc.channel, theta),
                          Pattern(binders, apply_subst(body, pattern_theta)),
                          setvar, self.process(cont, cont_theta))
        if isinstance(proc, Output):
            return Output(_subject(proc.channel, theta), apply_subst(proc.msg, theta),
                          self.process(proc.cont, theta))
        if isinstance(proc, New):
            inner = self._restrict(theta, (proc.name,))
            (name,), mapping = self._rename_binders((proc.name,), (proc.body,), inner, Var)
            body = substitute_process(proc.body, mapping) if mapping else proc.body
            return New(name, _subst_bound(proc.bound, theta), self.process(body, inner),
                       proc.type_ann)
        if isinstance(proc, Match):
            return Match(apply_subst(proc.left, theta), apply_subst(proc.right, theta),
                         self.process(proc.body, theta))
        if isinstance(proc, Mismatch):
            return Mismatch(apply_subst(proc.left, theta), apply_subst(proc.right, theta),
                            self.process(proc.body, theta))
        if isinstance(proc, Par):
            return Par(self.process(proc.left, theta), self.process(proc.right, theta))
        if isinstance(proc, Sum):
            return Sum(self.process(proc.left, theta), self.process(proc.right, theta))
        return AgentCall(proc.agent, tuple(apply_subst(arg, theta) for arg in proc.args))

    def network(self, net: Network, theta: Dict[str, Message]) -> Network:
        """Substitute into a network."""
        if not theta:
            return net
        if isinstance(net, Located):
            return Located(_subject(net.location, theta), self.process(net.process, theta))
        if isinstance(net, ParN):
            return ParN(self.network(net.left, theta), self.network(net.right, theta))
        if isinstance(net, Near):
            return Near(_subject(net.source, theta), _subject(net.target, theta))
        inner = self._restrict(theta, (net.name,))
        (name,), mapping = self._rename_binders((net.name,), (net.body,), inner, Var)
        body = substitute_network(net.body, mapping) if mapping else net.body
        return NewN(name, _subst_bound(net.bound, theta), self.network(body, inner),
                    net.type_ann)


def substitute_process(proc: Process, theta: Substitution) -> Process:
    """Capture-avoiding substitution of free names in a process."""
    if not theta:
        return proc
    return _Substituter(theta).process(proc, dict(theta))


def substitute_network(net: Network, theta: Substitution) -> Network:
    """Capture-avoiding substitution of free names in a network."""
    if not theta:
        return net
    return _Substituter(theta).network(net, dict(theta))


def canonical_prefix(free: Iterable[str]) -> str:
    """Shortest run of underscores that no free name starts with."""
    longest = 0
    for name in free:
        run = len(name) - len(name.lstrip("_"))
        longest = max(longest, run)
    return "_" * (longest + 1)


class _AlphaRenamer:
    """Pre-order renaming of every binder to `{prefix}{index}`."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self.counter = itertools.count()

    def _next(self) -> str:
        return f"{self.prefix}{next(self.counter)}"

    @staticmethod
    def _msg(msg: Message, env: Mapping[str, str]) -> Message:
        if not env:
            return msg
        return apply_subst(msg, _as_theta(msg, env))

    def process(self, proc: Process, env: Dict[str, str]) -> Process:
        """Rename binders of a process."""
        def rename(name: str) -> str:
            return env.get(name, name)

        if isinstance(proc, Nil):
            return proc
        if isinstance(proc, BInput):
            inner = dict(env)
            binders = []
            for binder in proc.pattern.binders:
                inner[binder] = self._next()
                binders.append(inner[binder])
            return BInput(rename(proc.channel),
                          Pattern(tuple(binders), self._msg(proc.pattern.body, inner)),
                          self.process(proc.cont, inner))
        if isinstance(proc, CInput):
            pattern_env = dict(env)
            binders = []
            for binder in proc.pattern.binders:
                pattern_env[binder] = self._next()
                binders.append(pattern_env[binder])
            cont_env = dict(env)
            cont_env[proc.setvar] = self._next()
            return CInput(rename(proc.channel),
                          Pattern(tuple(binders), self._msg(proc.pattern.body, pattern_env)),
                          cont_env[proc.setvar], self.process(proc.cont, cont_env))
        if isinstance(proc, Output):
            return Output(rename(proc.channel), self._msg(proc.msg, env),
                          self.process(proc.cont, env))
        if isinstance(proc, New):
            inner = dict(env)
            inner[proc.name] = self._next()
            return New(inner[proc.name], _rename_bound(proc.bound, env),
                       self.process(proc.body, inner), proc.type_ann)
        if isinstance(proc, (Match, Mismatch)):
            return type(proc)(self._msg(proc.left, env), self._msg(proc.right, env),
                              self.process(proc.body, env))
        if isinstance(proc, (Par, Sum)):
            left = self.process(proc.left, env)
            return type(proc)(left, self.process(proc.right, env))
        return AgentCall(proc.agent, tuple(self._msg(arg, env) for arg in proc.args))

    def network(self, net: Network, env: Dict[str, str]) -> Network:
        """Rename binders of a network."""
        if isinstance(net, Located):
            return Located(env.get(net.location, net.location), self.process(net.process, env))
        if isinstance(net, ParN):
            left = self.network(net.left, env)
            return ParN(left, self.network(net.right, env))
        if isinstance(net, Near):
            return Near(env.get(net.source, net.source), env.get(net.target, net.target))
        inner = dict(env)
        inner[net.name] = self._next()
        return NewN(inner[net.name], _rename_bound(net.bound, env),
                    self.network(net.body, inner), net.type_ann)


def _as_theta(msg: Message, env: Mapping[str, str]) -> Dict[str, Message]:
    theta: Dict[str, Message] = {}
    stack = [msg]
    while stack:
        node = stack.pop()
        if isinstance(node, Var) and node.name in env:
            theta[node.name] = Var(env[node.name])
        elif isinstance(node, SetVar) and node.name in env:
            theta[node.name] = SetVar(env[node.name])
        elif isinstance(node, (TupleMsg, MultisetLit)):
            stack.extend(node.items)
        elif isinstance(node, (SelectorApp, ConstructorApp)):
            stack.append(node.arg)
    return theta


def _rename_bound(bound: Bound, env: Mapping[str, str]) -> Bound:
    if not bound.exceptions:
        return bound
    return Bound(bound.default,
                 tuple((env.get(location, location), value)
                       for location, value in bound.exceptions))


def alpha_canonical(net: Network) -> Network:
    """Alpha-equivalent network whose binders follow a position-indexed scheme.

    Two networks are alpha-equivalent iff their canonical forms are equal.
    """
    prefix = canonical_prefix(network_names(net))
    return _AlphaRenamer(prefix).network(net, {})


def alpha_canonical_process(proc: Process, free: Iterable[str] = ()) -> Process:
    """Alpha-canonical form of a process; `free` widens the names to avoid."""
    prefix = canonical_prefix(set(process_names(proc)) | set(free))
    return _AlphaRenamer(prefix).process(proc, {})


def alpha_canonical_program(program: Program) -> Program:
    """Program with its network and every agent body alpha-canonicalized."""
    agents = tuple(
        AgentDef(agent.name, agent.params, alpha_canonical_process(agent.body, agent.params))
        for agent in program.agents
    )
    return Program(
        network=alpha_canonical(program.network),
        constructors=program.constructors,
        selectors=program.selectors,
        channels=program.channels,
        agents=agents,
        types=program.types,
    )

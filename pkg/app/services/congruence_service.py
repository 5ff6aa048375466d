"""
Structural congruence: normalization to normal form, process-level
canonicalization and the sound equivalence check built on canonical forms.
"""
# pylint: disable=R0911,R0912,R0914
from __future__ import annotations

from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from app.models.ast_model import (
    AgentCall, BInput, Bound, CInput, Located, Match, Message, Mismatch, NIL, Near, Network,
    New, NewN, Nil, Output, Par, ParN, Pattern, Process, SetVar, Sum, Var, message_key,
    name_key,
)
from app.models.normal_form_model import Connectivity, NormalForm, Restriction
from app.services.eval_service import BuiltinRegistry, default_registry, evaluate, is_evaluable
from app.services.names_service import (
    alpha_canonical, apply_subst, canonical_prefix, message_names, network_names,
    process_names, substitute_process,
)
from app.utils.errors import EvaluationError


def bound_key(bound: Bound) -> tuple:
    """Total order on bounds."""
    return (bound.default is None, bound.default or 0,
            tuple((name_key(loc), value) for loc, value in bound.exceptions))


@lru_cache(maxsize=200_000)
def process_key(proc: Process) -> tuple:
    """Total order on processes (constructor tag, then children)."""
    if isinstance(proc, Nil):
        return (0,)
    if isinstance(proc, Output):
        return (1, name_key(proc.channel), message_key(proc.msg), process_key(proc.cont))
    if isinstance(proc, BInput):
        return (2, name_key(proc.channel), tuple(proc.pattern.binders),
                message_key(proc.pattern.body), process_key(proc.cont))
    if isinstance(proc, CInput):
        return (3, name_key(proc.channel), tuple(proc.pattern.binders),
                message_key(proc.pattern.body), proc.setvar, process_key(proc.cont))
    if isinstance(proc, New):
        return (4, proc.name, bound_key(proc.bound), repr(proc.type_ann),
                process_key(proc.body))
    if isinstance(proc, Match):
        return (5, message_key(proc.left), message_key(proc.right), process_key(proc.body))
    if isinstance(proc, Mismatch):
        return (6, message_key(proc.left), message_key(proc.right), process_key(proc.body))
    if isinstance(proc, Par):
        return (7, process_key(proc.left), process_key(proc.right))
    if isinstance(proc, Sum):
        return (8, process_key(proc.left), process_key(proc.right))
    return (9, proc.agent, tuple(message_key(arg) for arg in proc.args))


def connected(connectivity: Connectivity, source: str, target: str) -> bool:
    """source |> target is in C (directional)."""
    return (source, target) in connectivity


class _Normalizer:
    """Scope extension, binder lifting and location splitting over an alpha-canonical network."""

    def __init__(self):
        self.restrictions: List[Restriction] = []
        self.near: Set[Tuple[str, str]] = set()
        self.entries: List[Tuple[str, Process]] = []
        self.nil_locations: List[str] = []

    def network(self, net: Network) -> None:
        if isinstance(net, Located):
            self.split(net.location, net.process)
        elif isinstance(net, ParN):
            self.network(net.left)
            self.network(net.right)
        elif isinstance(net, NewN):
            self.restrictions.append(Restriction(net.name, net.bound, net.type_ann))
            self.network(net.body)
        else:
            self.near.add((net.source, net.target))

    def split(self, location: str, proc: Process) -> None:
        if isinstance(proc, Par):
            self.split(location, proc.left)
            self.split(location, proc.right)
        elif isinstance(proc, New):
            self.restrictions.append(Restriction(proc.name, proc.bound, proc.type_ann))
            self.split(location, proc.body)
        elif isinstance(proc, Nil):
            self.nil_locations.append(location)
        else:
            self.entries.append((location, proc))

    def result(self) -> NormalForm:
        hosting = {location for location, _ in self.entries}
        for location in self.nil_locations:
            if location not in hosting:
                hosting.add(location)
                self.entries.append((location, NIL))
        located = tuple(sorted(self.entries,
                               key=lambda entry: (name_key(entry[0]), process_key(entry[1]))))
        restrictions = tuple(sorted(self.restrictions, key=lambda item: name_key(item.name)))
        return NormalForm(restrictions, frozenset(self.near), located)


def normalize(net: Network) -> NormalForm:
    """Normal form structurally congruent to `net`.

    Binders are first renamed apart (alpha-canonical scheme), so lifting a
    restriction never captures a name.
    """
    normalizer = _Normalizer()
    normalizer.network(alpha_canonical(net))
    return normalizer.result()


def _normalize_renamed(net: Network) -> NormalForm:
    """Normal form of a network whose binders are already pairwise distinct and fresh."""
    normalizer = _Normalizer()
    normalizer.network(net)
    return normalizer.result()


def denote(nf: NormalForm) -> Network:
    """The network a normal form stands for."""
    atoms: List[Network] = [Near(source, target)
                            for source, target in sorted(nf.connectivity,
                                                         key=lambda pair: (name_key(pair[0]),
                                                                           name_key(pair[1])))]
    atoms.extend(Located(location, proc) for location, proc in nf.located)
    body = atoms[0]
    for atom in atoms[1:]:
        body = ParN(body, atom)
    for item in reversed(nf.restrictions):
        body = NewN(item.name, item.bound, body, item.type_ann)
    return body


def normal_form_names(nf: NormalForm) -> FrozenSet[str]:
    """Free names of the network a normal form denotes."""
    return frozenset(network_names(denote(nf)))


class _Simplifier:
    """Evaluates ground messages and resolves decided guards."""

    def __init__(self, registry: BuiltinRegistry):
        self.registry = registry

    def message(self, msg: Message, bound: FrozenSet[str]) -> Message:
        if message_names(msg) & bound or not is_evaluable(msg):
            return msg
        try:
            return evaluate(msg, self.registry)
        except EvaluationError:
            return msg

    def process(self, proc: Process, bound: FrozenSet[str] = frozenset()) -> Process:
        if isinstance(proc, Nil):
            return proc
        if isinstance(proc, Output):
            return Output(proc.channel, self.message(proc.msg, bound),
                          self.process(proc.cont, bound))
        if isinstance(proc, BInput):
            return BInput(proc.channel, proc.pattern,
                          self.process(proc.cont, bound | set(proc.pattern.binders)))
        if isinstance(proc, CInput):
            return CInput(proc.channel, proc.pattern, proc.setvar,
                          self.process(proc.cont, bound | {proc.setvar}))
        if isinstance(proc, New):
            return New(proc.name, proc.bound, self.process(proc.body, bound), proc.type_ann)
        if isinstance(proc, (Match, Mismatch)):
            left = self.message(proc.left, bound)
            right = self.message(proc.right, bound)
            body = self.process(proc.body, bound)
            ground = not ((message_names(left) | message_names(right)) & bound)
            if isinstance(proc, Match) and left == right:
                return body
            if (isinstance(proc, Mismatch) and ground and left != right
                    and is_evaluable(left) and is_evaluable(right)):
                return body
            return type(proc)(left, right, body)
        if isinstance(proc, (Par, Sum)):
            return type(proc)(self.process(proc.left, bound), self.process(proc.right, bound))
        return AgentCall(proc.agent, tuple(self.message(arg, bound) for arg in proc.args))


def _flatten(proc: Process, kind: type) -> List[Process]:
    if isinstance(proc, kind):
        return _flatten(proc.left, kind) + _flatten(proc.right, kind)
    return [proc]


def _rebuild(operands: Sequence[Process], kind: type) -> Process:
    result = operands[0]
    for operand in operands[1:]:
        result = kind(result, operand)
    return result


class _Canonicalizer:
    """Depth-indexed binder names, AC-sorted Par/Sum and oriented guards.

    Unused restrictions are dropped.
    """

    def __init__(self, prefix: str):
        self.prefix = prefix

    def _binder(self, depth: int) -> str:
        return f"{self.prefix}b{depth}"

    @staticmethod
    def _msg(msg: Message, env: Dict[str, Message]) -> Message:
        if not env:
            return msg
        relevant = {name: env[name] for name in message_names(msg) if name in env}
        return apply_subst(msg, relevant) if relevant else msg

    def process(self, proc: Process, env: Dict[str, Message], depth: int) -> Process:
        if isinstance(proc, Nil):
            return proc
        if isinstance(proc, Output):
            return Output(self._name(proc.channel, env), self._msg(proc.msg, env),
                          self.process(proc.cont, env, depth))
        if isinstance(proc, BInput):
            inner = dict(env)
            binders = []
            for offset, binder in enumerate(proc.pattern.binders):
                name = self._binder(depth + offset)
                inner[binder] = Var(name)
                binders.append(name)
            return BInput(self._name(proc.channel, env),
                          Pattern(tuple(binders), self._msg(proc.pattern.body, inner)),
                          self.process(proc.cont, inner, depth + len(binders)))
        if isinstance(proc, CInput):
            pattern_env = dict(env)
            binders = []
            for offset, binder in enumerate(proc.pattern.binders):
                name = self._binder(depth + offset)
                pattern_env[binder] = Var(name)
                binders.append(name)
            setvar = self._binder(depth + len(binders))
            cont_env = dict(env)
            cont_env[proc.setvar] = SetVar(setvar)
            return CInput(self._name(proc.channel, env),
                          Pattern(tuple(binders), self._msg(proc.pattern.body, pattern_env)),
                          setvar, self.process(proc.cont, cont_env, depth + len(binders) + 1))
        if isinstance(proc, New):
            if proc.name not in process_names(proc.body):
                return self.process(proc.body, env, depth)
            inner = dict(env)
            name = self._binder(depth)
            inner[proc.name] = Var(name)
            return New(name, self._bound(proc.bound, env),
                       self.process(proc.body, inner, depth + 1), proc.type_ann)
        if isinstance(proc, (Match, Mismatch)):
            left, right = self._msg(proc.left, env), self._msg(proc.right, env)
            if message_key(left) > message_key(right):
                left, right = right, left
            return type(proc)(left, right, self.process(proc.body, env, depth))
        if isinstance(proc, Par):
            operands = [self.process(item, env, depth) for item in _flatten(proc, Par)]
            operands = [item for item in operands if not isinstance(item, Nil)]
            if not operands:
                return NIL
            return _rebuild(sorted(operands, key=process_key), Par)
        if isinstance(proc, Sum):
            operands = [self.process(item, env, depth) for item in _flatten(proc, Sum)]
            return _rebuild(sorted(operands, key=process_key), Sum)
        return AgentCall(proc.agent, tuple(self._msg(arg, env) for arg in proc.args))

    @staticmethod
    def _name(name: str, env: Dict[str, Message]) -> str:
        value = env.get(name)
        return value.name if isinstance(value, (Var, SetVar)) else name

    def _bound(self, bound: Bound, env: Dict[str, Message]) -> Bound:
        if not bound.exceptions:
            return bound
        return Bound(bound.default, tuple((self._name(loc, env), value)
                                          for loc, value in bound.exceptions))


def _rank(values: Dict[str, tuple]) -> Dict[str, int]:
    ordered = sorted(set(values.values()))
    index = {value: position for position, value in enumerate(ordered)}
    return {name: index[value] for name, value in values.items()}


def _order_restricted(nf: NormalForm, canon: _Canonicalizer) -> List[str]:
    """Order restricted names by a refinement signature; ties keep their current order."""
    names = [item.name for item in nf.restrictions]
    if len(names) < 2:
        return names
    restricted = set(names)
    entry_names = [process_names(proc) | {location} for location, proc in nf.located]
    colors = _rank({item.name: (bound_key(item.bound), repr(item.type_ann))
                    for item in nf.restrictions})
    classes = len(set(colors.values()))
    for _ in range(len(names)):
        placeholder = {name: Var(f"{canon.prefix}c{colors[name]}") for name in names}

        def tag(name: str, owner: str) -> tuple:
            if name == owner:
                return (0, 0, "")
            if name in restricted:
                return (1, colors[name], "")
            return (2,) + name_key(name)[1:]

        entry_keys = []
        for location, proc in nf.located:
            shaped = canon.process(substitute_process(proc, placeholder), {}, 0)
            loc_value = placeholder.get(location)
            entry_keys.append((loc_value.name if loc_value else location, process_key(shaped)))
        signature = {}
        for name in names:
            occurrences = sorted(
                (tag(location, name), key[1])
                for key, (location, _), free in zip(entry_keys, nf.located, entry_names)
                if name in free
            )
            atoms = sorted((tag(source, name), tag(target, name))
                           for source, target in nf.connectivity if name in (source, target))
            signature[name] = (colors[name], tuple(occurrences), tuple(atoms))
        refined = _rank(signature)
        refined_classes = len(set(refined.values()))
        colors = refined
        if refined_classes == classes:
            break
        classes = refined_classes
    position = {name: index for index, name in enumerate(names)}
    return sorted(names, key=lambda name: (colors[name], position[name]))


def _collect_garbage(nf: NormalForm) -> NormalForm:
    """Drop restrictions nothing mentions and inert entries at restricted locations."""
    restricted = nf.restricted
    entries = list(nf.located)
    if len(entries) > 1 or nf.connectivity:
        entries = [(loc, proc) for loc, proc in entries
                   if not (isinstance(proc, Nil) and loc in restricted)] or entries[:1]
    used: Set[str] = set()
    for location, proc in entries:
        used |= process_names(proc) | {location}
    for source, target in nf.connectivity:
        used |= {source, target}
    changed = True
    kept = list(nf.restrictions)
    while changed:
        changed = False
        mentioned = set(used)
        for item in kept:
            mentioned |= {loc for loc, _ in item.bound.exceptions}
        survivors = [item for item in kept if item.name in mentioned]
        if len(survivors) != len(kept):
            kept = survivors
            changed = True
    return NormalForm(tuple(kept), nf.connectivity, tuple(entries))


def canonical_form(target, registry: Optional[BuiltinRegistry] = None) -> NormalForm:
    """Canonical representative of the congruence class of a network or normal form.

    Ground messages are evaluated, decided guards resolved, unused restrictions
    dropped, and every bound name renamed to a position- or depth-indexed name.
    """
    registry = registry or default_registry()
    nf = normalize(denote(target) if isinstance(target, NormalForm) else target)
    simplifier = _Simplifier(registry)
    simplified = NormalForm(nf.restrictions, nf.connectivity,
                            tuple((loc, simplifier.process(proc)) for loc, proc in nf.located))
    nf = _collect_garbage(_normalize_renamed(denote(simplified)))

    prefix = canonical_prefix(normal_form_names(nf))
    canon = _Canonicalizer(prefix)
    order = _order_restricted(nf, canon)
    mapping = {name: f"{prefix}n{index}" for index, name in enumerate(order)}
    theta = {old: Var(new) for old, new in mapping.items()}

    def rename(name: str) -> str:
        return mapping.get(name, name)

    by_name = {item.name: item for item in nf.restrictions}
    restrictions = tuple(
        Restriction(mapping[name],
                    Bound(by_name[name].bound.default,
                          tuple((rename(loc), value)
                                for loc, value in by_name[name].bound.exceptions)),
                    by_name[name].type_ann)
        for name in order
    )
    connectivity = frozenset((rename(source), rename(target_))
                             for source, target_ in nf.connectivity)
    entries = []
    for location, proc in nf.located:
        renamed = substitute_process(proc, theta)
        canonical = canon.process(renamed, {}, 0)
        if isinstance(canonical, Par):
            entries.extend((rename(location), item) for item in _flatten(canonical, Par))
        else:
            entries.append((rename(location), canonical))
    hosting = {loc for loc, proc in entries if not isinstance(proc, Nil)}
    deduped = []
    seen_nil: Set[str] = set()
    for location, proc in entries:
        if isinstance(proc, Nil):
            if location in hosting or location in seen_nil:
                continue
            seen_nil.add(location)
        deduped.append((location, proc))
    located = tuple(sorted(deduped, key=lambda entry: (name_key(entry[0]),
                                                        process_key(entry[1]))))
    return NormalForm(restrictions, connectivity, located)


def cong_equiv(first: Network, second: Network,
               registry: Optional[BuiltinRegistry] = None) -> bool:
    """Sound check of structural congruence: True implies first == second up to congruence.

    The congruence checked is the one of the process and network tables extended
    with garbage collection: `(new x) N == N` and `(new x) P == P` when x is not
    free, and an inert `l::[ 0 ]` at a restricted location is dropped. Neither
    law follows from the tables alone, so `new x in l::[ 0 ]` and `l::[ 0 ]` are
    related here but not by the tables.
    """
    return canonical_form(first, registry) == canonical_form(second, registry)

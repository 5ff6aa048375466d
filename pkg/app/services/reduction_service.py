"""
Reduction engine: Broad, Local and Coll over normal forms, seeded runs and
bounded state-graph construction.
"""
# pylint: disable=R0902,R0913,R0914
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import (
    Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union,
)

import networkx as nx

from app.models.ast_model import (
    AgentCall, BInput, Bound, CInput, Match, Message, Mismatch, New, Nil, Output, Par,
    Pattern, Process, Program, Sum, Var, name_key,
)
from app.models.normal_form_model import NormalForm, Restriction
from app.models.reduction_model import (
    BroadLabel, CollLabel, Limits, LocalLabel, Mode, RuleLabel, StateGraph, Trace, label_key,
)
from app.services.congruence_service import canonical_form, process_key
from app.services.eval_service import (
    BuiltinRegistry, build_registry, evaluate, match_broadcast, match_collection,
)
from app.services.names_service import all_names, fresh_name, substitute_process
from app.utils.errors import EvaluationError, ReductionError
from app.utils.logger import get_logger, log_debug, log_warning

logger = get_logger(__name__)

Rebuild = Callable[[Process], Process]


def _identity(proc: Process) -> Process:
    return proc


def guard_holds(proc: Union[Match, Mismatch], registry: BuiltinRegistry) -> bool:
    """Whether a match or mismatch guard is satisfied by the evaluated operands."""
    try:
        left = evaluate(proc.left, registry)
        right = evaluate(proc.right, registry)
    except EvaluationError:
        return False
    return (left == right) == isinstance(proc, Match)


@dataclass(frozen=True)
class Offer:
    """A prefix exposed by an entry, with the way to rebuild the entry once it fires."""

    kind: str
    channel: str
    cont: Process
    rebuild: Rebuild
    lifted: Tuple[Restriction, ...] = ()
    message: Optional[Message] = None
    pattern: Optional[Pattern] = None
    setvar: Optional[str] = None

    def residual(self, cont: Process) -> Process:
        """Entry after the prefix fired with the instantiated continuation."""
        return self.rebuild(cont)


@dataclass
class _Entry:
    location: str
    process: Process
    offers: List[Offer] = field(default_factory=list)


class ReductionService:
    """Successor enumeration for one program.

    Args:
        program: The program whose agents, bounds and signature are used.
        unfold_budget: Nested agent unfoldings allowed to expose one prefix.
    """

    def __init__(self, program: Program, unfold_budget: int = 32,
                 registry: Optional[BuiltinRegistry] = None):
        self.program = program
        self.registry = registry or build_registry(program)
        self.unfold_budget = unfold_budget
        self.budget_exhausted = False
        self._avoid: Set[str] = set()

    def _fresh(self, base: str) -> str:
        name = fresh_name(base, self._avoid)
        self._avoid.add(name)
        return name

    def unfold(self, call: AgentCall) -> Process:
        """Body of the called agent with its parameters instantiated."""
        agent = self.program.agent_map.get(call.agent)
        if agent is None:
            raise ReductionError(f"undefined agent `{call.agent}`")
        if len(agent.params) != len(call.args):
            raise ReductionError(f"agent `{call.agent}` called with {len(call.args)} "
                                 f"argument(s), expects {len(agent.params)}")
        return substitute_process(agent.body, dict(zip(agent.params, call.args)))

    def _lift(self, proc: New) -> Tuple[Restriction, Process]:
        name = self._fresh(proc.name)
        body = substitute_process(proc.body, {proc.name: Var(name)})
        return Restriction(name, proc.bound, proc.type_ann), body

    def offers(self, proc: Process, budget: int, rebuild: Rebuild = _identity,
               lifted: Tuple[Restriction, ...] = ()) -> Iterator[Offer]:
        """Prefixes ready to fire in `proc`, unfolding agent calls within the budget."""
        if isinstance(proc, Output):
            try:
                message = evaluate(proc.msg, self.registry)
            except EvaluationError as exc:
                log_debug(logger, "Output blocked", {"channel": proc.channel,
                                                     "reason": exc.message})
                return
            yield Offer("out", proc.channel, proc.cont, rebuild, lifted, message=message)
        elif isinstance(proc, BInput):
            yield Offer("bin", proc.channel, proc.cont, rebuild, lifted, pattern=proc.pattern)
        elif isinstance(proc, CInput):
            yield Offer("cin", proc.channel, proc.cont, rebuild, lifted,
                        pattern=proc.pattern, setvar=proc.setvar)
        elif isinstance(proc, Sum):
            yield from self.offers(proc.left, budget, rebuild, lifted)
            yield from self.offers(proc.right, budget, rebuild, lifted)
        elif isinstance(proc, Par):
            right, left = proc.right, proc.left
            yield from self.offers(left, budget,
                                   lambda cont: rebuild(Par(cont, right)), lifted)
            yield from self.offers(right, budget,
                                   lambda cont: rebuild(Par(left, cont)), lifted)
        elif isinstance(proc, (Match, Mismatch)):
            if guard_holds(proc, self.registry):
                yield from self.offers(proc.body, budget, rebuild, lifted)
        elif isinstance(proc, New):
            restriction, body = self._lift(proc)
            yield from self.offers(body, budget, rebuild, lifted + (restriction,))
        elif isinstance(proc, AgentCall):
            if budget <= 0:
                self.budget_exhausted = True
                return
            yield from self.offers(self.unfold(proc), budget - 1, rebuild, lifted)

    def expose(self, nf: NormalForm) -> NormalForm:
        """Unfold top-level agent calls and split what they expose into entries."""
        restrictions = list(nf.restrictions)
        entries: List[Tuple[str, Process]] = []
        pending = [(location, proc, self.unfold_budget) for location, proc in nf.located]
        while pending:
            location, proc, budget = pending.pop(0)
            if isinstance(proc, AgentCall):
                if budget <= 0:
                    self.budget_exhausted = True
                    entries.append((location, proc))
                else:
                    pending.append((location, self.unfold(proc), budget - 1))
            elif isinstance(proc, Par):
                pending.append((location, proc.left, budget))
                pending.append((location, proc.right, budget))
            elif isinstance(proc, New):
                restriction, body = self._lift(proc)
                restrictions.append(restriction)
                pending.append((location, body, budget))
            elif not isinstance(proc, Nil):
                entries.append((location, proc))
        if not entries:
            return nf
        return NormalForm(tuple(restrictions), nf.connectivity, tuple(entries))

    def _bound(self, nf: NormalForm, channel: str, location: str,
               lifted: Sequence[Restriction]) -> Optional[int]:
        for item in lifted:
            if item.name == channel:
                return item.bound.at(location)
        restriction = nf.restriction(channel)
        bound: Bound = restriction.bound if restriction else self.program.bound_of(channel)
        return bound.at(location)

    def _prepare(self, nf: NormalForm) -> Tuple[NormalForm, List[_Entry]]:
        self._avoid = set()
        for location, proc in nf.located:
            self._avoid |= all_names(proc) | {location}
        self._avoid |= nf.restricted
        self._avoid |= {name for pair in nf.connectivity for name in pair}
        exposed = self.expose(nf)
        for location, proc in exposed.located:
            self._avoid |= all_names(proc) | {location}
        entries = [_Entry(location, proc) for location, proc in exposed.located]
        for entry in entries:
            entry.offers = list(self.offers(entry.process, self.unfold_budget))
        return exposed, entries

    @staticmethod
    def _assemble(nf: NormalForm, entries: List[_Entry], replaced: Dict[int, Process],
                  lifted: Sequence[Restriction]) -> NormalForm:
        located = tuple((entry.location, replaced.get(index, entry.process))
                        for index, entry in enumerate(entries))
        extra = []
        for item in lifted:
            if item not in extra:
                extra.append(item)
        return NormalForm(nf.restrictions + tuple(extra), nf.connectivity, located)

    def _local(self, nf: NormalForm, entries: List[_Entry]):
        for out_index, sender in enumerate(entries):
            for out in sender.offers:
                if out.kind != "out":
                    continue
                for in_index, receiver in enumerate(entries):
                    if in_index == out_index or receiver.location != sender.location:
                        continue
                    for inp in receiver.offers:
                        if inp.kind != "bin" or inp.channel != out.channel:
                            continue
                        theta = match_broadcast(out.message, inp.pattern)
                        if theta is None:
                            continue
                        replaced = {
                            out_index: out.residual(out.cont),
                            in_index: inp.residual(substitute_process(inp.cont, theta)),
                        }
                        label = LocalLabel(out.channel, sender.location, out.message)
                        yield label, self._assemble(nf, entries, replaced,
                                                    out.lifted + inp.lifted)

    def _broad(self, nf: NormalForm, entries: List[_Entry], mode: Mode):
        for out_index, sender in enumerate(entries):
            for out in sender.offers:
                if out.kind != "out":
                    continue
                by_location: Dict[str, List[Tuple[int, Offer, dict]]] = {}
                for in_index, receiver in enumerate(entries):
                    if receiver.location == sender.location or (
                            sender.location, receiver.location) not in nf.connectivity:
                        continue
                    for inp in receiver.offers:
                        if inp.kind != "bin" or inp.channel != out.channel:
                            continue
                        theta = match_broadcast(out.message, inp.pattern)
                        if theta is not None:
                            by_location.setdefault(receiver.location, []).append(
                                (in_index, inp, theta))
                if not by_location:
                    continue
                bound = self._bound(nf, out.channel, sender.location, out.lifted)
                locations = sorted(by_location, key=name_key)
                delivered = len(locations) if bound is None else min(len(locations), bound)
                if mode is Mode.DEFAULT:
                    subsets = [locations[:delivered]]
                else:
                    subsets = list(itertools.combinations(locations, delivered))
                for subset in subsets:
                    choices = ([by_location[loc][0]] for loc in subset) \
                        if mode is Mode.DEFAULT else (by_location[loc] for loc in subset)
                    for picked in itertools.product(*choices):
                        if bound is not None and len(picked) > bound:
                            raise ReductionError(
                                f"broadcast on `{out.channel}` exceeds bound {bound}")
                        replaced = {out_index: out.residual(out.cont)}
                        lifted = list(out.lifted)
                        for in_index, inp, theta in picked:
                            replaced[in_index] = inp.residual(
                                substitute_process(inp.cont, theta))
                            lifted.extend(inp.lifted)
                        label = BroadLabel(out.channel, sender.location, tuple(subset),
                                           out.message)
                        yield label, self._assemble(nf, entries, replaced, lifted)

    def _coll(self, nf: NormalForm, entries: List[_Entry], mode: Mode):
        for in_index, receiver in enumerate(entries):
            for inp in receiver.offers:
                if inp.kind != "cin":
                    continue
                by_location: Dict[str, List[Tuple[int, Offer]]] = {}
                for out_index, sender in enumerate(entries):
                    if sender.location == receiver.location or (
                            sender.location, receiver.location) not in nf.connectivity:
                        continue
                    for out in sender.offers:
                        if out.kind != "out" or out.channel != inp.channel:
                            continue
                        if match_broadcast(out.message, inp.pattern) is not None:
                            by_location.setdefault(sender.location, []).append(
                                (out_index, out))
                if not by_location:
                    continue
                bound = self._bound(nf, inp.channel, receiver.location, inp.lifted)
                locations = sorted(by_location, key=name_key)
                largest = len(locations) if bound is None else min(len(locations), bound)
                if mode is Mode.DEFAULT:
                    subsets = [tuple(locations[:largest])]
                else:
                    subsets = [subset for size in range(1, largest + 1)
                               for subset in itertools.combinations(locations, size)]
                for subset in subsets:
                    choices = ([by_location[loc][0]] for loc in subset) \
                        if mode is Mode.DEFAULT else (by_location[loc] for loc in subset)
                    for picked in itertools.product(*choices):
                        if bound is not None and len(picked) > bound:
                            raise ReductionError(
                                f"collection on `{inp.channel}` exceeds bound {bound}")
                        collected = match_collection((out.message for _, out in picked),
                                                     inp.pattern)
                        if collected is None:
                            continue
                        replaced = {in_index: inp.residual(
                            substitute_process(inp.cont, {inp.setvar: collected}))}
                        lifted = list(inp.lifted)
                        for out_index, out in picked:
                            replaced[out_index] = out.residual(out.cont)
                            lifted.extend(out.lifted)
                        label = CollLabel(inp.channel, receiver.location, tuple(subset),
                                          collected)
                        yield label, self._assemble(nf, entries, replaced, lifted)

    def successors(self, nf: NormalForm,
                   mode: Mode = Mode.DEFAULT) -> List[Tuple[RuleLabel, NormalForm]]:
        """All (label, canonical successor) pairs of a state, deduplicated and sorted."""
        mode = Mode(mode)
        exposed, entries = self._prepare(nf)
        found: Dict[tuple, Tuple[RuleLabel, NormalForm]] = {}
        for generator in (self._broad(exposed, entries, mode),
                          self._local(exposed, entries),
                          self._coll(exposed, entries, mode)):
            for label, successor in generator:
                state = canonical_form(successor, self.registry)
                found.setdefault((label, state), (label, state))
        return sorted(found.values(), key=lambda item: (label_key(item[0]),
                                                       state_key(item[1])))


def state_key(nf: NormalForm) -> tuple:
    """Deterministic order on canonical states."""
    return (tuple((name_key(loc), process_key(proc)) for loc, proc in nf.located),
            tuple(sorted((name_key(a), name_key(b)) for a, b in nf.connectivity)),
            tuple(item.name for item in nf.restrictions))


def initial_state(program: Program, registry: Optional[BuiltinRegistry] = None) -> NormalForm:
    """Canonical normal form of the program's network."""
    return canonical_form(program.network, registry or build_registry(program))


def successors(nf: NormalForm, program: Program, mode: Union[Mode, str] = Mode.DEFAULT,
               unfold_budget: int = 32) -> List[Tuple[RuleLabel, NormalForm]]:
    """Successors of a state under the program's agents and bounds."""
    return ReductionService(program, unfold_budget).successors(nf, Mode(mode))


def run(program: Program, seed: int, max_steps: int,
        mode: Union[Mode, str] = Mode.DEFAULT, unfold_budget: int = 32) -> Trace:
    """Seeded random execution until stuck or `max_steps` steps."""
    service = ReductionService(program, unfold_budget)
    rng = random.Random(seed)
    state = initial_state(program, service.registry)
    initial = state
    steps = []
    stuck = False
    for _ in range(max_steps):
        options = service.successors(state, Mode(mode))
        if not options:
            stuck = True
            break
        label, state = options[rng.randrange(len(options))]
        steps.append((label, state))
    log_debug(logger, "Run finished", {"steps": len(steps), "stuck": stuck, "seed": seed})
    return Trace(initial, tuple(steps), seed, stuck)


def state_graph(program: Program, limits: Optional[Limits] = None,
                mode: Union[Mode, str] = Mode.EXHAUSTIVE) -> StateGraph:
    """Breadth-first exploration of canonical states within the limits."""
    limits = limits or Limits()
    mode = Mode(mode)
    service = ReductionService(program, limits.unfold_budget)
    start = initial_state(program, service.registry)
    index: Dict[NormalForm, int] = {start: 0}
    states: List[NormalForm] = [start]
    edges: List[Tuple[int, RuleLabel, int]] = []
    queue = deque([0])
    truncated = False
    while queue:
        current = queue.popleft()
        for label, successor in service.successors(states[current], mode):
            target = index.get(successor)
            if target is None:
                if len(states) >= limits.max_states:
                    truncated = True
                    continue
                target = len(states)
                index[successor] = target
                states.append(successor)
                queue.append(target)
            edges.append((current, label, target))
    if service.budget_exhausted:
        truncated = True
    if truncated:
        log_warning(logger, "State graph truncated", {"states": len(states),
                                                      "max_states": limits.max_states,
                                                      "unfold_budget_hit":
                                                          service.budget_exhausted})
    log_debug(logger, "State graph built", {"states": len(states), "edges": len(edges),
                                            "mode": mode.value})
    return StateGraph(tuple(states), tuple(edges), 0, truncated, limits, mode, program)


def as_digraph(graph: StateGraph) -> nx.DiGraph:
    """networkx view of a state graph; parallel edges keep the first label."""
    digraph = nx.DiGraph()
    for index, state in enumerate(graph.states):
        digraph.add_node(index, state=state)
    for source, label, target in graph.edges:
        if not digraph.has_edge(source, target):
            digraph.add_edge(source, target, label=label)
    return digraph


def reachability(graph: StateGraph) -> Dict[int, FrozenSet[int]]:
    """Reflexive-transitive successors of every state, one pass over the condensation."""
    digraph = as_digraph(graph)
    condensed = nx.condensation(digraph)
    members = nx.get_node_attributes(condensed, "members")
    reach: Dict[int, FrozenSet[int]] = {}
    for component in reversed(list(nx.topological_sort(condensed))):
        collected = set(members[component])
        for successor in condensed.successors(component):
            collected |= reach[successor]
        reach[component] = frozenset(collected)
    mapping = condensed.graph["mapping"]
    return {state: reach[mapping[state]] for state in digraph.nodes}

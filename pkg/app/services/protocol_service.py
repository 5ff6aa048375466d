"""
Generators for the hierarchical aggregation protocol, its flattening and the
electoral system, plus outcome analysis over their state graphs.
"""
# pylint: disable=R0913,R0914
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Tuple

import networkx as nx
from pydantic import ValidationError

from app.models.ast_model import (
    UNBOUNDED, AgentCall, AgentDef, BInput, Bound, CInput, ConstructorApp, Located, Match,
    Message, MultisetLit, Near, Network, New, NewN, NIL, Output, Par, ParN, Pattern,
    Process, Program, SelectorApp, SelectorDecl, SetVar, Sum, Var, name_key,
)
from app.models.normal_form_model import NormalForm
from app.models.protocol_model import ElectoralSpec, HierarchySpec
from app.models.reduction_model import BroadLabel, StateGraph
from app.models.type_model import AMBIENT, LOC, ChanB, ChanC, Type
from app.services.eval_service import check_idempotent, default_registry
from app.services.reduction_service import as_digraph
from app.utils.errors import SpecError
from app.utils.logger import get_logger, log_debug

logger = get_logger(__name__)

UP_TYPE = ChanC(AMBIENT)
DOWN_TYPE = ChanB(AMBIENT)
ANNOUNCE_CHANNEL = "win"
VOTE_CHANNEL = "a"


def _var_pattern(binder: str) -> Pattern:
    return Pattern((binder,), Var(binder))


def _vars(*names: str) -> Tuple[Message, ...]:
    return tuple(Var(name) for name in names)


def _compose(parts: Sequence[Network]) -> Network:
    net = parts[0]
    for part in parts[1:]:
        net = ParN(net, part)
    return net


def validate_selection(selection: str) -> None:
    """Raise SpecError unless `selection` is a parameterless idempotent builtin."""
    if selection not in default_registry().selectors:
        raise SpecError(f"selection `{selection}` is not a parameterless builtin selector")
    verdict = check_idempotent(selection, ["1", "2", "3"], max_size=3, trials=0, max_family=3)
    if not verdict.passed:
        raise SpecError(f"selection `{selection}` is not idempotent")


def hierarchy_spec(**fields) -> HierarchySpec:
    """Build a HierarchySpec, reporting validation failures as SpecError."""
    try:
        return HierarchySpec(**fields)
    except ValidationError as exc:
        raise SpecError(f"invalid hierarchy: {exc.errors()[0]['msg']}") from exc


def electoral_spec(**fields) -> ElectoralSpec:
    """Build an ElectoralSpec, reporting validation failures as SpecError."""
    try:
        return ElectoralSpec(**fields)
    except ValidationError as exc:
        raise SpecError(f"invalid electoral system: {exc.errors()[0]['msg']}") from exc


def _leaf_agent(spec: HierarchySpec) -> AgentDef:
    params = ["up", "down"]
    if spec.leaf_body == "echo":
        params.append("echo")
    if spec.contributions == "indexed":
        params.append("i")
    params = tuple(params)
    recurse = AgentCall("Leaf", _vars(*params)) if spec.rounds == "repeat" else NIL
    if spec.leaf_body == "echo":
        echo = Output("echo", Var("z"), NIL)
        after = Par(echo, recurse) if spec.rounds == "repeat" else echo
    else:
        after = recurse
    receive = BInput("down", _var_pattern("z"), after)
    if spec.contributions == "indexed":
        body: Process = Output("up", Var("i"), receive)
    else:
        body = New("w", UNBOUNDED, Output("up", Var("w"), receive), AMBIENT)
    return AgentDef("Leaf", params, body)


def _collect(then: Process) -> Process:
    """up?*<x>(x) as S. [size{S} = n] then"""
    guard = Match(SelectorApp("size", SetVar("S")), Var("n"), then)
    return CInput("up", _var_pattern("x"), "S", guard)


def _central_agent(spec: HierarchySpec) -> AgentDef:
    params = ("up", "down", "pup", "pdown", "n")
    end = AgentCall("Central", _vars(*params)) if spec.rounds == "repeat" else NIL
    relay = BInput("pdown", _var_pattern("z"), Output("down", Var("z"), end))
    forward = Output("pup", SelectorApp(spec.selection, SetVar("S")), relay)
    return AgentDef("Central", params, _collect(forward))


def _root_agents(spec: HierarchySpec) -> Tuple[AgentDef, AgentDef]:
    root_params = ("up", "fwd", "n")
    entity_params = ("fwd", "down")
    repeat = spec.rounds == "repeat"
    root_end = AgentCall("Root", _vars(*root_params)) if repeat else NIL
    entity_end = AgentCall("Entity", _vars(*entity_params)) if repeat else NIL
    decide = Output("fwd", SelectorApp(spec.selection, SetVar("S")), root_end)
    root = AgentDef("Root", root_params, _collect(decide))
    entity = AgentDef("Entity", entity_params,
                      BInput("fwd", _var_pattern("y"), Output("down", Var("y"), entity_end)))
    return root, entity


@dataclass
class _TreeBuilder:
    """Accumulates located agents, connectivity and restrictions of a tree."""

    spec: HierarchySpec
    root: str
    parts: List[Network] = field(default_factory=list)
    channels: List[Tuple[str, Type]] = field(default_factory=list)
    hidden_locations: List[str] = field(default_factory=list)
    leaves: int = 0

    def link(self, child: str, parent: str) -> None:
        """Connect a child and its parent in both directions."""
        self.parts.append(Near(child, parent))
        self.parts.append(Near(parent, child))

    def leaf(self, up: str, down: str, parent: str) -> None:
        """Place the next leaf under `parent`."""
        self.leaves += 1
        location = f"l{self.leaves}"
        args = [up, down]
        if self.spec.leaf_body == "echo":
            args.append("echo")
        if self.spec.contributions == "indexed":
            args.append(str(self.leaves))
        self.link(location, parent)
        self.parts.append(Located(location, AgentCall("Leaf", _vars(*args))))

    def subtree(self, level: int, path: Tuple[int, ...], location: str,
                up: str, down: str) -> None:
        """Children of the node at `location`, which collects on `up` and broadcasts on `down`."""
        fanouts = self.spec.fanouts()
        for index in range(1, fanouts[level] + 1):
            if level == self.spec.depth:
                self.leaf(up, down, location)
                continue
            child_path = path + (index,)
            suffix = "_".join(str(step) for step in child_path)
            child, child_up, child_down = f"c{suffix}", f"up_{suffix}", f"down_{suffix}"
            self.hidden_locations.append(child)
            self.channels += [(child_up, UP_TYPE), (child_down, DOWN_TYPE)]
            self.link(child, location)
            call = AgentCall("Central", _vars(child_up, child_down, up, down,
                                              str(fanouts[level + 1])))
            self.parts.append(Located(child, call))
            self.subtree(level + 1, child_path, child, child_up, child_down)


def gen_hierarchical(spec: HierarchySpec, root: str = "l0") -> Program:
    """Aggregation tree: leaves contribute upward, centrals forward the selection of
    what they collected, the root decides and the decision is broadcast back down.

    Raises:
        SpecError: If the selection is not an idempotent builtin or the root name
            collides with a leaf.
    """
    validate_selection(spec.selection)
    if root in {f"l{index}" for index in range(1, spec.leaf_count() + 1)}:
        raise SpecError(f"root location `{root}` collides with a leaf name")
    builder = _TreeBuilder(spec, root)
    builder.channels += [("up_r", UP_TYPE), ("down_r", DOWN_TYPE), ("fwd", DOWN_TYPE)]
    builder.parts.append(Located(root, AgentCall("Root", _vars("up_r", "fwd",
                                                               str(spec.fanouts()[0])))))
    builder.parts.append(Located(root, AgentCall("Entity", _vars("fwd", "down_r"))))
    builder.subtree(0, (), root, "up_r", "down_r")

    net = _compose(builder.parts)
    for location in reversed(builder.hidden_locations):
        net = NewN(location, UNBOUNDED, net, LOC)
    bound = Bound(spec.effective_bound())
    for channel, ty in reversed(builder.channels):
        net = NewN(channel, bound, net, ty)

    agents = [_leaf_agent(spec)]
    if spec.depth > 0:
        agents.append(_central_agent(spec))
    agents.extend(_root_agents(spec))
    selectors = tuple(SelectorDecl(name, name) for name in sorted({spec.selection, "size"}))
    types = (("echo", DOWN_TYPE),) if spec.leaf_body == "echo" else ()
    log_debug(logger, "Hierarchy generated", {"depth": spec.depth, "leaves": builder.leaves,
                                              "centrals": len(builder.hidden_locations)})
    return Program(network=net, selectors=selectors, agents=tuple(agents), types=types)


def flat_spec(spec: HierarchySpec) -> HierarchySpec:
    """The one-level spec with every leaf attached to the hub."""
    if spec.depth == 0:
        return spec
    leaves = spec.leaf_count()
    return spec.model_copy(update={"depth": 0, "branching": [leaves], "bound": leaves})


def flatten(spec: HierarchySpec, hub: str = "l0") -> Program:
    """Same leaves, a single central at `hub` connected to all of them."""
    return gen_hierarchical(flat_spec(spec), root=hub)


PARTICIPANT_AGENT = "Participant"


def _collections(rounds: int, then: Process) -> Process:
    """a?*<x>(x) as S1 ... a?*<x>(x) as Sk. then"""
    for step in range(rounds, 0, -1):
        then = CInput(VOTE_CHANNEL, _var_pattern("x"), f"S{step}", then)
    return then


def _choices(rounds: int) -> List[Message]:
    return [SelectorApp("elect", SetVar(f"S{step}")) for step in range(1, rounds + 1)]


def _participant(me: Message, spec: ElectoralSpec) -> Process:
    tail: Process = AgentCall(PARTICIPANT_AGENT, (me,)) if spec.repeat else NIL
    if spec.shape == "sequential":
        winner = ConstructorApp("chosen",
                                SelectorApp("elect", MultisetLit.of(_choices(spec.rounds))))
        return Output(VOTE_CHANNEL, me,
                      _collections(spec.rounds, Output(VOTE_CHANNEL, winner, tail)))
    # the collector does not vote; its own index stands in for the vote it skips
    winner = ConstructorApp("chosen",
                            SelectorApp("elect", MultisetLit.of(_choices(spec.rounds) + [me])))
    sender = Output(VOTE_CHANNEL, me, BInput(ANNOUNCE_CHANNEL, _var_pattern("y"), tail))
    collector = _collections(spec.rounds, Output(ANNOUNCE_CHANNEL, winner, tail))
    return Sum(sender, collector)


def gen_electoral(spec: ElectoralSpec) -> Program:
    """Participants l1..ln, fully connected, over channel `a` bounded by n.

    The sequential shape is the textbook participant: vote with its index,
    collect k times and announce chosen(elect{...}) on `a`. Every participant
    starts with an output, so that network cannot move. The default choice
    shape lets each participant either vote and wait for the announcement, or
    collect k times and announce on the broadcast channel `win`.
    With `repeat` every participant restarts after the announcement.
    """
    count = spec.participants
    parts: List[Network] = []
    for source in range(1, count + 1):
        for target in range(1, count + 1):
            if source != target:
                parts.append(Near(f"l{source}", f"l{target}"))
    agents: Tuple[AgentDef, ...] = ()
    if spec.repeat:
        agents = (AgentDef(PARTICIPANT_AGENT, ("me",), _participant(Var("me"), spec)),)
    for index in range(1, count + 1):
        me = Var(str(index))
        body = AgentCall(PARTICIPANT_AGENT, (me,)) if spec.repeat else _participant(me, spec)
        parts.append(Located(f"l{index}", body))
    channels: Tuple[Tuple[str, Bound], ...] = ((VOTE_CHANNEL, Bound(count)),)
    types: Tuple[Tuple[str, Type], ...] = ((VOTE_CHANNEL, ChanC(AMBIENT)),)
    if spec.shape == "choice":
        channels += ((ANNOUNCE_CHANNEL, Bound(count)),)
        types += ((ANNOUNCE_CHANNEL, ChanB(AMBIENT)),)
    return Program(
        network=_compose(parts),
        constructors=("chosen",),
        selectors=(SelectorDecl("elect", "elect"),),
        agents=agents,
        channels=channels,
        types=types,
    )


def election_outcomes(graph: StateGraph,
                      channel: str = ANNOUNCE_CHANNEL) -> FrozenSet[Tuple[Message, ...]]:
    """Announcements made along every maximal computation of an acyclic graph.

    Raises:
        SpecError: If the graph has a cycle or was truncated.
    """
    if graph.truncated:
        raise SpecError("outcome analysis needs a complete state graph")
    digraph = as_digraph(graph)
    if not nx.is_directed_acyclic_graph(digraph):
        raise SpecError("outcome analysis needs an acyclic state graph")
    outcomes: Dict[int, FrozenSet[Tuple[Message, ...]]] = {}
    for state in reversed(list(nx.topological_sort(digraph))):
        moves = graph.successors(state)
        if not moves:
            outcomes[state] = frozenset({()})
            continue
        collected = set()
        for label, target in moves:
            announced = (label.message,) if isinstance(label, BroadLabel) \
                and label.channel == channel else ()
            collected |= {announced + rest for rest in outcomes[target]}
        outcomes[state] = frozenset(collected)
    return outcomes[graph.initial]


def is_electoral(outcomes: FrozenSet[Tuple[Message, ...]]) -> bool:
    """Every computation announces exactly once."""
    return bool(outcomes) and all(len(outcome) == 1 for outcome in outcomes)


def pending_outputs(nf: NormalForm, channel: str) -> Dict[str, Tuple[Message, ...]]:
    """Messages offered on `channel` by top-level outputs, per location."""
    offered: Dict[str, List[Message]] = {}
    for location, proc in nf.located:
        if isinstance(proc, Output) and proc.channel == channel:
            offered.setdefault(location, []).append(proc.msg)
    return {location: tuple(messages)
            for location, messages in sorted(offered.items(), key=lambda item: name_key(item[0]))}


def final_decisions(graph: StateGraph, channel: str = "echo") -> FrozenSet[Message]:
    """Every message echoed on `channel` in the graph's maximal states."""
    decided = set()
    for index in graph.maximal_states():
        for messages in pending_outputs(graph.states[index], channel).values():
            decided.update(messages)
    return frozenset(decided)


def protocol_summary(program: Program) -> Dict[str, int]:
    """Counts of located entries, connectivity atoms and restrictions."""
    counts = {"located": 0, "near": 0, "restrictions": 0}
    stack: List[Network] = [program.network]
    while stack:
        net = stack.pop()
        if isinstance(net, Located):
            counts["located"] += 1
        elif isinstance(net, Near):
            counts["near"] += 1
        elif isinstance(net, ParN):
            stack += [net.right, net.left]
        else:
            counts["restrictions"] += 1
            stack.append(net.body)
    return counts


def restricted_names(program: Program) -> Tuple[str, ...]:
    """Names restricted at the top of a generated network, outermost first."""
    names = []
    net = program.network
    while isinstance(net, NewN):
        names.append(net.name)
        net = net.body
    return tuple(names)

"""
Barb extraction and weak barbed bisimilarity over bounded state graphs.
"""
# pylint: disable=R0913,R0914
from __future__ import annotations

from typing import Dict, FrozenSet, Hashable, Iterable, Optional, Set, Tuple, Union

import networkx as nx

from app.config.settings import settings
from app.models.ast_model import (
    AgentCall, BInput, CInput, Match, Mismatch, New, Output, Par, Process, Program, Sum,
)
from app.models.bisim_model import (
    Barb, BarbMode, Bisimilar, BisimVerdict, Distinguished, Inconclusive,
)
from app.models.normal_form_model import NormalForm
from app.models.reduction_model import Limits, Mode, StateGraph
from app.services.eval_service import BuiltinRegistry, build_registry, default_registry
from app.services.reduction_service import (
    ReductionService, as_digraph, guard_holds, reachability, state_graph,
)
from app.utils.errors import ProgramError
from app.utils.logger import get_logger, log_debug, log_info

logger = get_logger(__name__)

BarbSet = FrozenSet[Barb]
HIDDEN_LOCATION = "*"


class _BarbCollector:
    """Walks located processes through Par, Sum, guards, restrictions and agent calls."""

    def __init__(self, program: Optional[Program], unfold_budget: int):
        self.program = program
        self.unfold_budget = unfold_budget
        self.registry: BuiltinRegistry = build_registry(program) if program else \
            default_registry()
        self.service = ReductionService(program, unfold_budget, self.registry) \
            if program else None
        self.found: Set[Barb] = set()

    def process(self, proc: Process, location: str, hidden: FrozenSet[str],
                budget: int) -> None:
        """Record the barbs of `proc` running at `location`."""
        if isinstance(proc, Output):
            if proc.channel not in hidden:
                self.found.add(Barb(proc.channel, "B", location))
                self.found.add(Barb(proc.channel, "C", location))
        elif isinstance(proc, BInput):
            if proc.channel not in hidden:
                self.found.add(Barb(proc.channel, "B", location))
        elif isinstance(proc, CInput):
            if proc.channel not in hidden:
                self.found.add(Barb(proc.channel, "C", location))
        elif isinstance(proc, (Par, Sum)):
            self.process(proc.left, location, hidden, budget)
            self.process(proc.right, location, hidden, budget)
        elif isinstance(proc, (Match, Mismatch)):
            if guard_holds(proc, self.registry):
                self.process(proc.body, location, hidden, budget)
        elif isinstance(proc, New):
            self.process(proc.body, location, hidden | {proc.name}, budget)
        elif isinstance(proc, AgentCall) and self.service is not None and budget > 0:
            self.process(self.service.unfold(proc), location, hidden, budget - 1)


def barbs(nf: NormalForm, program: Optional[Program] = None,
          unfold_budget: Optional[int] = None) -> BarbSet:
    """Barbs (a, d)@l exhibited by a normal form.

    Outputs are observable in both modes. Channels restricted at top level or
    inside the process are invisible. A barb at a restricted location is
    reported at `HIDDEN_LOCATION`, since the name of such a location is only
    fixed up to renaming. Agent calls are unfolded through `program` within
    the unfolding budget.
    """
    budget = settings.unfold_budget if unfold_budget is None else unfold_budget
    collector = _BarbCollector(program, budget)
    for location, proc in nf.located:
        shown = HIDDEN_LOCATION if location in nf.restricted else location
        collector.process(proc, shown, nf.restricted, budget)
    return frozenset(collector.found)


def graph_barbs(graph: StateGraph) -> Dict[int, BarbSet]:
    """Immediate barbs of every state in a graph."""
    budget = graph.limits.unfold_budget
    return {index: barbs(state, graph.program, budget)
            for index, state in enumerate(graph.states)}


def weak_barbs(graph: StateGraph,
               reach: Optional[Dict[int, FrozenSet[int]]] = None) -> Dict[int, BarbSet]:
    """Barbs reachable in zero or more steps from every state."""
    reach = reach if reach is not None else reachability(graph)
    immediate = graph_barbs(graph)
    return {index: frozenset().union(*(immediate[target] for target in reach[index]))
            for index in range(len(graph.states))}


def _keys(graph: StateGraph, reach: Dict[int, FrozenSet[int]],
          barb_mode: BarbMode) -> Dict[int, BarbSet]:
    if barb_mode is BarbMode.WEAK:
        return weak_barbs(graph, reach)
    return graph_barbs(graph)


def _renumber(signatures: Dict[Hashable, Hashable]) -> Dict[Hashable, int]:
    table: Dict[Hashable, int] = {}
    return {node: table.setdefault(signature, len(table))
            for node, signature in signatures.items()}


def _refine(keys: Dict[Hashable, BarbSet],
            reach: Dict[Hashable, Iterable[Hashable]]) -> Dict[Hashable, int]:
    """Coarsest partition of the saturated graph that respects the barb keys.

    A move is matched by zero or more moves, so the largest weak bisimulation
    is the strong bisimilarity of the reflexive-transitive closure.
    """
    classes = _renumber(keys)
    rounds = 0
    while True:
        rounds += 1
        refined = _renumber({node: (classes[node],
                                    frozenset(classes[target] for target in reach[node]))
                             for node in classes})
        if len(set(refined.values())) == len(set(classes.values())):
            log_debug(logger, "Partition stable", {"rounds": rounds,
                                                   "classes": len(set(refined.values()))})
            return refined
        classes = refined


def _trace_to(graph: StateGraph, target: int) -> Tuple[tuple, tuple]:
    digraph = as_digraph(graph)
    path = nx.shortest_path(digraph, graph.initial, target)
    labels = tuple(digraph.edges[source, dest]["label"] for source, dest in zip(path, path[1:]))
    return labels, tuple(graph.states[index] for index in path)


def _nearest(graph: StateGraph, candidates: Iterable[int]) -> int:
    distances = nx.single_source_shortest_path_length(as_digraph(graph), graph.initial)
    return min(candidates, key=lambda index: (distances[index], index))


def _distinguish(graphs: Tuple[StateGraph, StateGraph], keys, reach,
                 classes: Dict[Tuple[int, int], int]) -> Distinguished:
    first, second = (1, graphs[0].initial), (2, graphs[1].initial)
    if keys[first] != keys[second]:
        unmatched = keys[first] ^ keys[second]
        side = 1 if keys[first] - keys[second] else 2
        graph = graphs[side - 1]
        return Distinguished(side, (), (graph.states[graph.initial],),
                             "initial barbs differ", frozenset(unmatched))
    reached = {
        side: {classes[target] for target in reach[(side, initial)]}
        for side, initial in (first, second)
    }
    for side, other in ((1, 2), (2, 1)):
        missing = reached[side] - reached[other]
        if not missing:
            continue
        graph = graphs[side - 1]
        candidates = [index for _, index in reach[(side, graph.initial)]
                      if classes[(side, index)] in missing]
        other_initial = graphs[other - 1].initial
        seen = {keys[target] for target in reach[(other, other_initial)]}
        unseen = [index for index in candidates if keys[(side, index)] not in seen]
        candidates = unseen or candidates
        target = _nearest(graph, candidates)
        labels, states = _trace_to(graph, target)
        return Distinguished(side, labels, states,
                             "reachable state without a weakly matching counterpart",
                             keys[(side, target)])
    raise RuntimeError("initial states split without a distinguishing class")


def check_signatures(first: Program, second: Program) -> None:
    """Raise ProgramError when the two programs disagree on selectors or constructors."""
    if first.signature() != second.signature():
        raise ProgramError("programs declare different selector/constructor signatures")


def compare_graphs(left: StateGraph, right: StateGraph,
                   barb_mode: Union[BarbMode, str] = BarbMode.STRICT) -> BisimVerdict:
    """Decide weak barbed bisimilarity of the initial states of two explored graphs."""
    barb_mode = BarbMode(barb_mode)
    reach: Dict[Tuple[int, int], FrozenSet[Tuple[int, int]]] = {}
    keys: Dict[Tuple[int, int], BarbSet] = {}
    for side, graph in ((1, left), (2, right)):
        local = reachability(graph)
        for index, key in _keys(graph, local, barb_mode).items():
            keys[(side, index)] = key
            reach[(side, index)] = frozenset((side, target) for target in local[index])
    classes = _refine(keys, reach)
    if classes[(1, left.initial)] != classes[(2, right.initial)]:
        return _distinguish((left, right), keys, reach, classes)
    if left.truncated or right.truncated:
        return Inconclusive("state graph truncated by the exploration limits")
    witness = frozenset((i, j) for i in range(len(left.states))
                        for j in range(len(right.states))
                        if classes[(1, i)] == classes[(2, j)])
    return Bisimilar(witness, len(left.states), len(right.states))


def weak_barbed_bisim(first: Program, second: Program, limits: Optional[Limits] = None,
                      barb_mode: Union[BarbMode, str, None] = None) -> BisimVerdict:
    """Explore both programs exhaustively and compare their initial states.

    Raises:
        ProgramError: If the selector/constructor signatures differ.
    """
    check_signatures(first, second)
    limits = limits or Limits()
    barb_mode = BarbMode(barb_mode or settings.barb_mode)
    left = state_graph(first, limits, Mode.EXHAUSTIVE)
    right = state_graph(second, limits, Mode.EXHAUSTIVE)
    if len(left.states) * len(right.states) > limits.max_states ** 2:
        return Inconclusive(f"product of {len(left.states)} x {len(right.states)} states "
                            f"exceeds the limit of {limits.max_states ** 2} pairs")
    verdict = compare_graphs(left, right, barb_mode)
    log_info(logger, "Bisimulation decided", {"verdict": verdict.verdict,
                                              "barb_mode": barb_mode.value,
                                              "states": [len(left.states), len(right.states)]})
    return verdict


def check_witness(left: StateGraph, right: StateGraph, witness: Iterable[Tuple[int, int]],
                  barb_mode: Union[BarbMode, str] = BarbMode.STRICT) -> bool:
    """Whether `witness` (read up to symmetry) is a weak barbed bisimulation.

    It must contain the initial pair, relate states with equal barbs under
    `barb_mode`, and answer every move of either side by zero or more moves
    of the other side into a related pair.
    """
    barb_mode = BarbMode(barb_mode)
    pairs = set(witness)
    if (left.initial, right.initial) not in pairs:
        return False
    reach_left, reach_right = reachability(left), reachability(right)
    keys_left = _keys(left, reach_left, barb_mode)
    keys_right = _keys(right, reach_right, barb_mode)
    moves_left, moves_right = left.adjacency(), right.adjacency()
    for i, j in pairs:
        if keys_left[i] != keys_right[j]:
            return False
        for target in moves_left[i]:
            if not any((target, answer) in pairs for answer in reach_right[j]):
                return False
        for target in moves_right[j]:
            if not any((answer, target) in pairs for answer in reach_left[i]):
                return False
    return True

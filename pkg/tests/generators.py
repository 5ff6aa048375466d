"""
Seeded random generators of networks and programs used by the property tests.

Every generator takes a `random.Random`, so a failing case is reproduced from
its seed alone.
"""
import random
from typing import List, Optional, Sequence

from app.models.ast_model import (
    UNBOUNDED, AgentCall, AgentDef, BInput, Bound, CInput, ConstructorApp, Located, Match,
    Message, Mismatch, MultisetLit, Near, Network, New, NewN, NIL, Output, Par, ParN,
    Pattern, Process, Program, SelectorApp, SelectorDecl, SetVar, Sum, TupleMsg, Var,
)
from app.models.type_model import AMBIENT, LOC, ChanB, ChanC, MultisetT, Product

LOCATIONS = ("l1", "l2", "l3")
CHANNELS = ("a", "b", "c")
DATA = ("m1", "m2")

_BOUNDS = (UNBOUNDED, Bound(1), Bound(2), Bound(None, (("l1", 1),)))
_TYPES = (None, ChanB(AMBIENT), ChanC(AMBIENT), MultisetT(AMBIENT, 2),
          Product((AMBIENT, LOC)))


class NetworkGenerator:
    """Well-formed networks over a small fixed alphabet.

    Args:
        rng: Source of randomness.
        max_depth: Nesting limit of processes and networks.
        agents: Whether agent calls `A(chan, data)` may appear.
    """

    def __init__(self, rng: random.Random, max_depth: int = 5, agents: bool = False):
        self.rng = rng
        self.max_depth = max_depth
        self.agents = agents

    def message(self, data: Sequence[str], setvars: Sequence[str], depth: int) -> Message:
        """A message over `data`; selectors over set variables when some are in scope."""
        roll = self.rng.random()
        if depth <= 0 or roll < 0.5:
            return Var(self.rng.choice(list(data)))
        if roll < 0.65:
            return TupleMsg((self.message(data, setvars, depth - 1),
                             self.message(data, setvars, depth - 1)))
        if roll < 0.8:
            return ConstructorApp("f", self.message(data, setvars, depth - 1))
        if setvars and roll < 0.9:
            return SelectorApp("min", SetVar(self.rng.choice(list(setvars))))
        items = [Var(self.rng.choice(list(data))) for _ in range(self.rng.randint(1, 3))]
        return SelectorApp("min", MultisetLit.of(items))

    def pattern(self, binder: str, data: Sequence[str]) -> Pattern:
        """<binder>(binder), <binder>((binder, m)) or <binder>(f(binder))."""
        roll = self.rng.random()
        if roll < 0.5:
            body: Message = Var(binder)
        elif roll < 0.8:
            body = TupleMsg((Var(binder), Var(self.rng.choice(list(data)))))
        else:
            body = ConstructorApp("f", Var(binder))
        return Pattern((binder,), body)

    def process(self, depth: int, data: List[str], channels: List[str],
                setvars: List[str]) -> Process:
        """A process whose free names come from the alphabet and enclosing binders."""
        if depth <= 0:
            if self.rng.random() < 0.5:
                return NIL
            return Output(self.rng.choice(channels), self.message(data, setvars, 1), NIL)
        level = self.max_depth - depth
        kind = self.rng.choice(["nil", "out", "out", "bin", "cin", "new", "match", "par",
                                "sum"] + (["call"] if self.agents else []))
        channel = self.rng.choice(channels)
        if kind == "nil":
            return NIL
        if kind == "out":
            return Output(channel, self.message(data, setvars, 2),
                          self.process(depth - 1, data, channels, setvars))
        if kind == "bin":
            binder = f"x{level}"
            return BInput(channel, self.pattern(binder, data),
                          self.process(depth - 1, data + [binder], channels, setvars))
        if kind == "cin":
            binder, setvar = f"y{level}", f"S{level}"
            return CInput(channel, self.pattern(binder, data), setvar,
                          self.process(depth - 1, data, channels, setvars + [setvar]))
        if kind == "new":
            name = f"k{level}"
            return New(name, self.rng.choice(_BOUNDS),
                       self.process(depth - 1, data, channels + [name], setvars),
                       self.rng.choice(_TYPES))
        if kind == "match":
            guard = Match if self.rng.random() < 0.5 else Mismatch
            return guard(self.message(data, setvars, 1), self.message(data, setvars, 1),
                         self.process(depth - 1, data, channels, setvars))
        if kind == "call":
            return AgentCall("A", (Var(channel), Var(self.rng.choice(data))))
        operator = Par if kind == "par" else Sum
        return operator(self.process(depth - 1, data, channels, setvars),
                        self.process(depth - 1, data, channels, setvars))

    def network(self, depth: Optional[int] = None, locations: Sequence[str] = LOCATIONS) -> Network:
        """A network: located processes, connectivity atoms and restrictions."""
        depth = self.max_depth if depth is None else depth
        locations = list(locations)
        roll = self.rng.random()
        if depth <= 1 or roll < 0.3:
            return self.located(locations, depth)
        if roll < 0.45:
            source, target = self.rng.sample(locations, 2)
            return Near(source, target)
        if roll < 0.8:
            return ParN(self.network(depth - 1, locations), self.network(depth - 1, locations))
        level = self.max_depth - depth
        if self.rng.random() < 0.5:
            name = f"h{level}"
            body = ParN(Located(name, self.process(min(depth, 2), list(DATA),
                                                   list(CHANNELS), [])),
                        self.network(depth - 1, locations + [name]))
            return NewN(name, UNBOUNDED, body, LOC)
        name = f"r{level}"
        body = self.network(depth - 1, locations)
        return NewN(name, self.rng.choice(_BOUNDS), body, self.rng.choice(_TYPES))

    def located(self, locations: Sequence[str], depth: int) -> Network:
        """One located process of bounded depth."""
        return Located(self.rng.choice(list(locations)),
                       self.process(min(depth, 3), list(DATA), list(CHANNELS), []))


def random_network(seed: int, max_depth: int = 5) -> Network:
    """A well-formed network drawn from `seed`."""
    return NetworkGenerator(random.Random(seed), max_depth).network()


AGENTS = (
    AgentDef("A", ("p", "q"), Output("p", Var("q"), NIL)),
    AgentDef("R", ("p",), BInput("p", Pattern(("x",), Var("x")),
                                 AgentCall("R", (Var("p"),)))),
)


def random_program(seed: int, max_depth: int = 4) -> Program:
    """A loadable program with declarations, agents and a random network."""
    rng = random.Random(seed)
    generator = NetworkGenerator(rng, max_depth, agents=True)
    channels = tuple((name, rng.choice(_BOUNDS[:3])) for name in CHANNELS
                     if rng.random() < 0.5)
    types = (("a", ChanB(AMBIENT)),) if rng.random() < 0.5 else ()
    return Program(
        network=generator.network(),
        constructors=("f",),
        selectors=(SelectorDecl("min", "min"), SelectorDecl("pick", "find", ("m1", "m2"))),
        channels=channels,
        agents=AGENTS,
        types=types,
    )


class TypedGenerator:
    """Well-typed programs: `b : B<Name>`, `c : C<Name>`, data of type Name."""

    def __init__(self, rng: random.Random, max_depth: int = 3):
        self.rng = rng
        self.max_depth = max_depth

    def process(self, depth: int, data: List[str]) -> Process:
        """A process that type checks under the program's declarations."""
        if depth <= 0:
            if self.rng.random() < 0.5:
                return NIL
            return Output(self.rng.choice(["b", "c"]), Var(self.rng.choice(data)), NIL)
        level = self.max_depth - depth
        kind = self.rng.choice(["out", "out", "bin", "cin", "new", "match", "par", "sum"])
        if kind == "out":
            return Output(self.rng.choice(["b", "c"]), Var(self.rng.choice(data)),
                          self.process(depth - 1, data))
        if kind == "bin":
            binder = f"x{level}"
            return BInput("b", Pattern((binder,), Var(binder)),
                          self.process(depth - 1, data + [binder]))
        if kind == "cin":
            binder, setvar = f"y{level}", f"S{level}"
            return CInput("c", Pattern((binder,), Var(binder)), setvar,
                          Output("b", SelectorApp("min", SetVar(setvar)),
                                 self.process(depth - 1, data)))
        if kind == "new":
            name, binder = f"k{level}", f"z{level}"
            exchange = Par(Output(name, Var(self.rng.choice(data)), NIL),
                           BInput(name, Pattern((binder,), Var(binder)),
                                  self.process(depth - 1, data + [binder])))
            return New(name, self.rng.choice([UNBOUNDED, Bound(1)]), exchange, ChanB(AMBIENT))
        if kind == "match":
            guard = Match if self.rng.random() < 0.5 else Mismatch
            return guard(Var(self.rng.choice(data)), Var(self.rng.choice(data)),
                         self.process(depth - 1, data))
        operator = Par if kind == "par" else Sum
        return operator(self.process(depth - 1, data), self.process(depth - 1, data))

    def network(self) -> Network:
        """Every location hosts one process; connectivity is a random set of atoms."""
        parts: List[Network] = [Located(location, self.process(self.max_depth, list(DATA)))
                                for location in LOCATIONS]
        for source in LOCATIONS:
            for target in LOCATIONS:
                if source != target and self.rng.random() < 0.5:
                    parts.append(Near(source, target))
        net = parts[0]
        for part in parts[1:]:
            net = ParN(net, part)
        return net


def typed_program(seed: int, max_depth: int = 3) -> Program:
    """A well-typed program drawn from `seed`."""
    rng = random.Random(seed)
    return Program(
        network=TypedGenerator(rng, max_depth).network(),
        selectors=(SelectorDecl("min", "min"),),
        channels=(("b", Bound(rng.randint(1, 2))), ("c", Bound(rng.randint(1, 2)))),
        types=(("b", ChanB(AMBIENT)), ("c", ChanC(AMBIENT))),
    )


def ill_typed(program: Program) -> Program:
    """The same program plus a broadcast input on the collection channel `c`."""
    misuse = Located("l1", BInput("c", Pattern(("w",), Var("w")), NIL))
    return Program(network=ParN(program.network, misuse), selectors=program.selectors,
                   channels=program.channels, types=program.types)


def shuffle_network(net: Network, rng: random.Random) -> Network:
    """A structurally congruent network: operands of | and + swapped at random."""
    if isinstance(net, ParN):
        left, right = shuffle_network(net.left, rng), shuffle_network(net.right, rng)
        return ParN(right, left) if rng.random() < 0.5 else ParN(left, right)
    if isinstance(net, NewN):
        return NewN(net.name, net.bound, shuffle_network(net.body, rng), net.type_ann)
    if isinstance(net, Located):
        return Located(net.location, shuffle_process(net.process, rng))
    return net


def shuffle_process(proc: Process, rng: random.Random) -> Process:
    """Swap operands of | and + at random, everywhere in a process."""
    if isinstance(proc, (Par, Sum)):
        left, right = shuffle_process(proc.left, rng), shuffle_process(proc.right, rng)
        return type(proc)(right, left) if rng.random() < 0.5 else type(proc)(left, right)
    if isinstance(proc, Output):
        return Output(proc.channel, proc.msg, shuffle_process(proc.cont, rng))
    if isinstance(proc, BInput):
        return BInput(proc.channel, proc.pattern, shuffle_process(proc.cont, rng))
    if isinstance(proc, CInput):
        return CInput(proc.channel, proc.pattern, proc.setvar,
                      shuffle_process(proc.cont, rng))
    if isinstance(proc, New):
        return New(proc.name, proc.bound, shuffle_process(proc.body, rng), proc.type_ann)
    if isinstance(proc, (Match, Mismatch)):
        return type(proc)(proc.left, proc.right, shuffle_process(proc.body, rng))
    return proc

"""
Message evaluation, pattern matching and the builtin constructor/selector registry.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from app.models.ast_model import (
    ConstructorApp, Message, MultisetLit, Pattern, Program, SetVar, TupleMsg,
    Var, message_key,
)
from app.utils.errors import EvaluationError, ProgramError
from app.utils.logger import get_logger, log_debug

logger = get_logger(__name__)

Rewrite = Callable[[Message], Optional[Message]]
Selector = Callable[[Tuple[Message, ...]], Message]


def _first(arg: Message) -> Optional[Message]:
    if isinstance(arg, TupleMsg):
        return arg.items[0]
    return None


def _min(items: Tuple[Message, ...]) -> Message:
    return min(items, key=message_key)


def _max(items: Tuple[Message, ...]) -> Message:
    return max(items, key=message_key)


def _size(items: Tuple[Message, ...]) -> Message:
    return Var(str(len(items)))


def _elect(items: Tuple[Message, ...]) -> Message:
    announced = [item for item in items
                 if isinstance(item, ConstructorApp) and item.constructor == "chosen"]
    return min(announced or items, key=message_key)


def _find(target: str, fallback: str) -> Selector:
    def select(items: Tuple[Message, ...]) -> Message:
        for item in items:
            if isinstance(item, TupleMsg) and item.items[0] == Var(target):
                return Var(target)
        return Var(fallback)
    return select


BUILTIN_CONSTRUCTORS: Dict[str, Optional[Rewrite]] = {
    "first": _first,
    "chosen": None,
}

# name -> (number of parameters, factory)
BUILTIN_SELECTORS: Dict[str, Tuple[int, Callable[..., Selector]]] = {
    "min": (0, lambda: _min),
    "max": (0, lambda: _max),
    "size": (0, lambda: _size),
    "elect": (0, lambda: _elect),
    "find": (2, _find),
}

IDEMPOTENT_BUILTINS = frozenset({"min", "max", "elect"})


@dataclass(frozen=True)
class BuiltinRegistry:
    """Constructors with their optional rewrite and selectors with their function."""

    constructors: Mapping[str, Optional[Rewrite]] = field(default_factory=dict)
    selectors: Mapping[str, Selector] = field(default_factory=dict)


def bind_selector(builtin: str, params: Sequence[str]) -> Selector:
    """Instantiate a shipped selector.

    Raises:
        ProgramError: unknown builtin or wrong number of parameters.
    """
    if builtin not in BUILTIN_SELECTORS:
        raise ProgramError(f"unknown builtin selector `{builtin}`")
    arity, factory = BUILTIN_SELECTORS[builtin]
    if len(params) != arity:
        raise ProgramError(
            f"selector builtin `{builtin}` takes {arity} parameter(s), got {len(params)}")
    return factory(*params)


def build_registry(program: Program) -> BuiltinRegistry:
    """Registry for the signature declared by a program."""
    constructors = {name: BUILTIN_CONSTRUCTORS.get(name) for name in program.constructors}
    selectors = {decl.name: bind_selector(decl.builtin, decl.params)
                 for decl in program.selectors}
    return BuiltinRegistry(constructors, selectors)


def default_registry() -> BuiltinRegistry:
    """Every parameterless builtin under its own name."""
    selectors = {name: factory() for name, (arity, factory) in BUILTIN_SELECTORS.items()
                 if arity == 0}
    return BuiltinRegistry(dict(BUILTIN_CONSTRUCTORS), selectors)


def evaluate(msg: Message, registry: BuiltinRegistry) -> Message:
    """Normal form of a message.

    Raises:
        EvaluationError: selector over a set variable or an empty multiset, or an
            unregistered symbol.
    """
    if isinstance(msg, (Var, SetVar)):
        return msg
    if isinstance(msg, TupleMsg):
        return TupleMsg(tuple(evaluate(item, registry) for item in msg.items))
    if isinstance(msg, MultisetLit):
        return MultisetLit.of(evaluate(item, registry) for item in msg.items)
    if isinstance(msg, ConstructorApp):
        if msg.constructor not in registry.constructors:
            raise EvaluationError(f"unregistered constructor `{msg.constructor}`")
        arg = evaluate(msg.arg, registry)
        rewrite = registry.constructors[msg.constructor]
        if rewrite is not None:
            result = rewrite(arg)
            if result is not None:
                return evaluate(result, registry)
        return ConstructorApp(msg.constructor, arg)
    if msg.selector not in registry.selectors:
        raise EvaluationError(f"unregistered selector `{msg.selector}`")
    if isinstance(msg.arg, SetVar):
        raise EvaluationError(
            f"selector `{msg.selector}` applied to unresolved set variable `{msg.arg.name}`")
    items = tuple(evaluate(item, registry) for item in msg.arg.items)
    if not items:
        raise EvaluationError(f"selector `{msg.selector}` applied to an empty multiset")
    return evaluate(registry.selectors[msg.selector](items), registry)


def is_evaluable(msg: Message) -> bool:
    """True when no set variable blocks evaluation."""
    if isinstance(msg, SetVar):
        return False
    if isinstance(msg, Var):
        return True
    if isinstance(msg, (TupleMsg, MultisetLit)):
        return all(is_evaluable(item) for item in msg.items)
    return is_evaluable(msg.arg)


def _unify(body: Message, candidate: Message, binders: frozenset,
           theta: Dict[str, Message]) -> Optional[Dict[str, Message]]:
    if isinstance(body, Var) and body.name in binders:
        if body.name in theta:
            return theta if theta[body.name] == candidate else None
        extended = dict(theta)
        extended[body.name] = candidate
        return extended
    if type(body) is not type(candidate):
        return None
    if isinstance(body, TupleMsg):
        if len(body.items) != len(candidate.items):
            return None
        for sub_body, sub_candidate in zip(body.items, candidate.items):
            theta = _unify(sub_body, sub_candidate, binders, theta)
            if theta is None:
                return None
        return theta
    if isinstance(body, ConstructorApp):
        if body.constructor != candidate.constructor:
            return None
        return _unify(body.arg, candidate.arg, binders, theta)
    if isinstance(body, MultisetLit):
        return _unify_multiset(list(body.items), list(candidate.items), binders, theta)
    return theta if body == candidate else None


def _unify_multiset(bodies: List[Message], candidates: List[Message], binders: frozenset,
                    theta: Dict[str, Message]) -> Optional[Dict[str, Message]]:
    if len(bodies) != len(candidates):
        return None
    if not bodies:
        return theta
    head, rest = bodies[0], bodies[1:]
    for index, candidate in enumerate(candidates):
        attempt = _unify(head, candidate, binders, theta)
        if attempt is not None:
            remaining = candidates[:index] + candidates[index + 1:]
            result = _unify_multiset(rest, remaining, binders, attempt)
            if result is not None:
                return result
    return None


def match_broadcast(candidate: Message, pattern: Pattern) -> Optional[Dict[str, Message]]:
    """Substitution theta with candidate = body.theta, or None when it does not match."""
    return _unify(pattern.body, candidate, frozenset(pattern.binders), {})


def match_collection(candidates: Iterable[Message], pattern: Pattern) -> Optional[MultisetLit]:
    """The multiset bound to the set variable when every candidate matches.

    Raises:
        EvaluationError: empty candidate multiset.
    """
    items = tuple(candidates)
    if not items:
        raise EvaluationError("collection needs a nonempty multiset of candidates")
    for item in items:
        if match_broadcast(item, pattern) is None:
            return None
    return MultisetLit.of(items)


@dataclass(frozen=True)
class IdempotenceVerdict:
    """Outcome of an idempotence check: `counterexample` is the failing family.

    `strategy` is "sampled", "families" (every family of multisets) or
    "supports" (every family of distinct element sets, exact for selectors
    whose result depends only on which elements occur).
    """

    passed: bool
    families_checked: int
    counterexample: Optional[Tuple[MultisetLit, ...]] = None
    strategy: str = "families"


def _multisets(universe: Sequence[Message], max_size: int):
    for size in range(1, max_size + 1):
        for combo in itertools.combinations_with_replacement(universe, size):
            yield combo


def _families_exhaustive(universe: Sequence[Message], max_size: int, max_family: int):
    multisets = [MultisetLit.of(combo) for combo in _multisets(universe, max_size)]
    for count in range(1, max_family + 1):
        yield from itertools.combinations_with_replacement(multisets, count)


def _support_determined(select: Selector, universe: Sequence[Message],
                        max_size: int, registry: BuiltinRegistry) -> bool:
    """Whether `select` stays in `universe` and ignores multiplicities up to `max_size`."""
    members = set(universe)
    for combo in _multisets(universe, max_size):
        value = evaluate(select(combo), registry)
        if value not in members:
            return False
        support = tuple(dict.fromkeys(combo))
        if evaluate(select(support), registry) != value:
            return False
    return True


def _families_by_support(universe: Sequence[Message], max_size: int, max_family: int):
    supports = [MultisetLit.of(combo)
                for size in range(1, min(max_size, len(universe)) + 1)
                for combo in itertools.combinations(universe, size)]
    for count in range(1, max_family + 1):
        yield from itertools.combinations(supports, count)


def _families_sampled(universe: Sequence[Message], max_size: int, max_family: int,
                      trials: int, seed: int):
    rng = random.Random(seed)
    for _ in range(trials):
        yield tuple(
            MultisetLit.of(rng.choice(universe) for _ in range(rng.randint(1, max_size)))
            for _ in range(rng.randint(1, max_family))
        )


def check_idempotent(selector: str, universe: Iterable[Union[str, Message]], max_size: int,
                     trials: int, registry: Optional[BuiltinRegistry] = None,
                     max_family: int = 4, seed: int = 0,
                     by_support: bool = True) -> IdempotenceVerdict:
    """Check f({f(S1),...,f(Sk)}) = f(S1 u ... u Sk) over families of multisets.

    With `trials=0` every family is covered. When `by_support` is set and the
    selector is first verified to return universe elements that do not
    depend on multiplicities (on every multiset up to the size of a union),
    families are enumerated as sets of distinct supports: duplicated
    elements and duplicated members cannot change either side of the law.

    Args:
        selector: Registered selector name.
        universe: Elements (names or normal messages) the multisets are drawn from.
        max_size: Largest multiset size.
        trials: Number of sampled families; 0 enumerates every family exhaustively.
        registry: Registry holding `selector`; the builtin registry by default.
        max_family: Largest family size k.
        seed: Seed of the sampler.
        by_support: Allow the support enumeration for exhaustive checks.

    Returns:
        IdempotenceVerdict: pass, or the first counterexample family.
    """
    registry = registry or default_registry()
    if selector not in registry.selectors:
        raise EvaluationError(f"unregistered selector `{selector}`")
    select = registry.selectors[selector]
    elements = list(dict.fromkeys(Var(item) if isinstance(item, str) else item
                                  for item in universe))
    if trials:
        strategy = "sampled"
        families = _families_sampled(elements, max_size, max_family, trials, seed)
    elif by_support and _support_determined(select, elements, max_size * max_family, registry):
        strategy = "supports"
        families = _families_by_support(elements, max_size, max_family)
    else:
        strategy = "families"
        families = _families_exhaustive(elements, max_size, max_family)

    checked = 0
    for family in families:
        checked += 1
        nested = select(tuple(select(member.items) for member in family))
        union = select(tuple(item for member in family for item in member.items))
        if evaluate(nested, registry) != evaluate(union, registry):
            log_debug(logger, "Idempotence counterexample",
                      {"selector": selector, "families_checked": checked,
                       "strategy": strategy})
            return IdempotenceVerdict(False, checked, family, strategy)
    log_debug(logger, "Idempotence holds", {"selector": selector, "families_checked": checked,
                                             "strategy": strategy})
    return IdempotenceVerdict(True, checked, None, strategy)

"""Backtracking (BT) algorithms on simple knapsack and their computation trees.

An algorithm is a pair of callables:

* ``ordering(k, items_seen, decisions_seen)`` returns a sort key; among the
  items still unseen, the one with the smallest key is considered next.
* ``choice(k, items_seen, next_item, decisions_seen, capacity)`` returns a
  choice list over ``ACCEPT``, ``REJECT`` and ``STOP``. Only the entries before
  ``STOP`` become children.

When building a tree the ordering only receives the arguments its declared
class may read; the hidden ones are passed as ``None``.
"""

from __future__ import annotations

import enum
import functools
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

from .knapsack import SimpleKnapsackInstance


class Decision(enum.IntEnum):
    REJECT = 0
    ACCEPT = 1


ACCEPT = Decision.ACCEPT
REJECT = Decision.REJECT


class _Stop:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "STOP"

    def __reduce__(self):
        return (_Stop, ())


STOP = _Stop()


class AdaptivityClass(enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"
    FULLY_ADAPTIVE = "fully_adaptive"


class OrderingTieError(ValueError):
    """The ordering ranked two distinct candidate items equally."""


Items = tuple[int, ...]
Decisions = tuple[Decision, ...]
OrderingFn = Callable[[int, Items | None, Decisions | None], Callable[[int], Any]]
ChoiceFn = Callable[[int, Items, int, Decisions, int], Sequence[Any]]


@dataclass(frozen=True)
class BTAlgorithm:
    name: str
    declared_class: AdaptivityClass
    ordering: OrderingFn
    choice: ChoiceFn

    def ordering_key(self, k: int, items: Items, decisions: Decisions) -> Callable[[int], Any]:
        if self.declared_class is AdaptivityClass.FIXED:
            return self.ordering(k, None, None)
        if self.declared_class is AdaptivityClass.ADAPTIVE:
            return self.ordering(k, items, None)
        return self.ordering(k, items, decisions)


def choice_prefix(entries: Sequence[Any]) -> Decisions:
    """Validate a choice list and return the decisions before ``STOP``."""
    seen: set[Any] = set()
    prefix: list[Decision] = []
    stopped = False
    for e in entries:
        if e is not STOP and e not in (ACCEPT, REJECT):
            raise ValueError(f"choice list entry {e!r} is not ACCEPT, REJECT or STOP")
        key = "STOP" if e is STOP else Decision(e)
        if key in seen:
            raise ValueError(f"choice list repeats {e!r}: {list(entries)!r}")
        seen.add(key)
        if e is STOP:
            stopped = True
        elif not stopped:
            prefix.append(Decision(e))
    return tuple(prefix)


@dataclass(eq=False)
class Node:
    items: Items
    decisions: Decisions
    children: list["Node"] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.items)

    @property
    def label(self) -> tuple[Items, Decisions]:
        return self.items, self.decisions

    @property
    def accepted_sum(self) -> int:
        return sum(x for x, d in zip(self.items, self.decisions) if d is ACCEPT)


@dataclass(frozen=True)
class TreeLevelSet:
    depth: int
    partial_solutions: frozenset[tuple[Items, Decisions]]


@dataclass(eq=False)
class ComputationTree:
    root: Node
    n: int
    levels: list[list[Node]]

    def nodes(self) -> Iterator[Node]:
        for level in self.levels:
            yield from level

    def level(self, depth: int) -> TreeLevelSet:
        nodes = self.levels[depth] if depth < len(self.levels) else []
        return TreeLevelSet(depth, frozenset(v.label for v in nodes))

    def level_sizes(self) -> list[int]:
        return [len(level) for level in self.levels]

    def check_structure(self) -> None:
        """Raise AssertionError if a label does not extend its parent's by one pair."""
        assert self.root.items == () and self.root.decisions == ()
        for v in self.nodes():
            if not v.children:
                continue
            nxt = {c.items[-1] for c in v.children}
            assert len(nxt) == 1, f"children of {v.label} disagree on the next item"
            assert len({c.decisions[-1] for c in v.children}) == len(v.children)
            for c in v.children:
                assert c.items[:-1] == v.items and c.decisions[:-1] == v.decisions


def _next_item(key: Callable[[int], Any], candidates: Iterable[int]) -> int:
    ranked = sorted((key(x), x) for x in set(candidates))
    for (k1, x1), (k2, x2) in zip(ranked, ranked[1:]):
        if k1 == k2:
            raise OrderingTieError(f"ordering ties items {x1} and {x2} (key {k1!r})")
    return ranked[0][1]


def build_tree(alg: BTAlgorithm, instance: SimpleKnapsackInstance) -> ComputationTree:
    """Build the computation tree of ``alg`` on ``instance``.

    Items of equal weight are the same data item, so repeated weights never
    count as an ordering tie.
    """
    if instance.n < 1:
        raise ValueError("instance must have at least one item")
    root = Node((), ())
    levels = [[root]]
    frontier = [(root, Counter(instance.items))]
    for k in range(instance.n):
        nxt_frontier = []
        for v, remaining in frontier:
            key = alg.ordering_key(k, v.items, v.decisions)
            item = _next_item(key, remaining)
            entries = alg.choice(k, v.items, item, v.decisions, instance.capacity)
            rest = remaining.copy()
            rest[item] -= 1
            if not rest[item]:
                del rest[item]
            for d in choice_prefix(entries):
                child = Node(v.items + (item,), v.decisions + (d,))
                v.children.append(child)
                nxt_frontier.append((child, rest))
        if not nxt_frontier:
            break
        levels.append([c for c, _ in nxt_frontier])
        frontier = nxt_frontier
    return ComputationTree(root, instance.n, levels)


def tree_width(tree: ComputationTree) -> int:
    return max(len(level) for level in tree.levels)


@dataclass(frozen=True)
class LeafSolution:
    items: Items
    decisions: Decisions
    total: int

    @property
    def accepted(self) -> tuple[int, ...]:
        return tuple(sorted(x for x, d in zip(self.items, self.decisions) if d is ACCEPT))


def extract_solutions(
    tree: ComputationTree, instance: SimpleKnapsackInstance
) -> list[LeafSolution]:
    """Every depth-n leaf with its accepted sum; feasibility is left to the caller."""
    if len(tree.levels) <= instance.n:
        return []
    sols = [LeafSolution(v.items, v.decisions, v.accepted_sum) for v in tree.levels[instance.n]]
    return sorted(sols, key=lambda s: (s.total, s.items, s.decisions))


def best_feasible(solutions: Iterable[LeafSolution], capacity: int) -> int | None:
    totals = [s.total for s in solutions if s.total <= capacity]
    return max(totals) if totals else None


@dataclass(frozen=True)
class AdaptivityCheck:
    passed: bool
    counterexample: tuple[tuple[Items, Decisions], tuple[Items, Decisions]] | None = None


def check_adaptivity(
    alg: BTAlgorithm,
    probes: Sequence[tuple[Items, Sequence[Decisions]]],
    candidates: Iterable[int] | None = None,
) -> AdaptivityCheck:
    """Probe the raw ordering for dependence on arguments its class must ignore.

    Each probe is an item prefix with several decision histories for it. An
    adaptive ordering must rank ``candidates`` identically across the histories
    of one prefix; a fixed ordering must also agree across prefixes of the same
    length.
    """
    if not probes:
        raise ValueError("empty probe set")
    points: list[tuple[Items, Decisions]] = []
    for items, histories in probes:
        items = tuple(items)
        for h in histories:
            h = tuple(Decision(d) for d in h)
            if len(h) != len(items):
                raise ValueError(f"history {h} does not match prefix {items}")
            points.append((items, h))
    if candidates is None:
        pool = {x for items, _ in probes for x in items} | set(range(1, 17))
    else:
        pool = set(candidates)
    pool = sorted(pool)

    if alg.declared_class is AdaptivityClass.FULLY_ADAPTIVE:
        return AdaptivityCheck(True)
    if alg.declared_class is AdaptivityClass.ADAPTIVE:
        if not any(len(set(h)) >= 2 for _, h in probes):
            raise ValueError("adaptive check needs >= 2 distinct histories for some prefix")
        group: Callable[[tuple[Items, Decisions]], Hashable] = lambda p: p[0]
    else:
        if len({items for items, _ in points}) < 2:
            raise ValueError("fixed check needs >= 2 distinct item prefixes")
        group = lambda p: len(p[0])

    first: dict[Hashable, tuple[tuple[int, ...], tuple[Items, Decisions]]] = {}
    for p in points:
        key = alg.ordering(len(p[0]), p[0], p[1])
        ranking = tuple(sorted(pool, key=key))
        g = group(p)
        if g not in first:
            first[g] = (ranking, p)
        elif first[g][0] != ranking:
            return AdaptivityCheck(False, (first[g][1], p))
    return AdaptivityCheck(True)


# reference algorithms ------------------------------------------------------


def _largest_first(k, items, decisions):
    return lambda x: -x


def greedy_largest_fit() -> BTAlgorithm:
    def choice(k, items, nxt, decisions, capacity):
        used = sum(x for x, d in zip(items, decisions) if d is ACCEPT)
        return [ACCEPT] if used + nxt <= capacity else [REJECT]

    return BTAlgorithm("greedy_largest_fit", AdaptivityClass.ADAPTIVE, _largest_first, choice)


def full_backtrack() -> BTAlgorithm:
    def choice(k, items, nxt, decisions, capacity):
        return [ACCEPT, REJECT]

    return BTAlgorithm("full_backtrack", AdaptivityClass.ADAPTIVE, _largest_first, choice)


@functools.lru_cache(maxsize=4096)
def _capped_survivors(items: Items, capacity: int, b: int) -> frozenset[Decisions]:
    level: list[tuple[Decisions, int]] = [((), 0)]
    for x in items:
        grown = []
        for dec, total in level:
            if total + x <= capacity:
                grown.append((dec + (ACCEPT,), total + x))
            grown.append((dec + (REJECT,), total))
        # largest sum first, ties go to the accept-earlier pattern
        grown.sort(key=lambda p: (-p[1], [-d for d in p[0]]))
        level = grown[:b]
    return frozenset(dec for dec, _ in level)


def width_capped(b: int, priority: Sequence[int] | None = None) -> BTAlgorithm:
    """Keep only the ``b`` feasible partial solutions with the largest sums.

    Items listed in ``priority`` are considered first, in that order; the rest
    follow largest first. Every node at one depth has seen the same items, so
    each choice call can replay the whole level and keep its own extensions
    only if they survive the cut.
    """
    if b < 1:
        raise ValueError(f"width cap must be >= 1, got {b}")
    rank = {x: i for i, x in enumerate(priority or ())}

    def ordering(k, items, decisions):
        return lambda x: (0, rank[x]) if x in rank else (1, -x)

    def choice(k, items, nxt, decisions, capacity):
        keep = _capped_survivors(tuple(items) + (nxt,), capacity, b)
        return [d for d in (ACCEPT, REJECT) if tuple(decisions) + (d,) in keep] + [STOP]

    return BTAlgorithm(f"width_capped({b})", AdaptivityClass.ADAPTIVE, ordering, choice)


def reference_algorithms() -> dict[str, Callable[..., BTAlgorithm]]:
    return {
        "greedy_largest_fit": greedy_largest_fit,
        "full_backtrack": full_backtrack,
        "width_capped": width_capped,
    }

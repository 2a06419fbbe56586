"""Simple knapsack instances and the brute-force oracles everything else is checked against.

Every oracle here is exponential on purpose. Enumeration sizes are capped
and exceeding a cap raises :class:`BudgetError` instead of hanging.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence

DEFAULT_ENUM_CAP = 26
DEFAULT_SIGNED_CAP = 16

# low half of the item list is tabulated once, high half is walked mask by mask
_LOW_BITS = 12

Selector = tuple[int, ...]


class BudgetError(ValueError):
    """An enumeration or memory cap would be exceeded."""


class InstanceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SimpleKnapsackInstance:
    items: tuple[int, ...]
    capacity: int
    provenance: dict[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        for x in self.items:
            if not isinstance(x, int) or isinstance(x, bool) or x < 1:
                raise ValueError(f"items must be positive integers, got {x!r}")
        if not isinstance(self.capacity, int) or self.capacity < 1:
            raise ValueError(f"capacity must be a positive integer, got {self.capacity!r}")

    @property
    def n(self) -> int:
        return len(self.items)

    def to_document(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "n": self.n,
            "capacity": str(self.capacity),
            "items": [str(x) for x in self.items],
        }
        if self.provenance is not None:
            doc["provenance"] = self.provenance
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_document(cls, doc: Any) -> "SimpleKnapsackInstance":
        if not isinstance(doc, dict):
            raise InstanceFormatError("instance document must be an object")
        try:
            n = doc["n"]
            capacity = _parse_decimal(doc["capacity"], "capacity")
            raw_items = doc["items"]
        except KeyError as exc:
            raise InstanceFormatError(f"missing field {exc.args[0]!r}") from None
        if not isinstance(raw_items, list):
            raise InstanceFormatError("'items' must be an array of decimal strings")
        items = tuple(_parse_decimal(x, "items[]") for x in raw_items)
        if not isinstance(n, int) or n != len(items):
            raise InstanceFormatError(f"'n' = {n!r} does not match {len(items)} items")
        provenance = doc.get("provenance")
        try:
            return cls(items, capacity, provenance)
        except ValueError as exc:
            raise InstanceFormatError(str(exc)) from None

    @classmethod
    def loads(cls, text: str) -> "SimpleKnapsackInstance":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"not valid JSON: {exc}") from None
        return cls.from_document(doc)


def _parse_decimal(value: Any, name: str) -> int:
    if not isinstance(value, str) or not value.strip().lstrip("-").isdigit():
        raise InstanceFormatError(f"{name} must be a decimal string, got {value!r}")
    return int(value)


def _check_selector(instance: SimpleKnapsackInstance, sel: Iterable[int]) -> Selector:
    sel = tuple(sorted(set(sel)))
    for i in sel:
        if not 0 <= i < instance.n:
            raise IndexError(f"selector index {i} out of range for {instance.n} items")
    return sel


def _check_cap(k: int, cap: int) -> None:
    if k > cap:
        raise BudgetError(f"{k} items exceeds the enumeration cap of {cap} (2^{k} subsets)")


def subset_sum(instance: SimpleKnapsackInstance, sel: Iterable[int]) -> int:
    return sum(instance.items[i] for i in _check_selector(instance, sel))


def _sums_table(items: Sequence[int]) -> list[int]:
    # table[mask] = sum of items whose bit is set in mask
    table = [0]
    for x in items:
        table += [s + x for s in table]
    return table


def _subset_sum_rows(items: Sequence[int]) -> Iterator[tuple[int, list[int]]]:
    """Yield ``(high_mask, row)`` with ``row[low_mask]`` the sum of that subset.

    Together the rows cover all ``2^k`` subsets exactly once; the full mask is
    ``(high_mask << low_bits) | low_mask``.
    """
    low_bits = min(len(items), _LOW_BITS)
    low = _sums_table(items[:low_bits])
    high = _sums_table(items[low_bits:])
    for high_mask, h in enumerate(high):
        yield high_mask, [h + s for s in low]


def _mask_to_selector(mask: int) -> Selector:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def subsets_summing_to(
    instance: SimpleKnapsackInstance, target: int, cap: int = DEFAULT_ENUM_CAP
) -> list[Selector]:
    _check_cap(instance.n, cap)
    low_bits = min(instance.n, _LOW_BITS)
    found: list[Selector] = []
    for high_mask, row in _subset_sum_rows(instance.items):
        if target not in row:
            continue
        for low_mask, s in enumerate(row):
            if s == target:
                found.append(_mask_to_selector(high_mask << low_bits | low_mask))
    return sorted(found)


def optimum_bruteforce(
    instance: SimpleKnapsackInstance, cap: int = DEFAULT_ENUM_CAP
) -> tuple[int, list[Selector]]:
    """Best feasible subset sum and every selector achieving it."""
    _check_cap(instance.n, cap)
    best = 0
    for _, row in _subset_sum_rows(instance.items):
        feasible = [s for s in row if s <= instance.capacity]
        if feasible:
            best = max(best, max(feasible))
    return best, subsets_summing_to(instance, best, cap)


def all_subset_sums_distinct(items: Sequence[int], cap: int = DEFAULT_ENUM_CAP) -> bool:
    items = tuple(items)
    _check_cap(len(items), cap)
    seen: set[int] = set()
    for _, row in _subset_sum_rows(items):
        before = len(seen)
        seen.update(row)
        if len(seen) - before != len(row):
            return False
    return True


class SignedSumSet:
    """All values ``sum(e_i * x_i)`` with ``e_i`` in ``{-1, 0, 1}``.

    Equivalently the set of differences ``sum(S1) - sum(S2)`` over pairs of
    subsets, since shared elements cancel.
    """

    __slots__ = ("values", "generators", "max_generators")

    def __init__(
        self,
        values: frozenset[int],
        generators: tuple[int, ...],
        max_generators: int = DEFAULT_SIGNED_CAP,
    ):
        self.values = values
        self.generators = generators
        self.max_generators = max_generators

    def __contains__(self, x: int) -> bool:
        return x in self.values

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __repr__(self) -> str:
        return f"SignedSumSet(generators={self.generators!r}, size={len(self.values)})"

    def extend(self, y: int) -> "SignedSumSet":
        k = len(self.generators) + 1
        if k > self.max_generators:
            raise BudgetError(
                f"signed sums of {k} items need up to 3^{k} = {3**k} values; "
                f"budget allows {self.max_generators} items"
            )
        v = self.values
        return SignedSumSet(
            v | {s + y for s in v} | {s - y for s in v},
            self.generators + (y,),
            self.max_generators,
        )


def signed_sums(items: Iterable[int], max_generators: int = DEFAULT_SIGNED_CAP) -> SignedSumSet:
    items = tuple(items)
    if len(items) > max_generators:
        raise BudgetError(
            f"signed sums of {len(items)} items need up to 3^{len(items)} = "
            f"{3 ** len(items)} values; budget allows {max_generators} items"
        )
    result = SignedSumSet(frozenset({0}), (), max_generators)
    for y in items:
        result = result.extend(y)
    return result

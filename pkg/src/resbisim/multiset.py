"""Multisets over a finite, ordered universe of place names.

A :class:`Multiset` is stored as a dense count vector indexed by the
position of each name in its :class:`Universe`.  The vector form is
canonical (a zero count simply means "absent"), so equality and hashing
are structural.  Values are immutable.
"""
from __future__ import annotations

import re
from enum import IntEnum
from typing import Iterable, Mapping

EMPTY_SYMBOL = "∅"


class UniverseMismatch(ValueError):
    """Raised when two multisets over different universes are combined."""


class ResourceSyntaxError(ValueError):
    pass


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class Universe:
    """An ordered tuple of distinct names; position defines the lex index."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for n in names:
            if not isinstance(n, str) or not n:
                raise ValueError(f"invalid place name {n!r}")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate place names: {', '.join(dup)}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, Universe) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Universe({list(self.names)!r})"

    def index(self, name: str) -> int:
        return self._index[name]

    def empty(self) -> Multiset:
        return Multiset(self, (0,) * len(self.names))

    def multiset(self, counts: Mapping[str, int] | None = None, **kw: int) -> Multiset:
        """Build a multiset from a name->count mapping (keyword form also allowed)."""
        vec = [0] * len(self.names)
        items = dict(counts or {})
        items.update(kw)
        for name, c in items.items():
            if name not in self._index:
                raise KeyError(f"unknown place {name!r}")
            if c < 0:
                raise ValueError(f"negative count for {name!r}")
            vec[self._index[name]] += int(c)
        return Multiset(self, tuple(vec))

    def vector(self, vec: Iterable[int]) -> Multiset:
        vec = tuple(int(c) for c in vec)
        if len(vec) != len(self.names):
            raise ValueError(f"expected {len(self.names)} components, got {len(vec)}")
        if any(c < 0 for c in vec):
            raise ValueError("negative component")
        return Multiset(self, vec)

    def parse(self, text: str) -> Multiset:
        return parse_resource(self, text)


class Multiset:
    __slots__ = ("universe", "vec", "_hash")

    def __init__(self, universe: Universe, vec: tuple):
        # callers guarantee len(vec) == len(universe) and non-negative entries
        self.universe = universe
        self.vec = vec
        self._hash = None

    @property
    def counts(self) -> dict[int, int]:
        """Sparse index->count map; zero entries are never present."""
        return {i: c for i, c in enumerate(self.vec) if c}

    def items(self):
        """(name, count) pairs with positive count, in universe order."""
        return [(self.universe.names[i], c) for i, c in enumerate(self.vec) if c]

    def __getitem__(self, name: str) -> int:
        return self.vec[self.universe.index(name)]

    def __eq__(self, other):
        if not isinstance(other, Multiset):
            return NotImplemented
        return self.vec == other.vec and self.universe == other.universe

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.vec)
        return self._hash

    def __bool__(self):
        return any(self.vec)

    def __len__(self):
        return sum(self.vec)

    def __repr__(self):
        return f"Multiset({format_resource(self)})"

    def __str__(self):
        return format_resource(self)

    def __add__(self, other: Multiset) -> Multiset:
        return add(self, other)

    def __sub__(self, other: Multiset) -> Multiset:
        return subtract(self, other)

    def __or__(self, other: Multiset) -> Multiset:
        return union(self, other)

    def __le__(self, other: Multiset) -> bool:
        return leq(self, other)

    def sort_key(self):
        """Key realising the cardinality-lexicographic total order."""
        return (sum(self.vec), self.vec)


def _check(a: Multiset, b: Multiset) -> None:
    if a.universe is not b.universe and a.universe != b.universe:
        raise UniverseMismatch(f"{a.universe!r} vs {b.universe!r}")


def add(a: Multiset, b: Multiset) -> Multiset:
    _check(a, b)
    return Multiset(a.universe, tuple(x + y for x, y in zip(a.vec, b.vec)))


def subtract(a: Multiset, b: Multiset) -> Multiset:
    """Truncated difference: each count is max(a - b, 0)."""
    _check(a, b)
    return Multiset(a.universe, tuple(x - y if x > y else 0 for x, y in zip(a.vec, b.vec)))


def union(a: Multiset, b: Multiset) -> Multiset:
    _check(a, b)
    return Multiset(a.universe, tuple(x if x > y else y for x, y in zip(a.vec, b.vec)))


def leq(a: Multiset, b: Multiset) -> bool:
    _check(a, b)
    return all(x <= y for x, y in zip(a.vec, b.vec))


def cardinality(a: Multiset) -> int:
    return sum(a.vec)


def cardlex_cmp(a: Multiset, b: Multiset) -> Ordering:
    """Compare by total count first, then lexicographically by place order."""
    _check(a, b)
    ka, kb = a.sort_key(), b.sort_key()
    if ka < kb:
        return Ordering.LT
    if ka > kb:
        return Ordering.GT
    return Ordering.EQ


def pair_leq(p: tuple[Multiset, Multiset], q: tuple[Multiset, Multiset]) -> bool:
    return leq(p[0], q[0]) and leq(p[1], q[1])


def format_resource(m: Multiset) -> str:
    items = m.items()
    if not items:
        return EMPTY_SYMBOL
    return ",".join(f"{name}:{c}" for name, c in items)


_ITEM = re.compile(r"^([^\s:,]+)(?::(\d+))?$")


def parse_resource(universe: Universe, text: str) -> Multiset:
    """Parse ``A:2,B:1``.  ``∅``, ``-`` or blank mean the empty multiset.

    Whitespace is ignored, a bare name counts once, and repeated names add up.
    """
    body = re.sub(r"\s+", "", text)
    if body in ("", EMPTY_SYMBOL, "-"):
        return universe.empty()
    vec = [0] * len(universe)
    for part in body.split(","):
        m = _ITEM.match(part)
        if not m:
            raise ResourceSyntaxError(f"malformed resource item {part!r}")
        name, count = m.group(1), m.group(2)
        if name not in universe:
            raise ResourceSyntaxError(f"unknown place {name!r}")
        vec[universe.index(name)] += int(count) if count is not None else 1
    return Multiset(universe, tuple(vec))

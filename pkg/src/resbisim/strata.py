"""Stratified equivalences computed by brute-force recursion.

These are the reference oracles for the tableau decider: the standard
approximants ``~_k``, the resource approximants ``≃_k``, the equivalence
level under a cap, a bounded search for contexts refuting resource
similarity, and a one-step transfer-property checker for explicit relations.
None of this shares code with :mod:`resbisim.tableau` beyond the net model.
"""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .multiset import Multiset, Universe
from .net import Firing, LabeledPetriNet, Transition, fire, firings, t_children

DEFAULT_CAP = 8


@dataclass(frozen=True)
class EqLevel:
    """Equivalence level: a finite ``value`` or, when ``value`` is None, at least ``cap``."""

    value: Optional[int]
    cap: int

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.value is not None and not 0 <= self.value < self.cap:
            raise ValueError("finite level must lie below the cap")

    @property
    def finite(self) -> bool:
        return self.value is not None

    def __str__(self):
        return str(self.value) if self.finite else f">={self.cap}"


def at_least(cap: int) -> EqLevel:
    return EqLevel(None, cap)


@dataclass(frozen=True)
class RefutationWitness:
    context: Multiset
    level: int
    side: str  # "left" or "right": the side whose firing has no match
    firing: Firing

    def __str__(self):
        return f"w={self.context} level={self.level} side={self.side} firing: {self.firing}"


@dataclass(frozen=True)
class TransferViolation:
    pair: tuple
    side: str
    transition: Transition
    context: Multiset  # completion added to both sides (empty in standard mode)

    def __str__(self):
        r, s = self.pair
        return (f"({r}, {s}): firing {self.transition.name} from the {self.side} side"
                f" (context {self.context}) has no imitation in the relation")


class _Oracle:
    """Memoized game evaluation over raw count vectors of one net."""

    def __init__(self, net: LabeledPetriNet):
        self.trans = [(t.pre.vec, t.post.vec, t.label) for t in net.transitions]
        by_label: dict = {}
        for pre, post, label in self.trans:
            by_label.setdefault(label, []).append((pre, post))
        self.by_label = by_label
        # pair -> (largest level known to hold, smallest level known to fail)
        self.std_memo: dict = {}
        self.res_memo: dict = {}

    @staticmethod
    def _key(a, b):
        # strata are symmetric, so (a, b) and (b, a) share an entry
        return (a, b) if (sum(a), a) <= (sum(b), b) else (b, a)

    @staticmethod
    def _lookup(memo, key, k):
        hit = memo.get(key)
        if hit is None:
            return None
        lo, hi = hit
        if k <= lo:
            return True
        if k >= hi:
            return False
        return None

    @staticmethod
    def _store(memo, key, k, verdict):
        lo, hi = memo.get(key, (0, float("inf")))
        if verdict:
            lo = max(lo, k)
        else:
            hi = min(hi, k)
        memo[key] = (lo, hi)

    # standard game: plain firings on both sides
    def std(self, a, b, k):
        if k == 0 or a == b:
            return True
        key = self._key(a, b)
        cached = self._lookup(self.std_memo, key, k)
        if cached is not None:
            return cached
        verdict = self._std_side(a, b, k) and self._std_side(b, a, k)
        self._store(self.std_memo, key, k, verdict)
        return verdict

    def _std_side(self, a, b, k):
        for pre, post, label in self.trans:
            if not _enabled(pre, a):
                continue
            a2 = _fire(a, pre, post)
            if not any(
                _enabled(upre, b) and self.std(a2, _fire(b, upre, upost), k - 1)
                for upre, upost in self.by_label[label]
            ):
                return False
        return True

    # resource game: both sides completed by •t - a before firing
    def res(self, a, b, k):
        if k == 0 or a == b:
            return True
        key = self._key(a, b)
        cached = self._lookup(self.res_memo, key, k)
        if cached is not None:
            return cached
        verdict = self._res_side(a, b, k) and self._res_side(b, a, k)
        self._store(self.res_memo, key, k, verdict)
        return verdict

    def _res_side(self, a, b, k):
        for pre, post, label in self.trans:
            ctx = tuple(p - x if p > x else 0 for p, x in zip(pre, a))
            a2 = _fire(tuple(x + c for x, c in zip(a, ctx)), pre, post)
            bc = tuple(x + c for x, c in zip(b, ctx))
            if not any(
                _enabled(upre, bc) and self.res(a2, _fire(bc, upre, upost), k - 1)
                for upre, upost in self.by_label[label]
            ):
                return False
        return True


def _enabled(pre, m):
    return all(p <= x for p, x in zip(pre, m))


def _fire(m, pre, post):
    return tuple(x - p + q for x, p, q in zip(m, pre, post))


_oracles: "weakref.WeakKeyDictionary[LabeledPetriNet, _Oracle]" = weakref.WeakKeyDictionary()


def _oracle(net: LabeledPetriNet) -> _Oracle:
    o = _oracles.get(net)
    if o is None:
        o = _oracles[net] = _Oracle(net)
    return o


def stratified_std(net: LabeledPetriNet, m1: Multiset, m2: Multiset, k: int) -> bool:
    """Whether m1 ~_k m2 (k rounds of the ordinary bisimulation game)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _oracle(net).std(m1.vec, m2.vec, k)


def stratified_res(net: LabeledPetriNet, r: Multiset, s: Multiset, k: int) -> bool:
    """Whether r ≃_k s (k rounds of the resource-completed game)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _oracle(net).res(r.vec, s.vec, k)


def eqlev(net: LabeledPetriNet, r: Multiset, s: Multiset, cap: int = DEFAULT_CAP) -> EqLevel:
    """Largest k with r ≃_k s, or ``>=cap`` if every level up to the cap holds."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    o = _oracle(net)
    for k in range(1, cap + 1):
        if not o.res(r.vec, s.vec, k):
            return EqLevel(k - 1, cap)
    return at_least(cap)


def std_level(net: LabeledPetriNet, m1: Multiset, m2: Multiset, cap: int) -> Optional[int]:
    """Least k <= cap with m1 not ~_k m2, or None."""
    o = _oracle(net)
    for k in range(1, cap + 1):
        if not o.std(m1.vec, m2.vec, k):
            return k
    return None


def multisets_by_cardlex(universe: Universe, max_card: int) -> Iterable[Multiset]:
    """All multisets with at most ``max_card`` elements, ascending in ⊑."""
    n = len(universe)
    for c in range(max_card + 1):
        vecs = [v for v in itertools.product(range(c + 1), repeat=n) if sum(v) == c]
        for v in sorted(vecs):
            yield Multiset(universe, v)


def _unmatched_std(net, a: Multiset, b: Multiset, k: int) -> Optional[Firing]:
    """A firing of ``a`` with no imitation from ``b`` landing in ~_{k-1}."""
    o = _oracle(net)
    for f in firings(net, a):
        matched = False
        for u in net.with_label(f.transition.label):
            if u.pre <= b and o.std(f.target.vec, fire(net, b, u).vec, k - 1):
                matched = True
                break
        if not matched:
            return f
    return None


def refute_similarity(net: LabeledPetriNet, r: Multiset, s: Multiset,
                      max_context: int, max_level: int) -> Optional[RefutationWitness]:
    """Search contexts w (|w| <= max_context, ⊑-ascending) with (r+w) not ~_k (s+w).

    Returns the first witness found, else None.  None does not prove r ≈ s.
    """
    if max_context < 0 or max_level < 0:
        raise ValueError("bounds must be non-negative")
    if r == s or max_level == 0:
        return None
    for w in multisets_by_cardlex(net.places, max_context):
        a, b = r + w, s + w
        k = std_level(net, a, b, max_level)
        if k is None:
            continue
        f = _unmatched_std(net, a, b, k)
        if f is not None:
            return RefutationWitness(w, k, "left", f)
        f = _unmatched_std(net, b, a, k)
        assert f is not None
        return RefutationWitness(w, k, "right", f)
    return None


Member = Callable[[Multiset, Multiset], bool]


def check_transfer_step(net: LabeledPetriNet, pairs, member: Member,
                        resource_mode: bool = False) -> Optional[TransferViolation]:
    """Check one step of the (resource) transfer property for explicit pairs.

    For every listed (r, s), every firing from either side (completed by
    •t - r in resource mode) must have an equally labeled imitation whose
    result pair (r', s') satisfies ``member``.  The orientation of the pair
    is kept when the firing comes from the right side.  All left-side
    firings of all pairs are checked before any right-side firing, so a
    relation is checked first as given and then inverted.
    """
    pairs = list(pairs)
    empty = net.places.empty()
    for side in ("left", "right"):
        for r, s in pairs:
            a, b = (r, s) if side == "left" else (s, r)
            rel = member if side == "left" else (lambda x, y: member(y, x))
            for t in net.transitions:
                if resource_mode:
                    if not any(rel(c.r, c.s) for c in t_children(net, a, b, t)):
                        return TransferViolation((r, s), side, t, t.pre - a)
                elif t.pre <= a:
                    a2 = fire(net, a, t)
                    if not any(u.pre <= b and rel(a2, fire(net, b, u))
                               for u in net.with_label(t.label)):
                        return TransferViolation((r, s), side, t, empty)
    return None

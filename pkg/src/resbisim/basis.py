"""Bounded bases of congruences on resources.

A congruence on multisets is generated by its minimal non-identity pairs
under the componentwise pair order.  This module enumerates those minimal
pairs for a stratum ``≃_k`` or for ``≃`` itself, restricted to pairs whose
sides have at most ``max_card`` elements.  The result is only a basis
*candidate up to the bound*: pairs beyond the bound are never looked at.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Union

from .multiset import Multiset, pair_leq
from .net import LabeledPetriNet, format_net, parse_net
from .strata import multisets_by_cardlex, stratified_res
from .tableau import decide


@dataclass(frozen=True)
class Stratum:
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("stratum index must be non-negative")

    def __str__(self):
        return f"stratum {self.k}"


@dataclass(frozen=True)
class ResourceBisim:
    def __str__(self):
        return "resource bisimilarity"


RESOURCE_BISIM = ResourceBisim()
Relation = Union[Stratum, ResourceBisim]


@dataclass(frozen=True)
class BasisQuery:
    relation: Relation
    max_card: int
    include_symmetric: bool = False

    def __post_init__(self):
        if self.max_card < 0:
            raise ValueError("max_card must be non-negative")


def antichain_insert(current: list, candidate: tuple) -> list:
    """Insert ``candidate`` unless some member is below it; evict members above it."""
    if any(pair_leq(p, candidate) for p in current):
        return list(current)
    return [p for p in current if not pair_leq(candidate, p)] + [candidate]


def member(net: LabeledPetriNet, relation: Relation, r: Multiset, s: Multiset) -> bool:
    if isinstance(relation, Stratum):
        return stratified_res(net, r, s, relation.k)
    return decide(net, r, s).yes


def _pair_key(pair):
    r, s = pair
    return (r + s).sort_key(), r.sort_key(), s.sort_key()


def candidate_pairs(net: LabeledPetriNet, max_card: int) -> list:
    """Non-identity pairs within the bound, ascending in ⊑ of r+s."""
    sides = list(multisets_by_cardlex(net.places, max_card))
    pairs = [(r, s) for r, s in itertools.product(sides, repeat=2) if r != s]
    pairs.sort(key=_pair_key)
    return pairs


# worker state for parallel membership tests
_worker_net = None


def _init_worker(net_text):
    global _worker_net
    _worker_net = parse_net(net_text)


def _worker_member(job):
    relation, rv, sv = job
    places = _worker_net.places
    return member(_worker_net, relation, places.vector(rv), places.vector(sv))


def enumerate_basis(net: LabeledPetriNet, q: BasisQuery, jobs: int = 1) -> list:
    """Minimal in-relation non-identity pairs with |r|, |s| <= q.max_card.

    Pairs are visited by increasing size of r+s.  A strictly smaller pair
    always has a strictly smaller sum, so a pair can only be dominated by
    pairs from earlier size levels; the pairs of one level are therefore
    tested independently (in parallel when ``jobs`` > 1).
    """
    basis: list = []
    levels = itertools.groupby(candidate_pairs(net, q.max_card), key=lambda p: sum((p[0] + p[1]).vec))
    pool = None
    if jobs > 1:
        pool = ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(format_net(net),))
    try:
        for _, level in levels:
            todo = [p for p in level if not any(pair_leq(b, p) for b in basis)]
            if pool is not None:
                jobs_ = [(q.relation, r.vec, s.vec) for r, s in todo]
                verdicts = list(pool.map(_worker_member, jobs_))
            else:
                verdicts = [member(net, q.relation, r, s) for r, s in todo]
            for pair, ok in zip(todo, verdicts):
                if ok:
                    basis = antichain_insert(basis, pair)
    finally:
        if pool is not None:
            pool.shutdown()
    if not q.include_symmetric:
        basis = [(r, s) for r, s in basis if r.sort_key() <= s.sort_key()]
    basis.sort(key=_pair_key)
    return basis

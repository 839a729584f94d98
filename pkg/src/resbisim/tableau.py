"""Tableau decision procedure for resource bisimilarity, with certificates.

The nondeterministic tableau algorithm is determinized by depth-first
search.  At a non-identity leaf REDUCE is applied whenever some ancestor
pair is componentwise below the leaf (the deepest such ancestor is used);
otherwise EXPAND creates one child per transition and direction, and the
search backtracks over the candidate children of each slot.  Because the
success of a subtree depends only on its own root path, the slots of one
EXPAND node are solved independently, which explores exactly the same
space as iterating over the product of all selections.

Two REDUCE modes exist.  ``literal`` only matches an ancestor (r', s')
in its stored orientation.  ``symmetric`` (the default) also matches the
mirrored pair (s', r'); this is sound because the relation is symmetric,
and the rewrite still strictly descends in ⊑.  Without it some small nets
need tableaux with millions of nodes, since children created in the
``rl`` direction flip orientation and then never dominate each other.

A YES answer carries a :class:`Certificate` (the successful tree) that
:func:`verify_certificate` re-checks without using the search.
"""
from __future__ import annotations

import enum
import itertools
import json
from operator import le
import sys
import weakref
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .multiset import (
    Multiset,
    ResourceSyntaxError,
    add,
    format_resource,
    pair_leq,
    parse_resource,
    subtract,
)
from .net import LabeledPetriNet, Transition, t_children

LR, RL = "lr", "rl"
IDENTITY, REDUCE, EXPAND = "identity", "reduce", "expand"
LITERAL, SYMMETRIC = "literal", "symmetric"


class CertificateFormatError(ValueError):
    """The certificate document is structurally malformed."""


@dataclass(frozen=True)
class Selection:
    t: str
    u: str
    direction: str
    child: int  # index into the owning node's children


@dataclass(eq=False)
class TableauNode:
    r: Multiset
    s: Multiset
    rule: str
    ancestor_depth: Optional[int] = None
    mirrored: bool = False  # REDUCE used the ancestor with its sides swapped
    children: list = field(default_factory=list)
    selections: list = field(default_factory=list)

    @property
    def pair(self):
        return (self.r, self.s)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


@dataclass
class Certificate:
    net_hash: str
    query: tuple
    root: TableauNode
    reduce_mode: str = SYMMETRIC

    def to_dict(self) -> dict:
        doc = {"net_hash": self.net_hash, "query": [format_resource(m) for m in self.query],
               "reduce_mode": self.reduce_mode}
        doc.update(_node_to_dict(self.root))
        return doc

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)


class Outcome(enum.Enum):
    YES = "YES"
    NO = "NO"
    BUDGET_EXCEEDED = "BUDGET-EXCEEDED"


@dataclass
class NoWitness:
    """The last failing leaf: ``transition`` has no t-child in ``direction``."""

    pair: tuple
    transition: str
    direction: str
    path: list  # (pair, rule) from the root down to the failing leaf's parent

    def __str__(self):
        r, s = self.pair
        return (f"leaf ({r}, {s}) is not ≃_1: no imitation of {self.transition} "
                f"in direction {self.direction}")


@dataclass
class Stats:
    nodes: int = 0
    expands: int = 0
    reduces: int = 0
    backtracks: int = 0
    rounds: int = 0  # deepening rounds run


@dataclass
class Verdict:
    outcome: Outcome
    certificate: Optional[Certificate] = None
    witness: Optional[NoWitness] = None
    stats: Stats = field(default_factory=Stats)

    @property
    def yes(self) -> bool:
        return self.outcome is Outcome.YES


# --- rules -------------------------------------------------------------------

def _cardlex_le(a: Multiset, b: Multiset) -> bool:
    return a.sort_key() <= b.sort_key()


def reduce_applicable(path, leaf, mode: str = LITERAL) -> Optional[tuple]:
    """Deepest ancestor pair (index, pair) on ``path`` that is <= ``leaf``.

    ``path`` lists the ancestor pairs from the root down, excluding the leaf.
    In symmetric mode an ancestor may also match with its sides swapped; the
    returned pair is then the swapped one (the stored orientation wins ties).
    """
    lr, ls = leaf[0].vec, leaf[1].vec
    symmetric = mode == SYMMETRIC
    for i in range(len(path) - 1, -1, -1):
        a, b = path[i]
        av, bv = a.vec, b.vec
        if av == bv:
            continue
        if all(map(le, av, lr)) and all(map(le, bv, ls)):
            return i, path[i]
        if symmetric and all(map(le, bv, lr)) and all(map(le, av, ls)):
            return i, (b, a)
    return None


def apply_reduce(leaf, ancestor):
    r, s = leaf
    r1, s1 = ancestor
    if r1 == s1 or not pair_leq(ancestor, leaf):
        raise ValueError("REDUCE needs a non-identity ancestor below the leaf")
    if _cardlex_le(r1, s1):
        return r, add(subtract(s, s1), r1)
    return add(subtract(r, r1), s1), s


@dataclass
class Slot:
    t: Transition
    direction: str
    candidates: list  # TChild entries, ⊑-ascending by r'+s'


@dataclass
class ExpandResult:
    failure: Optional[tuple] = None  # (transition, direction)
    slots: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.failure is not None

    def selections(self) -> Iterator[tuple]:
        """Every choice of one candidate per slot (the nondeterministic EXPAND)."""
        return itertools.product(*(s.candidates for s in self.slots))


def _oriented(net, r, s, t, direction):
    if direction == LR:
        return t_children(net, r, s, t)
    return t_children(net, s, r, t)


def expand_selections(net: LabeledPetriNet, pair) -> ExpandResult:
    r, s = pair
    if r == s:
        raise ValueError("EXPAND applies to non-identity pairs only")
    slots = []
    for t in net.transitions:
        for direction in (LR, RL):
            kids = _oriented(net, r, s, t, direction)
            if not kids:
                return ExpandResult(failure=(t, direction))
            kids.sort(key=lambda c: add(c.r, c.s).sort_key())
            slots.append(Slot(t, direction, kids))
    return ExpandResult(slots=slots)


# --- search ------------------------------------------------------------------

class _BudgetExceeded(Exception):
    pass


class Decider:
    """Reusable decider for one net.

    Caches only path-independent facts: completed top-level verdicts, and
    non-equivalence lemmas.  A lemma of level k for (r, s) records that some
    slot of its EXPAND has every candidate child already known to fail
    level k-1 (level 1: some slot has no candidate at all), so r and s are
    not equivalent at level k.  Such a pair can never occur in the
    all-equivalent computation that witnesses a YES, hence candidates with
    a lemma are skipped without changing the answer.

    The search runs in rounds with a growing bound on the number of EXPAND
    nodes per branch, so shallow (small) trees are found first.  A branch
    cut by the bound only fails for that round; NO is reported from a round
    in which nothing was cut, which the finiteness of every computation
    guarantees to happen eventually.
    """

    def __init__(self, net: LabeledPetriNet, reduce_mode: str = SYMMETRIC):
        if reduce_mode not in (LITERAL, SYMMETRIC):
            raise ValueError(f"unknown reduce mode {reduce_mode!r}")
        self.net = net
        self.reduce_mode = reduce_mode
        self.net_hash = net.fingerprint()
        self._lemma: dict = {}  # pair -> (level, transition, direction, failed candidate pairs)
        self._expanded: dict = {}  # pair -> ExpandResult
        self._top: dict = {}

    def decide(self, r0: Multiset, s0: Multiset, budget: Optional[int] = None) -> Verdict:
        for m in (r0, s0):
            if m.universe != self.net.places:
                raise ValueError("resource is not over the net's places")
        key = (r0, s0)
        if key in self._top:
            return self._top[key]
        self._stats = Stats()
        self._budget = budget
        self._witness = None
        self._path: list = []
        self._rules: list = []
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            for bound in itertools.count(1):
                self._stats.rounds += 1
                self._bound, self._cut, self._depth = bound, False, 0
                root = self._solve(r0, s0)
                if root is not None or not self._cut:
                    break
        except _BudgetExceeded:
            return Verdict(Outcome.BUDGET_EXCEEDED, stats=self._stats)
        finally:
            sys.setrecursionlimit(limit)
        if root is None:
            verdict = Verdict(Outcome.NO, witness=self._witness, stats=self._stats)
        else:
            cert = Certificate(self.net_hash, (r0, s0), root, self.reduce_mode)
            verdict = Verdict(Outcome.YES, certificate=cert, stats=self._stats)
        self._top[key] = verdict
        return verdict

    def lemma_level(self, r: Multiset, s: Multiset) -> Optional[int]:
        """Level k at which (r, s) is known to be inequivalent, if any."""
        hit = self._lemma.get((r, s))
        return hit[0] if hit else None

    def _count(self):
        self._stats.nodes += 1
        if self._budget is not None and self._stats.nodes > self._budget:
            raise _BudgetExceeded

    def _expand(self, pair) -> ExpandResult:
        ex = self._expanded.get(pair)
        if ex is None:
            ex = self._expanded[pair] = expand_selections(self.net, pair)
            if ex.failed:
                t, direction = ex.failure
                self._lemma[pair] = (1, t, direction, ())
        return ex

    def _refuted(self, pair) -> bool:
        """Known inequivalent; computes the level-1 test on first sight."""
        if pair[0] == pair[1]:
            return False
        if pair not in self._lemma:
            self._expand(pair)
        return pair in self._lemma

    def _fail_by_lemma(self, pair):
        # follow the lemma chain down to a pair with an empty t-child set
        trail = []
        while True:
            level, t, direction, cands = self._lemma[pair]
            if level == 1:
                break
            trail.append((pair, EXPAND))
            pair = min(cands, key=lambda c: self._lemma[c][0])
        path = list(zip(self._path, self._rules)) + trail
        self._witness = NoWitness(pair, t.name, direction, path)

    def _solve(self, r, s):
        self._count()
        if r == s:
            return TableauNode(r, s, IDENTITY)
        pair = (r, s)
        if pair in self._lemma:
            self._fail_by_lemma(pair)
            return None
        hit = reduce_applicable(self._path, pair, self.reduce_mode)
        if hit is not None:
            depth, anc = hit
            rb, sb = apply_reduce(pair, anc)
            assert add(rb, sb).sort_key() < add(r, s).sort_key(), "REDUCE must descend in ⊑"
            self._stats.reduces += 1
            self._push(pair, REDUCE)
            try:
                child = self._solve(rb, sb)
            finally:
                self._pop()
            if child is None:
                return None
            return TableauNode(r, s, REDUCE, ancestor_depth=depth,
                               mirrored=anc != self._path[depth], children=[child])

        ex = self._expand(pair)
        if ex.failed:
            self._fail_by_lemma(pair)
            return None
        # one-step lookahead: a slot whose candidates are all refuted refutes the pair
        plan = []
        for slot in ex.slots:
            viable = [c for c in slot.candidates if not self._refuted((c.r, c.s))]
            if not viable:
                cands = tuple((c.r, c.s) for c in slot.candidates)
                level = 1 + max(self._lemma[c][0] for c in cands)
                self._lemma[pair] = (level, slot.t, slot.direction, cands)
                self._fail_by_lemma(pair)
                return None
            viable.sort(key=lambda c: self._closure_rank(pair, c))
            plan.append((slot, viable))
        plan.sort(key=lambda sv: len(sv[1]))

        if self._depth >= self._bound:
            self._cut = True
            return None
        self._stats.expands += 1
        node = TableauNode(r, s, EXPAND)
        solved: dict = {}  # child pair -> index into node.children, or None
        chosen = {}
        self._push(pair, EXPAND)
        try:
            for slot, viable in plan:
                for cand in viable:
                    ckey = (cand.r, cand.s)
                    if ckey not in solved:
                        sub = self._solve(cand.r, cand.s)
                        if sub is None:
                            solved[ckey] = None
                        else:
                            node.children.append(sub)
                            solved[ckey] = len(node.children) - 1
                    idx = solved[ckey]
                    if idx is not None:
                        chosen[(slot.t.name, slot.direction)] = Selection(
                            slot.t.name, cand.u.name, slot.direction, idx)
                        break
                    self._stats.backtracks += 1
                else:
                    return None
        finally:
            self._pop()
        # record selections in net order regardless of the search order
        node.selections = [chosen[(s.t.name, s.direction)] for s in ex.slots]
        return node

    def _closure_rank(self, pair, cand):
        """Order candidates by where their chain of REDUCE steps would end.

        Candidates that reduce all the way to an identity pair come first,
        the rest follow by the ⊑-size of the pair the chain stops at.
        """
        path = self._path + [pair]
        p = (cand.r, cand.s)
        while p[0] != p[1]:
            hit = reduce_applicable(path, p, self.reduce_mode)
            if hit is None:
                break
            path.append(p)
            p = apply_reduce(p, hit[1])
        return p[0] != p[1], add(p[0], p[1]).sort_key()

    def _push(self, pair, rule):
        self._path.append(pair)
        self._rules.append(rule)
        if rule == EXPAND:
            self._depth += 1

    def _pop(self):
        self._path.pop()
        if self._rules.pop() == EXPAND:
            self._depth -= 1


_deciders: "weakref.WeakKeyDictionary[LabeledPetriNet, dict]" = weakref.WeakKeyDictionary()


def decide(net: LabeledPetriNet, r0: Multiset, s0: Multiset, budget: Optional[int] = None,
           reduce_mode: str = SYMMETRIC) -> Verdict:
    """Decide r0 ≃ s0.  Without a budget this always terminates."""
    per_mode = _deciders.setdefault(net, {})
    d = per_mode.get(reduce_mode)
    if d is None:
        d = per_mode[reduce_mode] = Decider(net, reduce_mode)
    return d.decide(r0, s0, budget)


# --- serialization -----------------------------------------------------------

def _node_to_dict(node: TableauNode) -> dict:
    doc = {"pair": [format_resource(node.r), format_resource(node.s)], "rule": node.rule}
    if node.rule == REDUCE:
        doc["ancestor_depth"] = node.ancestor_depth
        if node.mirrored:
            doc["mirrored"] = True
        doc["child"] = _node_to_dict(node.children[0])
    elif node.rule == EXPAND:
        rendered = [_node_to_dict(c) for c in node.children]
        doc["children"] = [
            {"t": sel.t, "u": sel.u, "direction": sel.direction, "node": rendered[sel.child]}
            for sel in node.selections
        ]
    return doc


def _parse_pair(net, raw, where, memo=None):
    if not isinstance(raw, list) or len(raw) != 2 or not all(isinstance(x, str) for x in raw):
        raise CertificateFormatError(f"{where}: pair must be two resource strings")
    memo = {} if memo is None else memo
    out = []
    for text in raw:
        m = memo.get(text)
        if m is None:
            try:
                m = memo[text] = parse_resource(net.places, text)
            except ResourceSyntaxError as exc:
                raise CertificateFormatError(f"{where}: {exc}") from None
        out.append(m)
    return tuple(out)


def _node_from_dict(net, doc, where, memo) -> TableauNode:
    if not isinstance(doc, dict):
        raise CertificateFormatError(f"{where}: node must be an object")
    r, s = _parse_pair(net, doc.get("pair"), where, memo)
    rule = doc.get("rule")
    if rule == IDENTITY:
        return TableauNode(r, s, IDENTITY)
    if rule == REDUCE:
        depth = doc.get("ancestor_depth")
        if not isinstance(depth, int) or isinstance(depth, bool) or "child" not in doc:
            raise CertificateFormatError(f"{where}: reduce needs ancestor_depth and child")
        mirrored = doc.get("mirrored", False)
        if not isinstance(mirrored, bool):
            raise CertificateFormatError(f"{where}: mirrored must be a boolean")
        child = _node_from_dict(net, doc["child"], f"{where}/reduce", memo)
        return TableauNode(r, s, REDUCE, ancestor_depth=depth, mirrored=mirrored, children=[child])
    if rule == EXPAND:
        entries = doc.get("children")
        if not isinstance(entries, list) or not entries:
            raise CertificateFormatError(f"{where}: expand needs a non-empty children list")
        node = TableauNode(r, s, EXPAND)
        for i, e in enumerate(entries):
            if not isinstance(e, dict) or not all(isinstance(e.get(k), str) for k in ("t", "u", "direction")):
                raise CertificateFormatError(f"{where}: malformed children[{i}]")
            sub = f"{where}/{e['t']}:{e['direction']}"
            node.children.append(_node_from_dict(net, e.get("node"), sub, memo))
            node.selections.append(Selection(e["t"], e["u"], e["direction"], i))
        return node
    raise CertificateFormatError(f"{where}: unknown rule {rule!r}")


def certificate_from_dict(net: LabeledPetriNet, doc) -> Certificate:
    if not isinstance(doc, dict):
        raise CertificateFormatError("certificate must be a JSON object")
    net_hash = doc.get("net_hash")
    if not isinstance(net_hash, str):
        raise CertificateFormatError("missing net_hash")
    query = _parse_pair(net, doc.get("query"), "query")
    mode = doc.get("reduce_mode", LITERAL)
    if mode not in (LITERAL, SYMMETRIC):
        raise CertificateFormatError(f"unknown reduce_mode {mode!r}")
    return Certificate(net_hash, query, _node_from_dict(net, doc, "root", {}), mode)


def certificate_from_json(net: LabeledPetriNet, text: str) -> Certificate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(f"invalid JSON: {exc}") from None
    return certificate_from_dict(net, doc)


# --- verification ------------------------------------------------------------

@dataclass
class Check:
    ok: bool
    message: str = "ok"
    node_path: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        return self.message if self.ok else f"{self.node_path}: {self.message}"


class _Reject(Exception):
    def __init__(self, where, message):
        self.where = where
        self.message = message


def verify_certificate(net: LabeledPetriNet, cert: Certificate, query=None) -> Check:
    """Independently check that ``cert`` is a successful tableau for its query.

    Besides the soundness conditions (identity leaves, dominated REDUCE
    ancestors, genuine t-children for every transition and direction), the
    tree must be one the algorithm could have built: REDUCE wherever it is
    applicable, citing the deepest dominated ancestor.  Mirrored ancestors
    are accepted only in a symmetric-mode certificate.
    """
    if cert.net_hash != net.fingerprint():
        return Check(False, "net_hash does not match the net", "root")
    if query is not None and tuple(query) != tuple(cert.query):
        return Check(False, "certificate answers a different query", "root")
    if cert.root.pair != tuple(cert.query):
        return Check(False, "root pair differs from the query", "root")
    try:
        _verify_node(net, cert.root, [], "root", cert.reduce_mode, {})
    except _Reject as rej:
        return Check(False, rej.message, rej.where)
    return Check(True)


def _verify_node(net, node: TableauNode, path: list, where: str, mode: str, kids: dict) -> None:
    r, s = node.pair
    if node.rule == IDENTITY:
        if r != s:
            raise _Reject(where, "identity leaf with distinct sides")
        if node.children:
            raise _Reject(where, "identity node has children")
        return
    if r == s:
        raise _Reject(where, f"{node.rule} applied to an identity pair")
    hit = reduce_applicable(path, node.pair, mode)
    if node.rule == REDUCE:
        d = node.ancestor_depth
        if len(node.children) != 1:
            raise _Reject(where, "reduce node must have exactly one child")
        if d is None or not 0 <= d < len(path):
            raise _Reject(where, f"ancestor_depth {d} is not above the node")
        anc = path[d]
        if node.mirrored:
            if mode != SYMMETRIC:
                raise _Reject(where, "mirrored ancestor in a literal-mode certificate")
            anc = (anc[1], anc[0])
        if anc[0] == anc[1] or not pair_leq(anc, node.pair):
            raise _Reject(where, f"ancestor at depth {d} does not dominate the node")
        if hit is None or hit != (d, anc):
            raise _Reject(where, f"ancestor at depth {d} is not the deepest dominated one")
        expected = apply_reduce(node.pair, anc)
        child = node.children[0]
        if child.pair != expected:
            raise _Reject(where, "reduce child differs from the rewritten pair")
        _verify_node(net, child, path + [node.pair], f"{where}/reduce", mode, kids)
        return
    if node.rule != EXPAND:
        raise _Reject(where, f"unknown rule {node.rule!r}")
    if hit is not None:
        raise _Reject(where, f"expand used although REDUCE applies (ancestor depth {hit[0]})")
    covered = set()
    for sel in node.selections:
        sub = f"{where}/{sel.t}:{sel.direction}"
        try:
            t, u = net.transition(sel.t), net.transition(sel.u)
        except KeyError as exc:
            raise _Reject(sub, f"unknown transition {exc}") from None
        if sel.direction not in (LR, RL):
            raise _Reject(sub, f"bad direction {sel.direction!r}")
        if (sel.t, sel.direction) in covered:
            raise _Reject(sub, "slot selected twice")
        covered.add((sel.t, sel.direction))
        if u.label != t.label:
            raise _Reject(sub, f"{sel.u} is labeled {u.label}, {sel.t} is labeled {t.label}")
        if not 0 <= sel.child < len(node.children):
            raise _Reject(sub, "selection refers to a missing child")
        child = node.children[sel.child]
        key = (r, s, sel.t, sel.direction)
        if key not in kids:  # t-children depend on the pair only, so share them across the tree
            kids[key] = _oriented(net, r, s, t, sel.direction)
        members = [(c.r, c.s) for c in kids[key] if c.u is u]
        if child.pair not in members:
            raise _Reject(sub, f"child ({child.r}, {child.s}) is not a {sel.t}-child via {sel.u}")
    missing = [(t.name, d) for t in net.transitions for d in (LR, RL) if (t.name, d) not in covered]
    if missing:
        t_name, d = missing[0]
        raise _Reject(where, f"no child recorded for {t_name} in direction {d}")
    verified = set()
    for sel in node.selections:
        if sel.child in verified:
            continue
        verified.add(sel.child)
        _verify_node(net, node.children[sel.child], path + [node.pair],
                     f"{where}/{sel.t}:{sel.direction}", mode, kids)


__all__ = [
    "LITERAL", "SYMMETRIC", "Certificate", "CertificateFormatError", "Check", "Decider", "ExpandResult", "NoWitness",
    "Outcome", "Selection", "Slot", "Stats", "TableauNode", "Verdict", "apply_reduce",
    "certificate_from_dict", "certificate_from_json", "decide", "expand_selections",
    "reduce_applicable", "verify_certificate",
]

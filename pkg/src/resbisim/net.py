"""Labeled Petri nets: model, firing rule, t-children, and the text format.

Net file format (line oriented, ``#`` starts a comment)::

    net buying
    place 10cent
    place Shop
    trans t1 label b pre 10cent:2,Shop:1 post Bought:1

``-`` or ``∅`` stands for an empty pre/post set.  Place declaration order
fixes the lexicographic index used by the cardinality-lexicographic order.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .multiset import (
    Multiset,
    ResourceSyntaxError,
    Universe,
    format_resource,
    leq,
    parse_resource,
    subtract,
    union,
)


class NetError(ValueError):
    """Invalid net description; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class NotEnabled(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Transition:
    name: str
    label: str
    pre: Multiset
    post: Multiset

    def __repr__(self):
        return f"Transition({self.name!r}, label={self.label!r}, pre={self.pre}, post={self.post})"


@dataclass(frozen=True)
class Firing:
    source: Multiset
    transition: Transition
    target: Multiset

    def __str__(self):
        return f"{self.source} -{self.transition.name}[{self.transition.label}]-> {self.target}"


class TChild(NamedTuple):
    """One t-child (r', s') of a pair, produced by the imitating transition u.

    ``context`` is the completion •t - r added to both sides before firing.
    """

    r: Multiset
    s: Multiset
    u: Transition
    context: Multiset


@dataclass(eq=False)
class LabeledPetriNet:
    places: Universe
    transitions: tuple
    name: str | None = None
    _by_name: dict = field(init=False, repr=False)
    _by_label: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.transitions = tuple(self.transitions)
        if len(self.places) == 0:
            raise NetError("no places declared")
        if not self.transitions:
            raise NetError("no transitions declared")
        self._by_name = {}
        self._by_label = {}
        for t in self.transitions:
            if t.name in self._by_name:
                raise NetError(f"duplicate transition name {t.name!r}")
            if not t.label:
                raise NetError(f"transition {t.name!r} has no label")
            if t.pre.universe != self.places or t.post.universe != self.places:
                raise NetError(f"transition {t.name!r} uses a foreign place set")
            self._by_name[t.name] = t
            self._by_label.setdefault(t.label, []).append(t)

    def transition(self, name: str) -> Transition:
        return self._by_name[name]

    def with_label(self, label: str) -> list:
        return self._by_label.get(label, [])

    def resource(self, text: str) -> Multiset:
        return parse_resource(self.places, text)

    def fingerprint(self) -> str:
        return hashlib.sha256(format_net(self).encode("utf-8")).hexdigest()


def enabled(net: LabeledPetriNet, m: Multiset) -> list:
    return [t for t in net.transitions if leq(t.pre, m)]


def fire(net: LabeledPetriNet, m: Multiset, t: Transition) -> Multiset:
    if not leq(t.pre, m):
        raise NotEnabled(f"{t.name} is not enabled in {m}")
    return Multiset(m.universe, tuple(x - p + q for x, p, q in zip(m.vec, t.pre.vec, t.post.vec)))


def firings(net: LabeledPetriNet, m: Multiset) -> list:
    return [Firing(m, t, fire(net, m, t)) for t in enabled(net, m)]


def resource_complete(r: Multiset, t: Transition) -> Multiset:
    """r + (•t - r), i.e. r ∪ •t: the least extension of r enabling t."""
    return union(r, t.pre)


def t_children(net: LabeledPetriNet, r: Multiset, s: Multiset, t: Transition) -> list:
    """All t-children of (r, s), one per equally labeled u enabled in s + (•t - r)."""
    context = subtract(t.pre, r)
    r_next = fire(net, r + context, t)
    s_full = s + context
    return [
        TChild(r_next, fire(net, s_full, u), u, context)
        for u in net.with_label(t.label)
        if leq(u.pre, s_full)
    ]


# --- text format -------------------------------------------------------------

_TRANS = re.compile(r"^trans\s+(\S+)\s+label\s+(\S+)\s+pre\s+(.*?)\s+post\s+(.*)$")


def parse_net(text: str) -> LabeledPetriNet:
    name = None
    place_names: list[str] = []
    place_lines: dict[str, int] = {}
    raw_trans = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword = line.split(None, 1)[0]
        if keyword == "net":
            parts = line.split()
            if len(parts) != 2:
                raise NetError("expected 'net <name>'", lineno)
            if name is not None:
                raise NetError("net name declared twice", lineno)
            name = parts[1]
        elif keyword == "place":
            parts = line.split()
            if len(parts) != 2:
                raise NetError("expected 'place <name>'", lineno)
            pname = parts[1]
            if pname in place_lines:
                raise NetError(f"duplicate place {pname!r}", lineno)
            if any(ch in pname for ch in ":,") or pname in ("-", "∅"):
                raise NetError(f"invalid place name {pname!r}", lineno)
            place_lines[pname] = lineno
            place_names.append(pname)
        elif keyword == "trans":
            m = _TRANS.match(line)
            if not m:
                if " label " not in f" {line} ":
                    raise NetError("transition is missing its label", lineno)
                raise NetError("expected 'trans <name> label <action> pre <res> post <res>'", lineno)
            raw_trans.append((lineno,) + m.groups())
        else:
            raise NetError(f"unknown directive {keyword!r}", lineno)

    if not place_names:
        raise NetError("no places declared")
    if not raw_trans:
        raise NetError("no transitions declared")
    universe = Universe(place_names)
    transitions = []
    seen = set()
    for lineno, tname, label, pre, post in raw_trans:
        if tname in seen:
            raise NetError(f"duplicate transition {tname!r}", lineno)
        seen.add(tname)
        try:
            pre_m = parse_resource(universe, pre)
            post_m = parse_resource(universe, post)
        except ResourceSyntaxError as exc:
            raise NetError(str(exc), lineno) from None
        transitions.append(Transition(tname, label, pre_m, post_m))
    return LabeledPetriNet(universe, transitions, name)


def load_net(path) -> LabeledPetriNet:
    with open(path, encoding="utf-8") as fh:
        return parse_net(fh.read())


def format_net(net: LabeledPetriNet) -> str:
    """Canonical text; parse_net(format_net(n)) reproduces n."""
    lines = []
    if net.name:
        lines.append(f"net {net.name}")
    lines.extend(f"place {p}" for p in net.places)
    for t in net.transitions:
        pre = format_resource(t.pre) if t.pre else "-"
        post = format_resource(t.post) if t.post else "-"
        lines.append(f"trans {t.name} label {t.label} pre {pre} post {post}")
    return "\n".join(lines) + "\n"

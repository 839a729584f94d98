"""Seeded random nets and resources for fuzzing."""
from __future__ import annotations

import random

from .multiset import Multiset, Universe
from .net import LabeledPetriNet, Transition

LABELS = "abc"


def random_multiset(rng: random.Random, universe: Universe, max_card: int) -> Multiset:
    size = rng.randint(0, max_card)
    vec = [0] * len(universe)
    for _ in range(size):
        vec[rng.randrange(len(universe))] += 1
    return universe.vector(vec)


def _random_weights(rng, n, max_weight, nonempty):
    while True:
        vec = [rng.randint(0, max_weight) if rng.random() < 0.5 else 0 for _ in range(n)]
        if any(vec) or not nonempty:
            return vec


def random_net(rng: random.Random, max_places: int = 3, max_transitions: int = 3,
               max_weight: int = 2, max_labels: int = 3, name: str = "random") -> LabeledPetriNet:
    n = rng.randint(1, max_places)
    universe = Universe([f"p{i}" for i in range(n)])
    labels = LABELS[: rng.randint(1, max_labels)]
    transitions = []
    for i in range(rng.randint(1, max_transitions)):
        pre = universe.vector(_random_weights(rng, n, max_weight, nonempty=rng.random() < 0.9))
        post = universe.vector(_random_weights(rng, n, max_weight, nonempty=False))
        transitions.append(Transition(f"t{i}", rng.choice(labels), pre, post))
    return LabeledPetriNet(universe, transitions, name)


def fuzz_corpus(seed: int, count: int, max_card: int = 3):
    """``count`` seeded (net, r, s) triples with |r|, |s| <= max_card, one per net."""
    rng = random.Random(seed)
    corpus = []
    for i in range(count):
        net = random_net(rng, name=f"fuzz{i}")
        r = random_multiset(rng, net.places, max_card)
        s = random_multiset(rng, net.places, max_card)
        corpus.append((net, r, s))
    return corpus

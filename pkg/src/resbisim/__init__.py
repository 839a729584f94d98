"""Resource bisimilarity for labeled Petri nets."""
from .multiset import Multiset, Universe, cardlex_cmp, pair_leq, parse_resource
from .net import LabeledPetriNet, Transition, fire, load_net, parse_net, t_children
from .strata import eqlev, refute_similarity, stratified_res, stratified_std
from .tableau import decide, verify_certificate

__all__ = [
    "LabeledPetriNet", "Multiset", "Transition", "Universe", "cardlex_cmp", "decide", "eqlev",
    "fire", "load_net", "pair_leq", "parse_net", "parse_resource", "refute_similarity",
    "stratified_res", "stratified_std", "t_children", "verify_certificate",
]

"""Hitting times of finite ergodic Markov chains from stationarity, and their
approximation by geometric sums of strong stationary times."""

from .chain_core import MarkovChain, is_reversible, restricted_stationary, stationary, validate_chain
from .dist import IntDist, geometric, geometric_compound, tv_distance

__version__ = "0.1.0"

__all__ = [
    "IntDist",
    "MarkovChain",
    "geometric",
    "geometric_compound",
    "is_reversible",
    "restricted_stationary",
    "stationary",
    "tv_distance",
    "validate_chain",
]

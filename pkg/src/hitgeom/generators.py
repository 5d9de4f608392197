"""Builtin chains used as fixtures and by the CLI."""

from __future__ import annotations

import numpy as np

from .chain_core import MarkovChain, validate_chain
from .errors import Periodic, ValidationError


def two_state(delta: float) -> MarkovChain:
    """P = [[1/2, 1/2], [1/2 - delta, 1/2 + delta]], 0 <= delta < 1/2."""
    if not (0.0 <= delta < 0.5):
        raise ValidationError(f"delta must lie in [0, 1/2), got {delta}")
    return validate_chain([[0.5, 0.5], [0.5 - delta, 0.5 + delta]])


def iid(pi) -> MarkovChain:
    """Every row equal to ``pi``: the chain forgets its state after one step."""
    pi = np.asarray(pi, dtype=float)
    return validate_chain(np.tile(pi, (len(pi), 1)))


def birth_death(size: int, up: float = 0.3, down: float = 0.2) -> MarkovChain:
    """Lazy birth-death chain on 0..size-1 with constant up/down rates."""
    if size < 2:
        raise ValidationError("birth-death chain needs at least 2 states")
    P = np.zeros((size, size))
    for k in range(size):
        if k + 1 < size:
            P[k, k + 1] = up
        if k > 0:
            P[k, k - 1] = down
        P[k, k] = 1.0 - P[k].sum()
    return validate_chain(P)


def random_ergodic(size: int, rng: np.random.Generator, max_tries: int = 1000) -> MarkovChain:
    """Chain with IID Dirichlet(1, ..., 1) rows, redrawn while periodic.

    Rows are renormalized with the last entry absorbing rounding so they sum
    to one within the validation tolerance.
    """
    if size < 2:
        raise ValidationError("random chain needs at least 2 states")
    for _ in range(max_tries):
        P = rng.dirichlet(np.ones(size), size=size)
        P[:, -1] = 1.0 - P[:, :-1].sum(axis=1)
        P = np.clip(P, 0.0, 1.0)
        try:
            return validate_chain(P)
        except (Periodic, ValidationError):
            continue
    raise ValidationError("could not draw an ergodic chain")

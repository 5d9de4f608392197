"""Finite ergodic Markov chains: validation, stationary laws, propagation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateMass,
    NotIrreducible,
    NotStochastic,
    Periodic,
    SingularSystem,
    ValidationError,
)

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Validated transition matrix with labels and its stationary law.

    Build instances with :func:`validate_chain`; the constructor itself does
    no checking.
    """

    states: tuple[str, ...]
    P: np.ndarray
    pi: np.ndarray

    @property
    def n(self) -> int:
        return len(self.states)

    def index(self, state: str | int) -> int:
        """Resolve a label (or an in-range integer index) to an index."""
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if 0 <= state < self.n:
                return int(state)
            raise ValidationError(f"state index {state} out of range 0..{self.n - 1}")
        try:
            return self.states.index(str(state))
        except ValueError:
            raise ValidationError(
                f"unknown state {state!r}; known states: {list(self.states)}"
            ) from None


def _check_irreducible(P: np.ndarray) -> None:
    adj = P > 0
    n = len(P)
    for graph in (adj, adj.T):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(graph[u] & ~seen):
                seen[v] = True
                queue.append(v)
        if not seen.all():
            missing = np.flatnonzero(~seen).tolist()
            raise NotIrreducible(f"states {missing} not mutually reachable with state 0")


def period(P: np.ndarray) -> int:
    """Period of an irreducible chain, by BFS levels from state 0."""
    adj = P > 0
    n = len(P)
    level = np.full(n, -1)
    level[0] = 0
    queue = deque([0])
    d = 0
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                d = gcd(d, int(level[u] + 1 - level[v]))
    return d


def stationary(P: np.ndarray) -> np.ndarray:
    """Stationary distribution by a dense LU solve of (P^T - I) pi = 0, sum(pi) = 1.

    One step of iterative refinement is applied; raises ``SingularSystem`` if
    the system cannot be solved or the residual stays above 1e-12.
    """
    P = np.asarray(P, dtype=float)
    n = len(P)
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        lu = scipy.linalg.lu_factor(A, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    with np.errstate(all="raise"):
        try:
            pi = scipy.linalg.lu_solve(lu, b)
            pi = pi + scipy.linalg.lu_solve(lu, b - A @ pi)
        except FloatingPointError as exc:
            raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(pi)):
        raise SingularSystem("non-finite stationary vector")
    pi = pi / pi.sum()
    resid = np.max(np.abs(pi @ P - pi))
    if resid > STATIONARY_TOL:
        raise SingularSystem(f"stationary residual {resid:.3e} exceeds {STATIONARY_TOL}")
    return pi


def validate_chain(matrix, labels: Sequence[str] | None = None) -> MarkovChain:
    """Check that ``matrix`` is an ergodic stochastic matrix and wrap it.

    Parameters
    ----------
    matrix : array_like, shape (n, n)
        Transition probabilities, rows summing to one.
    labels : sequence of str, optional
        State labels; defaults to ``"0", "1", ...``.

    Raises
    ------
    NotStochastic, NotIrreducible, Periodic
        When the standing assumptions fail.
    """
    try:
        P = np.array(matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NotStochastic(f"matrix is not numeric: {exc}") from exc
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError(f"transition matrix must be square, got shape {P.shape}")
    n = P.shape[0]
    if n < 2:
        raise ValidationError("need at least 2 states")
    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = tuple(str(s) for s in labels)
    if len(labels) != n:
        raise ValidationError(f"{len(labels)} labels for a {n}x{n} matrix")
    if len(set(labels)) != n:
        raise ValidationError("state labels must be distinct")
    if not np.all(np.isfinite(P)):
        raise NotStochastic("matrix has non-finite entries")
    if np.any(P < 0):
        k, l = np.argwhere(P < 0)[0]
        raise NotStochastic(f"negative entry P[{k},{l}] = {P[k, l]}")
    if np.any(P > 1):
        k, l = np.argwhere(P > 1)[0]
        raise NotStochastic(f"entry P[{k},{l}] = {P[k, l]} exceeds 1")
    dev = np.abs(P.sum(axis=1) - 1.0)
    if np.any(dev > ROW_SUM_TOL):
        k = int(np.argmax(dev))
        raise NotStochastic(f"row {k} sums to {P[k].sum()!r}")
    _check_irreducible(P)
    d = period(P)
    if d > 1:
        raise Periodic(f"chain has period {d}")
    return MarkovChain(states=labels, P=_frozen(P), pi=_frozen(stationary(P)))


def step_distribution(chain: MarkovChain, init, t: int) -> np.ndarray:
    """Return ``init @ P**t`` by repeated vector-matrix products."""
    if t < 0:
        raise ValidationError("t must be nonnegative")
    v = np.array(init, dtype=float)
    for _ in range(t):
        v = v @ chain.P
    return v


def iter_distributions(chain: MarkovChain, init):
    """Yield ``init @ P**t`` for t = 0, 1, 2, ... (endless)."""
    v = np.array(init, dtype=float)
    while True:
        yield v
        v = v @ chain.P


def iter_deviations(chain: MarkovChain, init):
    """Yield ``init @ P**t - pi`` for t = 0, 1, ..., propagated directly.

    Since pi P = pi the deviation evolves as ``(init - pi) @ P**t``; iterating
    it avoids the cancellation of forming ``init @ P**t`` and subtracting pi
    once the chain is close to stationarity. Rounding drift along pi (the
    one direction that does not decay) is projected out at every step.
    """
    d = np.array(init, dtype=float) - chain.pi
    while True:
        yield d
        d = d @ chain.P
        d -= d.sum() * chain.pi


def point_mass(chain: MarkovChain, state) -> np.ndarray:
    v = np.zeros(chain.n)
    v[chain.index(state)] = 1.0
    return v


def restricted_stationary(chain: MarkovChain, j) -> np.ndarray:
    """Stationary law conditioned to avoid state ``j``."""
    j = chain.index(j)
    rest = 1.0 - chain.pi[j]
    if rest < 1e-12:
        raise DegenerateMass(f"1 - pi[{j}] = {rest:.3e}")
    v = chain.pi / rest
    v[j] = 0.0
    return v


def is_reversible(chain: MarkovChain, tol: float = 1e-12) -> bool:
    """Detailed balance check: max |pi_k P(k,l) - pi_l P(l,k)| <= tol."""
    flow = chain.pi[:, None] * chain.P
    return bool(np.max(np.abs(flow - flow.T)) <= tol)


def permute(chain: MarkovChain, perm: Sequence[int]) -> MarkovChain:
    """Relabel states so that new state ``i`` is old state ``perm[i]``."""
    perm = list(perm)
    P = np.asarray(chain.P)[np.ix_(perm, perm)]
    return validate_chain(P, [chain.states[i] for i in perm])

"""Greedy construction of the dual-chain row out of S_j = S - {j}.

The dual chain lives on nonempty subsets of S, starts at S_j and is absorbed
at S. Only its row out of S_j is built; every other set is sent straight to
S, so the absorption time depends on three numbers: the mass to S, the mass
back to S_j and the mass to any other set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chain_core import MarkovChain, restricted_stationary
from .dist import DEFAULT_TAIL_EPS, MAX_SUPPORT, IntDist
from .errors import DegenerateStay, NegativeQ, NonTermination, TruncationCap
from .sst import Provenance, SstResult

POSITIVE_TOL = 1e-14
MEMBERSHIP_TOL = 1e-12
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GreedyDual:
    j: int
    n: int
    c: tuple[float, ...]
    A: tuple[frozenset[int], ...]
    p_absorb: float
    p_stay: float
    p_other: float
    dual_row: dict[frozenset[int], float]

    @property
    def z(self) -> int:
        return len(self.c)


class Regime(enum.Enum):
    UNIQUE_MIN_AT_J = "unique-min-at-j"
    MIN_ELSEWHERE = "min-elsewhere"
    DEGENERATE = "degenerate"


class GreedyClass(NamedTuple):
    regime: Regime
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    argmin: tuple[int, ...] = ()


def greedy_dual_row(chain: MarkovChain, j) -> GreedyDual:
    """Run the greedy recursion for the dual row out of S_j.

    Starting from ``Q_0(l) = (pi_l - pi_j P(j,l)) / (1 - pi_j)`` and ``A_0 = S``,
    each step takes ``c_r`` as the smallest ratio ``Q(l) / pi_l`` over the
    states of the current set with positive ``Q``, keeps the states reaching
    that ratio in ``A_r`` and removes ``c_r pi`` from them. The dual row puts
    mass ``c_r * pi(A_r)`` on ``A_r``.
    """
    j = chain.index(j)
    pi = np.asarray(chain.pi)
    n = chain.n
    Q = (pi - pi[j] * np.asarray(chain.P)[j]) / (1.0 - pi[j])
    if np.any(Q < -1e-10):
        raise NegativeQ(f"Q_0 has entry {Q.min():.3e}")
    current = np.ones(n, dtype=bool)
    cs: list[float] = []
    sets: list[frozenset[int]] = []
    while True:
        live = current & (Q > POSITIVE_TOL)
        if not live.any():
            break
        if len(cs) > n + 2:
            raise NonTermination(f"greedy recursion exceeded {n + 2} steps")
        ratio = np.where(live, Q / pi, np.inf)
        c = float(ratio.min())
        current = live & (ratio >= c - MEMBERSHIP_TOL)
        Q = np.where(current, Q - c * pi, Q)
        if np.any(Q[current] < -1e-10):
            raise NegativeQ(f"Q_{len(cs) + 1} has entry {Q[current].min():.3e}")
        cs.append(c)
        sets.append(frozenset(np.flatnonzero(current).tolist()))
    full = frozenset(range(n))
    rest = full - {j}
    row: dict[frozenset[int], float] = {}
    for c, A in zip(cs, sets):
        row[A] = row.get(A, 0.0) + c * float(pi[sorted(A)].sum())
    p_absorb = row.get(full, 0.0)
    p_stay = row.get(rest, 0.0)
    p_other = float(sum(p for A, p in row.items() if A not in (full, rest)))
    if abs(p_absorb + p_stay + p_other - 1.0) > 1e-12:
        raise NegativeQ(f"dual row sums to {p_absorb + p_stay + p_other!r}")
    return GreedyDual(j, n, tuple(cs), tuple(sets), p_absorb, p_stay, p_other, row)


def dual_sst_dist(gd: GreedyDual, eps: float = DEFAULT_TAIL_EPS) -> SstResult:
    """Absorption-time law of the dual chain started at S_j.

    ``P(T = 1) = p_absorb`` and
    ``P(T = t) = p_stay**(t-2) * (p_stay * p_absorb + p_other)`` for t >= 2.
    """
    a, s, o = gd.p_absorb, gd.p_stay, gd.p_other
    if s >= 1.0 - DEGENERACY_TOL:
        raise DegenerateStay("dual chain never leaves S_j")
    pmf = [0.0, a]
    tail = 1.0 - a
    t = 2
    while tail > eps:
        f = s ** (t - 2) * (s * a + o)
        pmf.append(f)
        # surviving mass after t steps is s**(t-1) * (1 - a), computed directly
        tail = s ** (t - 1) * (1.0 - a)
        t += 1
        if t > MAX_SUPPORT:
            raise TruncationCap("dual absorption time support too large")
    return SstResult(
        IntDist(np.array(pmf), max(tail, 0.0)),
        Provenance.GREEDY_DUAL,
        f"pi^({gd.j})",
    )


def dual_sst_mean(gd: GreedyDual) -> float:
    """E T = 1 + (1 - p_absorb) / (1 - p_stay)."""
    if gd.p_stay >= 1.0 - DEGENERACY_TOL:
        raise DegenerateStay("dual chain never leaves S_j")
    return 1.0 + (1.0 - gd.p_absorb) / (1.0 - gd.p_stay)


def classify_greedy_case(chain: MarkovChain, j, gd: GreedyDual | None = None) -> GreedyClass:
    """Sort (chain, j) into the two worked regimes of the greedy construction.

    With ``m_l = (pi_l - pi_j P(j,l)) / pi_l``: degenerate if some numerator
    vanishes, otherwise the minimum of ``m`` is either unique at ``j`` or
    attained at some other state.
    """
    j = chain.index(j)
    pi = np.asarray(chain.pi)
    num = pi - pi[j] * np.asarray(chain.P)[j]
    if gd is None:
        gd = greedy_dual_row(chain, j)
    if np.any(np.abs(num) <= DEGENERACY_TOL):
        return GreedyClass(Regime.DEGENERATE)
    m = num / pi
    lo = m.min()
    argmin = tuple(np.flatnonzero(m <= lo + MEMBERSHIP_TOL).tolist())
    if argmin == (j,):
        alpha = (1.0 - chain.P[j, j]) / (1.0 - pi[j])
        beta = (1.0 - pi[j]) * gd.c[1] if gd.z >= 2 else 0.0
        return GreedyClass(Regime.UNIQUE_MIN_AT_J, alpha=float(alpha), beta=float(beta), argmin=argmin)
    return GreedyClass(Regime.MIN_ELSEWHERE, gamma=gd.p_absorb, argmin=argmin)


class Intertwining(NamedTuple):
    row_residual: float  # max_l |(Lambda P)(S_j, l) - (P* Lambda)(S_j, l)|
    init_residual: float  # max_l |pi^(j)_l - (nu Lambda)_l|


def intertwining_residual(chain: MarkovChain, gd: GreedyDual) -> Intertwining:
    """Residuals of the intertwining relations on the S_j row.

    Lambda has row pi^(j) at S_j and row pi at every other set, and
    nu = delta_{S_j}. The row residual vanishes exactly when no dual mass goes
    to a set other than S and S_j.
    """
    pi = np.asarray(chain.pi)
    lam_sj = restricted_stationary(chain, gd.j)
    lhs = lam_sj @ np.asarray(chain.P)
    rhs = (1.0 - gd.p_stay) * pi + gd.p_stay * lam_sj
    return Intertwining(float(np.max(np.abs(lhs - rhs))), 0.0)

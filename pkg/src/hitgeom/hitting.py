"""Hitting time of a single state for the chain started from stationarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain_core import MarkovChain, iter_deviations, restricted_stationary
from .dist import DEFAULT_TAIL_EPS, MAX_SUPPORT, IntDist, from_survival, mean
from .errors import KacMismatch, TruncationCap

KAC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HittingResult:
    """Law of W_j (X_0 ~ pi) and of (W_j | W_j > 0), with both mean routes."""

    j: int
    dist: IntDist
    conditional_dist: IntDist
    mean_direct: float
    mean_kac: float


def first_passage_from_restricted(
    chain: MarkovChain, j, eps: float = DEFAULT_TAIL_EPS, cap: int = MAX_SUPPORT
) -> IntDist:
    """First-passage law to ``j`` from pi^(j), via the substochastic block on S - {j}."""
    j = chain.index(j)
    keep = np.arange(chain.n) != j
    Q = np.asarray(chain.P)[np.ix_(keep, keep)]
    v = restricted_stationary(chain, j)[keep]
    surv = [1.0]
    while surv[-1] > eps:
        v = v @ Q
        surv.append(float(v.sum()))
        if len(surv) > cap:
            raise TruncationCap(f"first-passage survival {surv[-1]:.3e} after {cap} steps")
    return from_survival(surv)


def hitting_time_dist(chain: MarkovChain, j, eps: float = DEFAULT_TAIL_EPS) -> HittingResult:
    """Exact law of W_j = inf{t >= 0 : X_t = j} with X_0 ~ pi.

    W_j is 0 with probability pi_j and otherwise distributed as the first
    passage time from pi^(j). The mean is computed from this law and, as a
    cross-check, from the return-probability series; a disagreement beyond
    1e-8 raises ``KacMismatch``.
    """
    j = chain.index(j)
    pij = float(chain.pi[j])
    cond = first_passage_from_restricted(chain, j, eps)
    pmf = (1.0 - pij) * cond.pmf
    pmf[0] = pij
    dist = IntDist(pmf, (1.0 - pij) * cond.tail_bound)
    m_direct = mean(dist)
    m_kac = expected_hitting_kac(chain, j, eps)
    if abs(m_direct - m_kac) > KAC_TOL * max(1.0, m_kac):
        raise KacMismatch(
            f"E W_{chain.states[j]}: direct {m_direct!r} vs return-probability series {m_kac!r}"
        )
    return HittingResult(j, dist, cond, m_direct, m_kac)


def expected_hitting_kac(chain: MarkovChain, j, eps: float = DEFAULT_TAIL_EPS) -> float:
    """E W_j = (1/pi_j) sum_t [P^t(j,j) - pi_j].

    Summation stops once two consecutive terms fall below ``1e-3 * eps * pi_j``
    (three decades past the law's own truncation, since oscillating terms
    make the geometric extrapolation of the remainder crude); the remainder
    is then extrapolated from the last two terms when they decay monotonically.
    """
    j = chain.index(j)
    pij = float(chain.pi[j])
    floor = 1e-3 * eps * pij
    e = np.zeros(chain.n)
    e[j] = 1.0
    total = 0.0
    prev = None
    small = 0
    for t, d in enumerate(iter_deviations(chain, e)):
        term = float(d[j])
        total += term
        small = small + 1 if abs(term) < floor else 0
        if small >= 2:
            if prev is not None and prev != 0.0:
                r = term / prev
                if 0.0 < r < 1.0:
                    total += term * r / (1.0 - r)
            break
        prev = term
        if t > MAX_SUPPORT:
            raise TruncationCap(f"return-probability series not converged after {t} terms")
    return total / pij


def average_hitting_time(chain: MarkovChain, eps: float = DEFAULT_TAIL_EPS) -> float:
    """sum_j pi_j E W_j."""
    return float(sum(chain.pi[j] * expected_hitting_kac(chain, j, eps) for j in range(chain.n)))


def mean_hitting_linear(chain: MarkovChain, j) -> float:
    """E W_j from the first-step linear system (independent of the series routes)."""
    j = chain.index(j)
    n = chain.n
    A = np.eye(n) - np.asarray(chain.P)
    A[j, :] = 0.0
    A[j, j] = 1.0
    b = np.ones(n)
    b[j] = 0.0
    m = np.linalg.solve(A, b)
    return float(chain.pi @ m)


def mgf_hitting(chain: MarkovChain, j, theta: float) -> float:
    """E exp(theta W_j) for X_0 ~ pi, by a linear solve.

    ``pi_j + (1 - pi_j) e^theta v (I - e^theta Q)^{-1} r`` with Q the block of P
    on S - {j}, r the one-step probabilities into j and v = pi^(j) on S - {j}.
    Returns ``inf`` when e^theta times the spectral radius of Q reaches 1.
    """
    j = chain.index(j)
    keep = np.arange(chain.n) != j
    P = np.asarray(chain.P)
    Q = P[np.ix_(keep, keep)]
    r = P[keep, j]
    v = restricted_stationary(chain, j)[keep]
    z = np.exp(theta)
    if z * np.max(np.abs(np.linalg.eigvals(Q))) >= 1.0:
        return float("inf")
    g = z * v @ np.linalg.solve(np.eye(len(Q)) - z * Q, r)
    pij = float(chain.pi[j])
    return pij + (1.0 - pij) * float(g)

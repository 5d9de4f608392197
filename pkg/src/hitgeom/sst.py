"""Separation and strong stationary time (SST) laws.

Only distributions are computed here. The fastest SST is obtained from its
survival function, which equals the separation from stationarity. When state
``j`` satisfies the ratio condition checked by :func:`check_lemma_condition`,
the same law can be read off the return probabilities ``P^t(j, j)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .chain_core import MarkovChain, iter_deviations, restricted_stationary
from .dist import DEFAULT_TAIL_EPS, MAX_SUPPORT, IntDist, from_survival, survival
from .errors import (
    LemmaConditionFailed,
    NegativeSurvival,
    NonMonotoneSeparation,
    NotDecreasing,
    TruncationCap,
)

CONDITION_TOL = 1e-10
MONOTONE_TOL = 1e-12
HORIZON_CAP = 10**5


class Provenance(enum.Enum):
    SEPARATION_FASTEST = "separation-fastest"
    RETURN_PROBABILITY = "return-probability"
    GREEDY_DUAL = "greedy-dual"


@dataclass(frozen=True, eq=False)
class SstResult:
    dist: IntDist | None
    provenance: Provenance
    init_desc: str
    # validity problems found when building with force=True
    issues: tuple[str, ...] = ()
    survival: np.ndarray | None = field(default=None, repr=False)

    @property
    def valid(self) -> bool:
        return self.dist is not None and not self.issues


class LemmaCheck(NamedTuple):
    holds: bool
    horizon: int
    horizon_capped: bool
    first_violation: tuple[int, int] | None  # (t, y)
    worst_excess: float  # max over t, y of lhs - rhs


class NoHitCheck(NamedTuple):
    holds: bool
    horizon: int
    max_discrepancy: float


def separation(chain: MarkovChain, init, t: int) -> float:
    """1 - min_s P(X_t = s) / pi_s, clamped to [0, 1]."""
    for k, d in enumerate(iter_deviations(chain, init)):
        if k == t:
            return _sep(d, chain.pi)


def _sep(dev: np.ndarray, pi: np.ndarray) -> float:
    # 1 - min (pi + dev) / pi, from the deviation to keep small values accurate
    return float(min(1.0, max(0.0, np.max(-dev / pi))))


def separation_curve(chain: MarkovChain, init, horizon: int) -> np.ndarray:
    """s(0), ..., s(horizon)."""
    out = np.empty(horizon + 1)
    for t, d in enumerate(iter_deviations(chain, init)):
        if t > horizon:
            break
        out[t] = _sep(d, chain.pi)
    return out


def fastest_sst(
    chain: MarkovChain,
    init,
    eps: float = DEFAULT_TAIL_EPS,
    init_desc: str = "custom",
    cap: int = MAX_SUPPORT,
) -> SstResult:
    """Law of a fastest SST from ``init``: P(T > t) = s(t).

    The support is extended until s(t) <= eps; s(t) at the last step becomes
    the tail bound.
    """
    surv = []
    prev = 1.0
    for t, d in enumerate(iter_deviations(chain, init)):
        s = _sep(d, chain.pi)
        if s > prev + MONOTONE_TOL:
            raise NonMonotoneSeparation(f"s({t}) = {s!r} > s({t - 1}) = {prev!r}")
        s = min(s, prev)
        surv.append(s)
        prev = s
        if s <= eps:
            break
        if t >= cap:
            raise TruncationCap(f"separation still {s:.3e} at t = {t}")
    return SstResult(
        from_survival(surv),
        Provenance.SEPARATION_FASTEST,
        init_desc,
        survival=np.array(surv),
    )


def fastest_sst_from_restricted(chain: MarkovChain, j, eps: float = DEFAULT_TAIL_EPS) -> SstResult:
    j = chain.index(j)
    return fastest_sst(
        chain, restricted_stationary(chain, j), eps, init_desc=f"pi^({chain.states[j]})"
    )


def fastest_sst_from_state(chain: MarkovChain, l, eps: float = DEFAULT_TAIL_EPS) -> SstResult:
    l = chain.index(l)
    init = np.zeros(chain.n)
    init[l] = 1.0
    return fastest_sst(chain, init, eps, init_desc=f"delta_{chain.states[l]}")


def default_horizon(chain: MarkovChain, j, eps: float = DEFAULT_TAIL_EPS) -> tuple[int, bool]:
    """Ten times the support length of the fastest SST from pi^(j), capped."""
    support = fastest_sst_from_restricted(chain, j, eps).dist.n_max + 1
    h = 10 * support
    return min(h, HORIZON_CAP), h > HORIZON_CAP


def check_lemma_condition(
    chain: MarkovChain, j, horizon: int | None = None, tol: float = CONDITION_TOL
) -> LemmaCheck:
    """Check pi_y P(X_t = j) <= pi_j P(X_t = y) + tol for X_0 ~ pi^(j).

    Checked for all y and t = 0..horizon; the condition is stated for all t,
    so the horizon actually used is reported.
    """
    j = chain.index(j)
    capped = False
    if horizon is None:
        horizon, capped = default_horizon(chain, j)
    pi = chain.pi
    first = None
    worst = -np.inf
    for t, d in enumerate(iter_deviations(chain, restricted_stationary(chain, j))):
        if t > horizon:
            break
        # pi_y P(X_t=j) - pi_j P(X_t=y), with the pi_y pi_j terms cancelled
        excess = pi * d[j] - pi[j] * d
        y = int(np.argmax(excess))
        worst = max(worst, float(excess[y]))
        if first is None and excess[y] > tol:
            first = (t, y)
    return LemmaCheck(first is None, horizon, capped, first, worst)


def return_prob_survival(chain: MarkovChain, j, eps: float = DEFAULT_TAIL_EPS, horizon=None):
    """(P^t(j,j) - pi_j) / (1 - pi_j) for t = 0, 1, ... until below eps (or horizon)."""
    j = chain.index(j)
    pij = chain.pi[j]
    e = np.zeros(chain.n)
    e[j] = 1.0
    out = []
    for t, d in enumerate(iter_deviations(chain, e)):
        s = d[j] / (1.0 - pij)
        out.append(s)
        if horizon is not None:
            if t >= horizon:
                break
        elif abs(s) <= eps:
            break
        if t >= MAX_SUPPORT:
            raise TruncationCap(f"return-probability survival still {s:.3e} at t = {t}")
    return np.array(out)


def sst_from_return_probs(
    chain: MarkovChain,
    j,
    eps: float = DEFAULT_TAIL_EPS,
    force: bool = False,
    horizon: int | None = None,
    tol: float = CONDITION_TOL,
) -> SstResult:
    """SST law with survival (P^t(j,j) - pi_j) / (1 - pi_j).

    This is a fastest SST from pi^(j) when the ratio condition holds, which
    is checked first unless ``force`` is set. With ``force`` the sequence is
    built regardless and validity problems are returned in ``issues``
    (``dist`` is None if the sequence is not a survival function). A rise of
    P^t(j,j) above 1e-12, or a dip below pi_j - 1e-12, is a failure even when
    the condition passed within ``tol``.
    """
    j = chain.index(j)
    if not force:
        check = check_lemma_condition(chain, j, horizon, tol)
        if not check.holds:
            t, y = check.first_violation
            raise LemmaConditionFailed(
                f"ratio condition fails for j={chain.states[j]} at t={t}, y={chain.states[y]}"
            )
    surv = return_prob_survival(chain, j, eps)
    # thresholds apply to P^t(j,j) itself, i.e. to (1 - pi_j) * survival
    slack = MONOTONE_TOL / (1.0 - float(chain.pi[j]))
    issues = []
    rises = np.flatnonzero(np.diff(surv) > slack)
    if rises.size:
        t = int(rises[0])
        msg = f"P^t(j,j) increases between t={t} and t={t + 1}"
        if not force:
            raise NotDecreasing(msg)
        issues.append(msg)
    if np.any(surv < -slack):
        t = int(np.flatnonzero(surv < -slack)[0])
        msg = f"P^{t}(j,j) < pi_j"
        if not force:
            raise NegativeSurvival(msg)
        issues.append(msg)
    dist = None
    if not issues:
        clean = np.minimum.accumulate(np.clip(surv, 0.0, 1.0))
        dist = from_survival(clean)
    return SstResult(
        dist,
        Provenance.RETURN_PROBABILITY,
        f"pi^({chain.states[j]})",
        tuple(issues),
        surv,
    )


def check_no_hit_before_sst(
    chain: MarkovChain,
    j,
    horizon: int | None = None,
    tol: float = CONDITION_TOL,
    T: SstResult | None = None,
) -> NoHitCheck:
    """Check P(X_t = j) = pi_j P(T <= t) for X_0 ~ pi^(j), t = 0..horizon.

    Equivalent to P(T > t, X_t = j) = 0 for an SST ``T``. ``T`` defaults to
    the fastest SST from pi^(j); with the return-probability law the identity
    holds for every chain, so it carries no information there.
    """
    j = chain.index(j)
    if horizon is None:
        horizon, _ = default_horizon(chain, j)
    if T is None:
        T = fastest_sst_from_restricted(chain, j)
    pij = chain.pi[j]
    worst = 0.0
    for t, d in enumerate(iter_deviations(chain, restricted_stationary(chain, j))):
        if t > horizon:
            break
        if T.dist is not None:
            surv_t = survival(T.dist, t)
        else:
            surv_t = T.survival[min(t, len(T.survival) - 1)]
        # P(X_t = j) - pi_j (1 - surv_t) = dev_t(j) + pi_j surv_t
        worst = max(worst, abs(d[j] + pij * surv_t))
    return NoHitCheck(worst <= tol, horizon, float(worst))

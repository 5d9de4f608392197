"""Bounds relating W_j to the geometric sum U built from an SST, and the report."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import dist as D
from .chain_core import MarkovChain, is_reversible, iter_distributions
from .errors import DivergentMGF
from .hitting import (
    HittingResult,
    average_hitting_time,
    expected_hitting_kac,
    hitting_time_dist,
    mgf_hitting,
)
from .sst import CONDITION_TOL, SstResult, fastest_sst_from_state

THETA_GRID = (0.01, 0.05, 0.1, 0.25, 0.5, float(np.log(2.0) - 0.01))
# slack added to comparisons between quantities computed by different routes
BOUND_SLACK = 1e-10
MGF_SLACK = 1e-9
MEAN_SLACK = 1e-9


class MgfCheck(NamedTuple):
    theta: float
    gate: float
    bound: float | None
    exact: float
    # truncation uncertainty of the bound, from the MGF tail of T
    bound_error: float = 0.0

    @property
    def ok(self) -> bool:
        if self.bound is None:
            return True
        # rounding in the gate is amplified by the conditioning 1 / (1 - gate)
        slack = MGF_SLACK * max(1.0, self.bound) / (1.0 - self.gate)
        return self.exact <= self.bound + slack + self.bound_error


class WorstCase(NamedTuple):
    t_star: float
    argmax_state: int
    sst_means: tuple[float, ...]
    avg_hitting_bound: float
    double_sum_bound: float
    avg_hitting: float
    ergodic_avg_bound: float | None
    ergodic_avg_tv: float | None


class PropositionCheck(NamedTuple):
    applicable: bool
    m: int | None
    conclusion_holds: bool | None
    horizon: int
    reason: str


@dataclass
class BoundsReport:
    j: int
    state: str
    sst_provenance: str
    pi_j: float
    mean_T: float
    mean_W: float
    tv_bound: float
    tv_exact: float
    tv_exact_error: float
    dominance: D.DominanceWitness
    mean_upper_1: float
    mean_upper_2: float
    mgf_checks: list[MgfCheck]
    sst_mean_lower: float
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dominance"] = self.dominance._asdict()
        d["mgf_checks"] = [dict(m._asdict(), ok=m.ok) for m in self.mgf_checks]
        d["all_pass"] = self.all_pass
        return d


def tv_bound(chain: MarkovChain, j, T: SstResult, mean_W: float | None = None) -> float:
    """(1 - pi_j) E T - pi_j E W_j, an upper bound on d_TV(L(W_j), L(U))."""
    j = chain.index(j)
    pij = float(chain.pi[j])
    if mean_W is None:
        mean_W = expected_hitting_kac(chain, j)
    return (1.0 - pij) * D.mean(T.dist) - pij * mean_W


def mean_bounds(chain: MarkovChain, j, T: SstResult, eps: float = D.DEFAULT_TAIL_EPS):
    """The two upper bounds on E W_j.

    Returns ``((1 - pi_j)/pi_j * E T, (1/pi_j) sum_{l != j} pi_l E T_(l))`` with
    T_(l) the fastest SST from delta_l.
    """
    j = chain.index(j)
    pij = float(chain.pi[j])
    first = (1.0 - pij) / pij * D.mean(T.dist)
    second = sum(
        chain.pi[l] * D.mean(fastest_sst_from_state(chain, l, eps).dist)
        for l in range(chain.n)
        if l != j
    ) / pij
    return first, float(second)


def mgf_bound(chain: MarkovChain, j, T: SstResult, theta: float) -> MgfCheck:
    """MGF bound E e^{theta W_j} <= pi_j / (1 - (1 - pi_j) E e^{theta T}).

    ``bound`` is None when the gate ``(1 - pi_j) E e^{theta T}`` is not below 1.
    The exact MGF of W_j comes from :func:`mgf_hitting`. Raises
    ``DivergentMGF`` when the MGF of T cannot be certified at ``theta``, or
    when the gate opens but the MGF of W_j is infinite.
    """
    j = chain.index(j)
    pij = float(chain.pi[j])
    mT = D.mgf(T.dist, theta)
    if mT.divergent:
        raise DivergentMGF(f"E exp({theta} T) cannot be certified")
    gate = (1.0 - pij) * mT.value
    exact = mgf_hitting(chain, j, theta)
    if gate >= 1.0:
        return MgfCheck(theta, gate, None, exact)
    if not np.isfinite(exact):
        raise DivergentMGF(f"E exp({theta} W) is infinite although the gate is open")
    gate_err = (1.0 - pij) * mT.tail_error
    if gate + gate_err >= 1.0:
        err = float("inf")
    else:
        err = pij / (1.0 - gate - gate_err) - pij / (1.0 - gate)
    return MgfCheck(theta, gate, pij / (1.0 - gate), exact, err)


def sst_mean_lower_bound(chain: MarkovChain, j) -> float:
    """pi_j + pi_j/(1 - pi_j) * sum_{s != j} pi_s P(s,s) / (1 - P(s,s))."""
    j = chain.index(j)
    pi = np.asarray(chain.pi)
    d = np.diag(np.asarray(chain.P))
    mask = np.arange(chain.n) != j
    s = float(np.sum(pi[mask] * d[mask] / (1.0 - d[mask])))
    return float(pi[j] + pi[j] / (1.0 - pi[j]) * s)


def daly_two_state_bound(delta: float) -> float:
    """Comparison constant for the two-state example: delta(1-2delta) / (2(1-delta)^2)."""
    return delta * (1.0 - 2.0 * delta) / (2.0 * (1.0 - delta) ** 2)


def tv_report(
    chain: MarkovChain,
    j,
    T: SstResult,
    eps: float = D.DEFAULT_TAIL_EPS,
    thetas: Sequence[float] = THETA_GRID,
    hitting: HittingResult | None = None,
) -> BoundsReport:
    """Exact-vs-bound comparison for one state and one SST law."""
    j = chain.index(j)
    pij = float(chain.pi[j])
    if hitting is None:
        hitting = hitting_time_dist(chain, j, eps)
    W = hitting.dist
    U = D.geometric_compound(pij, T.dist, eps)
    mean_T = D.mean(T.dist)
    mean_W = hitting.mean_kac
    bound = (1.0 - pij) * mean_T - pij * mean_W
    tv = D.tv_distance(W, U)
    dom = D.check_stochastic_dominance(U, W)
    up1, up2 = mean_bounds(chain, j, T, eps)
    mgfs = []
    for theta in thetas:
        try:
            mgfs.append(mgf_bound(chain, j, T, theta))
        except DivergentMGF:
            continue
    lower = sst_mean_lower_bound(chain, j)
    checks = {
        "tv_bound_ge_exact": tv.value - tv.error_bound <= bound + BOUND_SLACK,
        "tv_bound_nonnegative": bound >= -BOUND_SLACK,
        "dominance": dom.holds,
        "mean_W_le_upper_1": mean_W <= up1 + MEAN_SLACK,
        "upper_1_le_upper_2": up1 <= up2 + MEAN_SLACK,
        "mgf_bounds": all(m.ok for m in mgfs),
        "sst_mean_lower_le_mean_T": lower <= mean_T + BOUND_SLACK,
    }
    return BoundsReport(
        j=j,
        state=chain.states[j],
        sst_provenance=T.provenance.value,
        pi_j=pij,
        mean_T=mean_T,
        mean_W=mean_W,
        tv_bound=bound,
        tv_exact=tv.value,
        tv_exact_error=tv.error_bound,
        dominance=dom,
        mean_upper_1=up1,
        mean_upper_2=up2,
        mgf_checks=mgfs,
        sst_mean_lower=lower,
        checks=checks,
    )


def ergodic_average_tv(chain: MarkovChain, n: int) -> float:
    """max_l d_TV((1/n) sum_{t<n} delta_l P^t, pi)."""
    worst = 0.0
    for l in range(chain.n):
        e = np.zeros(chain.n)
        e[l] = 1.0
        acc = np.zeros(chain.n)
        for t, v in enumerate(iter_distributions(chain, e)):
            if t >= n:
                break
            acc += v
        worst = max(worst, 0.5 * float(np.abs(acc / n - chain.pi).sum()))
    return worst


def worst_case_sst(
    chain: MarkovChain,
    eps: float = D.DEFAULT_TAIL_EPS,
    n: int | None = None,
    verify_ergodic: bool = False,
) -> WorstCase:
    """Worst-case expected fastest SST t* and the average-hitting-time bounds.

    ``(|S| - 1) t*`` bounds the average hitting time; with ``n`` it also gives
    ``(|S| - 1) t* / n`` for the ergodic-average distance, which is only
    verified against the exact Cesaro law when ``verify_ergodic`` is set.
    """
    means = tuple(D.mean(fastest_sst_from_state(chain, l, eps).dist) for l in range(chain.n))
    m = int(np.argmax(means))
    t_star = means[m]
    pi = np.asarray(chain.pi)
    total = pi @ np.array(means)
    double_sum = float(sum(total - pi[j] * means[j] for j in range(chain.n)))
    erg = None if n is None else (chain.n - 1) * t_star / n
    erg_tv = ergodic_average_tv(chain, n) if (n is not None and verify_ergodic) else None
    return WorstCase(
        t_star,
        m,
        means,
        (chain.n - 1) * t_star,
        double_sum,
        average_hitting_time(chain, eps),
        erg,
        erg_tv,
    )


def check_worst_state_proposition(
    chain: MarkovChain,
    horizon: int = 200,
    tol: float = CONDITION_TOL,
    eps: float = D.DEFAULT_TAIL_EPS,
) -> PropositionCheck:
    """Check the worst-starting-state proposition for reversible chains.

    Applicable when the chain is reversible and, for t = 1..horizon, the
    smallest entry of P^t sits in the column of a most likely state m (ties
    allowed). The conclusion checked is P(T_(m) > t) >= P(T_(l) > t) - tol
    for every l and t.
    """
    if not is_reversible(chain):
        return PropositionCheck(False, None, None, horizon, "not reversible")
    pi = np.asarray(chain.pi)
    candidates = np.flatnonzero(pi >= pi.max() - 1e-12)
    Pt = np.eye(chain.n)
    ok = {int(m): True for m in candidates}
    for _ in range(horizon):
        Pt = Pt @ np.asarray(chain.P)
        lo = Pt.min()
        for m in list(ok):
            if Pt[:, m].min() > lo + tol:
                ok[m] = False
    good = [m for m, v in ok.items() if v]
    if not good:
        return PropositionCheck(False, None, None, horizon, "minimum of P^t not in a max-pi column")
    m = good[0]
    surv = [fastest_sst_from_state(chain, l, eps).dist for l in range(chain.n)]
    length = max(d.n_max for d in surv)
    sm = surv[m].survival_array(length)
    holds = all(np.all(sm >= d.survival_array(length) - tol) for d in surv)
    return PropositionCheck(True, m, bool(holds), horizon, "")

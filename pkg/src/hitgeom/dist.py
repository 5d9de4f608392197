"""Truncated distributions on the nonnegative integers.

An :class:`IntDist` stores ``pmf[0..n_max]`` together with ``tail_bound``,
the probability mass the array does not account for. Every constructor in
the package keeps ``sum(pmf) + tail_bound == 1`` up to rounding, so the
missing mass is always explicit. Missing mass may sit beyond ``n_max`` (the
usual case) or be spread thinly below it when a distribution is built from
other truncated distributions (``geometric_compound``); either way the
computed entries never exceed the true ones and ``tail_bound`` is a valid
error allowance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    CompounderHasMassAtZero,
    InvalidParameter,
    TruncationCap,
    ValidationError,
)

DEFAULT_TAIL_EPS = 1e-10
MAX_SUPPORT = 10**6
NORMALIZATION_TOL = 1e-9
DOMINANCE_TOL = 1e-10
# max number of trailing survival ratios used for the tail-rate certificate
_RATE_WINDOW = 32


@dataclass(frozen=True, eq=False)
class IntDist:
    pmf: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        pmf = np.array(self.pmf, dtype=float).ravel()
        if pmf.size == 0:
            pmf = np.zeros(1)
        if np.any(pmf < -1e-12) or not np.all(np.isfinite(pmf)):
            raise ValidationError("pmf has negative or non-finite entries")
        dust = -pmf[pmf < 0].sum()
        pmf = np.clip(pmf, 0.0, None)
        tail = float(self.tail_bound) + dust
        if tail < 0:
            if tail < -NORMALIZATION_TOL:
                raise ValidationError(f"negative tail bound {tail}")
            tail = 0.0
        total = pmf.sum() + tail
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"pmf mass {pmf.sum()!r} + tail {tail!r} != 1")
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "tail_bound", tail)

    @property
    def n_max(self) -> int:
        return len(self.pmf) - 1

    def __getitem__(self, k: int) -> float:
        return float(self.pmf[k]) if 0 <= k < len(self.pmf) else 0.0

    def survival_array(self, n: int | None = None) -> np.ndarray:
        """P(X > t) for t = 0..n (default n_max), accurate for tiny tails."""
        s = np.cumsum(self.pmf[::-1])[::-1] - self.pmf + self.tail_bound
        if n is None or n == self.n_max:
            return s
        if n < self.n_max:
            return s[: n + 1]
        return np.concatenate([s, np.full(n - self.n_max, self.tail_bound)])


class TV(NamedTuple):
    value: float
    error_bound: float


class MGF(NamedTuple):
    value: float
    divergent: bool
    # uncertainty of the extrapolated tail (last vs. largest window ratio)
    tail_error: float = 0.0


class DominanceWitness(NamedTuple):
    holds: bool
    worst_t: int
    worst_gap: float


def point_mass(k: int) -> IntDist:
    pmf = np.zeros(k + 1)
    pmf[k] = 1.0
    return IntDist(pmf)


def from_survival(surv, tail_floor: float | None = None) -> IntDist:
    """Build a distribution from P(X > t), t = 0..n.

    ``surv[-1]`` becomes the tail bound. The pmf at 0 is ``1 - surv[0]``.
    """
    surv = np.asarray(surv, dtype=float)
    pmf = np.empty(len(surv))
    pmf[0] = 1.0 - surv[0]
    pmf[1:] = surv[:-1] - surv[1:]
    tail = float(surv[-1]) if tail_floor is None else tail_floor
    return IntDist(pmf, tail)


def geometric(p: float, n_max: int | None = None, eps: float = DEFAULT_TAIL_EPS) -> IntDist:
    """Geom(p) on {0, 1, ...}: P(N = k) = p (1-p)^k.

    Without ``n_max`` the support is extended until the tail drops below ``eps``.
    """
    if not (0.0 < p <= 1.0):
        raise InvalidParameter(f"geometric parameter must lie in (0, 1], got {p}")
    q = 1.0 - p
    if n_max is None:
        n_max = 0 if q == 0 else max(0, int(np.ceil(np.log(eps) / np.log(q))) - 1)
        if n_max > MAX_SUPPORT:
            raise TruncationCap(f"Geom({p}) needs support {n_max}")
    k = np.arange(n_max + 1)
    pmf = p * q**k
    return IntDist(pmf, q ** (n_max + 1))


def tv_distance(d1: IntDist, d2: IntDist) -> TV:
    """Total variation distance, half the L1 distance of the pmfs.

    ``error_bound`` is half the combined unaccounted mass; the true distance
    lies within ``value +- error_bound``.
    """
    n = max(len(d1.pmf), len(d2.pmf))
    a = np.zeros(n)
    b = np.zeros(n)
    a[: len(d1.pmf)] = d1.pmf
    b[: len(d2.pmf)] = d2.pmf
    return TV(0.5 * float(np.abs(a - b).sum()), 0.5 * (d1.tail_bound + d2.tail_bound))


def survival(d: IntDist, t: int) -> float:
    """P(X > t)."""
    if t < 0:
        return 1.0
    if t >= d.n_max:
        return d.tail_bound
    return float(d.pmf[t + 1 :].sum() + d.tail_bound)


def tail_rate(d: IntDist, conservative: bool = True) -> float:
    """Empirical geometric decay rate of the survival function near ``n_max``.

    With ``conservative`` the largest ratio P(X > k+1) / P(X > k) over the
    trailing window is returned (used as a divergence certificate); otherwise
    the last ratio (used to extrapolate). 0 when no mass is unaccounted for.
    """
    if d.tail_bound <= 0:
        return 0.0
    s = d.survival_array()
    # at most half the array, so leading values do not pose as the tail
    window = min(_RATE_WINDOW, max(2, (len(s) - 1) // 2))
    s = s[max(0, len(s) - 1 - window) :]
    s = s[s > 0]
    if len(s) < 2:
        return 1.0
    ratios = s[1:] / s[:-1]
    return float(ratios.max() if conservative else ratios[-1])


def mean_parts(d: IntDist) -> tuple[float, float]:
    """(truncated mean, extrapolated tail contribution).

    The tail contribution assumes the unaccounted mass starts at ``n_max + 1``
    and decays at :func:`tail_rate`; it is ``inf`` if no rate below 1 is seen.
    """
    k = np.arange(len(d.pmf))
    head = float(k @ d.pmf)
    tau = d.tail_bound
    if tau == 0:
        return head, 0.0
    if tail_rate(d) >= 1.0:
        return head, float("inf")
    rho = tail_rate(d, conservative=False)
    return head, tau * (d.n_max + 1) + tau * rho / (1.0 - rho)


def mean(d: IntDist) -> float:
    """Mean including the extrapolated tail (see :func:`mean_parts`)."""
    head, tail = mean_parts(d)
    return head + tail


def mgf(d: IntDist, theta: float) -> MGF:
    """E exp(theta X), with the tail extrapolated at the certified decay rate.

    ``divergent`` is set when ``exp(theta) * rate >= 1``, in which case the
    tail cannot be bounded and ``value`` is ``inf``. ``tail_error`` is the
    spread between extrapolating with the last and with the largest observed
    survival ratio.
    """
    if not np.isfinite(theta):
        raise InvalidParameter("theta must be finite")
    k = np.flatnonzero(d.pmf > 0)
    head = float(np.exp(theta * k + np.log(d.pmf[k])).sum())
    tau = d.tail_bound
    if tau == 0:
        return MGF(head, False)
    rho_max = tail_rate(d)
    if rho_max * np.exp(theta) >= 1.0:
        return MGF(float("inf"), True)

    def tail(rho):
        # tau spread as a geometric tail starting at n_max + 1
        scale = np.exp(np.log(tau) + theta * (d.n_max + 1))
        return float(scale * (1.0 - rho) / (1.0 - rho * np.exp(theta)))

    t_last = tail(tail_rate(d, conservative=False))
    return MGF(head + t_last, False, abs(tail(rho_max) - t_last))


def geometric_compound(
    p: float,
    f_T: IntDist,
    eps: float = DEFAULT_TAIL_EPS,
    cap: int = MAX_SUPPORT,
) -> IntDist:
    """Law of T_1 + ... + T_N with N ~ Geom(p) independent of the IID T_i.

    Uses the renewal recursion ``f_U(0) = p``,
    ``f_U(n) = (1-p) sum_{m=1}^{n} f_T(m) f_U(n-m)``, extended until the mass
    still reachable from the truncated ``f_T`` is below ``eps``.
    """
    if not (0.0 < p <= 1.0):
        raise InvalidParameter(f"geometric parameter must lie in (0, 1], got {p}")
    if p == 1.0:
        return point_mass(0)
    if f_T.pmf[0] > 1e-12:
        raise CompounderHasMassAtZero(f"compounding law has P(T=0) = {f_T.pmf[0]:.3e}")
    q = 1.0 - p
    fT = np.array(f_T.pmf)
    fT[0] = 0.0
    reachable = p / (1.0 - q * fT.sum())
    L = len(fT) - 1
    fT_rev = fT[1:][::-1]  # fT[L], ..., fT[1]
    size = max(64, 4 * L)
    fU = np.zeros(size)
    fU[0] = p
    cum = p
    n = 0
    while reachable - cum >= eps:
        n += 1
        if n > cap:
            raise TruncationCap(f"compound law needs support beyond {cap}")
        if n >= size:
            size *= 2
            fU = np.resize(fU, size)
            fU[n:] = 0.0
        m = min(n, L)
        # sum_{i=1}^{m} fT[i] fU[n-i]
        val = q * float(fT_rev[L - m :] @ fU[n - m : n])
        fU[n] = val
        cum += val
    pmf = fU[: n + 1]
    return IntDist(pmf, max(0.0, 1.0 - float(pmf.sum())))


def check_stochastic_dominance(
    upper: IntDist, lower: IntDist, tol: float = DOMINANCE_TOL
) -> DominanceWitness:
    """Check ``upper >=_st lower`` through survival functions.

    The gap at t is ``P(lower > t) - P(upper > t)``; the ordering holds when
    every gap is at most ``tol`` plus the unaccounted mass of ``lower`` (which
    only inflates its computed survival).
    """
    n = max(upper.n_max, lower.n_max)
    gap = lower.survival_array(n) - upper.survival_array(n)
    t = int(np.argmax(gap))
    worst = float(gap[t])
    return DominanceWitness(worst <= tol + lower.tail_bound, t, worst)

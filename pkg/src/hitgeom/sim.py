"""Seeded Monte Carlo for hitting times and dual-chain absorption times.

Random streams
--------------
All randomness comes from NumPy's ``PCG64`` bit generator. A master
``SeedSequence(seed)`` is split with ``SeedSequence.spawn(replicas)``; replica
``r`` owns the ``r``-th child stream. Spawned children are statistically
independent streams, so replicas never share draws. Categorical draws use the
inverse CDF of the relevant row with one uniform per draw. Replicas are
concatenated in index order, so results depend only on ``SimConfig``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chain_core import MarkovChain
from .dist import IntDist
from .errors import PathCap, ValidationError
from .greedy_dual import GreedyDual

PATH_CAP = 10**7


@dataclass(frozen=True)
class SimConfig:
    seed: int
    replicas: int = 1
    samples_per_replica: int = 1000

    def __post_init__(self):
        if self.replicas < 1 or self.samples_per_replica < 1:
            raise ValidationError("replicas and samples_per_replica must be positive")

    @property
    def total(self) -> int:
        return self.replicas * self.samples_per_replica


def streams(config: SimConfig) -> list[np.random.Generator]:
    children = np.random.SeedSequence(config.seed).spawn(config.replicas)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def _draw(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    n = cdf_rows.shape[-1]
    idx = (cdf_rows < u[:, None]).sum(axis=1)
    return np.minimum(idx, n - 1)


def sample_hitting_time(chain: MarkovChain, j, init, rng: np.random.Generator) -> int:
    """One draw of inf{t >= 0 : X_t = j} with X_0 ~ init."""
    return int(sample_hitting_times(chain, j, init, 1, rng)[0])


def sample_hitting_times(
    chain: MarkovChain, j, init, size: int, rng: np.random.Generator
) -> np.ndarray:
    """``size`` independent hitting times of ``j``, simulated in lockstep."""
    j = chain.index(j)
    cdf = np.cumsum(np.asarray(chain.P), axis=1)
    init_cdf = np.cumsum(np.asarray(init, dtype=float))
    state = _draw(np.broadcast_to(init_cdf, (size, chain.n)), rng.random(size))
    out = np.zeros(size, dtype=np.int64)
    active = np.flatnonzero(state != j)
    t = 0
    while active.size:
        t += 1
        if t > PATH_CAP:
            raise PathCap(f"{active.size} paths still running after {PATH_CAP} steps")
        state[active] = _draw(cdf[state[active]], rng.random(active.size))
        hit = state[active] == j
        out[active[hit]] = t
        active = active[~hit]
    return out


def sample_dual_sst(gd: GreedyDual, rng: np.random.Generator) -> int:
    """One absorption time of the dual chain started at S_j."""
    return int(sample_dual_ssts(gd, 1, rng)[0])


def sample_dual_ssts(gd: GreedyDual, size: int, rng: np.random.Generator) -> np.ndarray:
    """Absorption times of the three-outcome dual walk.

    From S_j each step goes to S (absorbed), stays at S_j, or moves to some
    other set, from which the next step is absorbed.
    """
    cdf = np.array([gd.p_absorb, gd.p_absorb + gd.p_stay])
    out = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    t = 0
    while active.size:
        t += 1
        if t > PATH_CAP:
            raise PathCap(f"{active.size} dual paths still running after {PATH_CAP} steps")
        u = rng.random(active.size)
        absorbed = u < cdf[0]
        other = u >= cdf[1]
        out[active[absorbed]] = t
        out[active[other]] = t + 1
        active = active[~(absorbed | other)]
    return out


def run(config: SimConfig, sampler: Callable[[int, np.random.Generator], np.ndarray]) -> np.ndarray:
    """Call ``sampler(samples_per_replica, rng)`` per replica and concatenate in order."""
    return np.concatenate([sampler(config.samples_per_replica, g) for g in streams(config)])


def empirical_tv(samples, exact: IntDist) -> float:
    """Total variation between the empirical law of ``samples`` and ``exact``.

    Mass of ``exact`` not stored in its pmf counts as disagreement.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise ValidationError("need at least one sample")
    if samples.min() < 0:
        raise ValidationError("samples must be nonnegative")
    counts = np.bincount(samples)
    n = max(len(counts), len(exact.pmf))
    emp = np.zeros(n)
    emp[: len(counts)] = counts / samples.size
    ref = np.zeros(n)
    ref[: len(exact.pmf)] = exact.pmf
    return 0.5 * (float(np.abs(emp - ref).sum()) + exact.tail_bound)


def tv_threshold(support: int, n: int, sigmas: float = 5.0) -> float:
    """Noise scale for empirical TV: sigmas * sqrt(support / n) / 2."""
    return sigmas * 0.5 * np.sqrt(support / n)

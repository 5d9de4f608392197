import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitgeom import dist as D
from hitgeom.bounds import tv_report
from hitgeom.chain_core import restricted_stationary, validate_chain
from hitgeom.greedy_dual import (
    Regime,
    classify_greedy_case,
    dual_sst_dist,
    dual_sst_mean,
    greedy_dual_row,
    intertwining_residual,
)
from hitgeom.sst import Provenance, fastest_sst_from_restricted

from .conftest import ergodic_chains, random_chains

# column 1 is fed only from state 0, so pi_1 = pi_0 P(0, 1)
DEGENERATE = validate_chain([[0.2, 0.5, 0.3], [0.4, 0.0, 0.6], [0.5, 0.0, 0.5]])


def test_two_state_hand_execution(two_state):
    # Q_0 = (1/2, 1/2); ratios (3/2, 3/4) give c_1 = 3/4 and keep both states;
    # Q_1 = (1/4, 0) gives c_2 = (1/4)/(1/3) = 3/4 on {0}
    gd = greedy_dual_row(two_state, 1)
    assert gd.c == pytest.approx((0.75, 0.75), abs=1e-15)
    assert gd.A == (frozenset({0, 1}), frozenset({0}))
    assert gd.p_absorb == pytest.approx(0.75, abs=1e-15)
    assert gd.p_stay == pytest.approx(0.25, abs=1e-15)
    assert gd.p_other == 0.0 and gd.z == 2
    assert dual_sst_mean(gd) == pytest.approx(4 / 3, abs=1e-15)


def test_two_state_matches_fastest(two_state):
    G = dual_sst_dist(greedy_dual_row(two_state, 1))
    F = fastest_sst_from_restricted(two_state, 1)
    assert G.provenance is Provenance.GREEDY_DUAL
    n = min(G.dist.n_max, F.dist.n_max)
    assert np.max(np.abs(G.dist.pmf[: n + 1] - F.dist.pmf[: n + 1])) <= 1e-12
    cls = classify_greedy_case(two_state, 1)
    assert cls.regime is Regime.UNIQUE_MIN_AT_J
    assert cls.alpha == pytest.approx(0.75) and cls.beta == pytest.approx(0.25)


def test_iid_absorbs_in_one_step(iid_chain):
    for j in range(3):
        gd = greedy_dual_row(iid_chain, j)
        assert gd.z == 1 and gd.A == (frozenset({0, 1, 2}),)
        assert gd.p_absorb == pytest.approx(1.0, abs=1e-15)
        assert dual_sst_mean(gd) == pytest.approx(1.0, abs=1e-15)
        d = dual_sst_dist(gd).dist
        assert d[1] == pytest.approx(1.0, abs=1e-15) and d.tail_bound <= 1e-15


def test_degenerate_coordinate_excluded():
    assert DEGENERATE.pi[1] == pytest.approx(DEGENERATE.pi[0] * 0.5, abs=1e-15)
    gd = greedy_dual_row(DEGENERATE, 0)
    assert all(1 not in A for A in gd.A)
    assert classify_greedy_case(DEGENERATE, 0, gd).regime is Regime.DEGENERATE
    # no dual mass reaches S in one step, every path is absorbed at time 2
    assert gd.p_absorb == 0.0 and gd.p_other == pytest.approx(1.0)
    assert dual_sst_dist(gd).dist.pmf.tolist() == pytest.approx([0.0, 0.0, 1.0])


@given(ergodic_chains(max_size=5), st.data())
@settings(max_examples=60, deadline=None)
def test_row_is_a_distribution(chain, data):
    j = data.draw(st.integers(0, chain.n - 1))
    gd = greedy_dual_row(chain, j)
    assert all(c > 0 for c in gd.c)
    assert all(a > b for a, b in zip(gd.A, gd.A[1:]))  # strictly nested
    assert sum(gd.dual_row.values()) == pytest.approx(1.0, abs=1e-12)
    # sum_r c_r pi|A_r rebuilds (Lambda P)(S_j, .)
    rebuilt = np.zeros(chain.n)
    for c, A in zip(gd.c, gd.A):
        rebuilt[sorted(A)] += c * chain.pi[sorted(A)]
    target = (chain.pi - chain.pi[j] * chain.P[j]) / (1 - chain.pi[j])
    np.testing.assert_allclose(rebuilt, target, atol=1e-12)


@given(ergodic_chains(max_size=5), st.data())
@settings(max_examples=60, deadline=None)
def test_pmf_and_mean_formula(chain, data):
    j = data.draw(st.integers(0, chain.n - 1))
    gd = greedy_dual_row(chain, j)
    d = dual_sst_dist(gd).dist
    a, s = gd.p_absorb, gd.p_stay
    assert d[1] == pytest.approx(a, abs=1e-15)
    t = np.arange(2, min(d.n_max, 30) + 1)
    np.testing.assert_allclose(d.pmf[t], (1 - a) * (1 - s) * s ** (t - 2), atol=1e-12)
    assert D.mean(d) == pytest.approx(dual_sst_mean(gd), rel=1e-9)


def test_regimes_on_random_chains():
    seen = {Regime.UNIQUE_MIN_AT_J: 0, Regime.MIN_ELSEWHERE: 0}
    for chain in random_chains(100, 3, seed=1):
        for j in range(3):
            gd = greedy_dual_row(chain, j)
            cls = classify_greedy_case(chain, j, gd)
            seen[cls.regime] = seen.get(cls.regime, 0) + 1
            d = dual_sst_dist(gd).dist
            if cls.regime is Regime.MIN_ELSEWHERE:
                assert gd.p_stay == 0.0
                assert d.n_max <= 2 and d[1] == pytest.approx(cls.gamma) and d[2] == pytest.approx(1 - cls.gamma)
                assert dual_sst_mean(gd) == pytest.approx(2 - cls.gamma)
            elif cls.regime is Regime.UNIQUE_MIN_AT_J:
                pi_j = chain.pi[j]
                assert cls.alpha == pytest.approx((1 - chain.P[j, j]) / (1 - pi_j), abs=1e-12)
                assert gd.A[1] == frozenset(range(3)) - {j}
                t = np.arange(2, d.n_max + 1)
                expected = (1 - cls.alpha) * (1 - cls.beta) * cls.beta ** (t - 2)
                assert np.max(np.abs(d.pmf[2:] - expected), initial=0.0) <= 1e-10
    assert seen[Regime.UNIQUE_MIN_AT_J] > 0 and seen[Regime.MIN_ELSEWHERE] > 0


@given(ergodic_chains(max_size=5), st.data())
@settings(max_examples=60, deadline=None)
def test_intertwining_holds_iff_no_intermediate_sets(chain, data):
    j = data.draw(st.integers(0, chain.n - 1))
    gd = greedy_dual_row(chain, j)
    res = intertwining_residual(chain, gd).row_residual
    assert (res <= 1e-12) == (gd.p_other <= 1e-12)


def test_intertwining_two_state(two_state):
    gd = greedy_dual_row(two_state, 1)
    assert intertwining_residual(two_state, gd).row_residual <= 1e-15
    lam = restricted_stationary(two_state, 1)
    np.testing.assert_allclose(lam @ two_state.P, 0.75 * two_state.pi + 0.25 * lam, atol=1e-15)


def test_intermediate_sets_break_the_sst_property():
    # With mass on sets other than S and S_j the construction is not an SST:
    # it absorbs faster than the separation allows and the bounds fail.
    chain = validate_chain(
        [
            [0.22135252793178753, 0.3207377658683681, 0.1778720548073249, 0.28003765139251946],
            [0.03222472442217681, 0.5279394143260375, 0.0015218309191174307, 0.43831403033266825],
            [0.33272609678429865, 0.17380465103831522, 0.31294938783849685, 0.18051986433888922],
            [0.22054313704133485, 0.2631753352507511, 0.46184952350877073, 0.05443200419914329],
        ]
    )
    gd = greedy_dual_row(chain, 0)
    assert gd.p_other > 0
    G = dual_sst_dist(gd)
    F = fastest_sst_from_restricted(chain, 0)
    assert not D.check_stochastic_dominance(G.dist, F.dist).holds
    rep = tv_report(chain, 0, G)
    assert not rep.checks["tv_bound_ge_exact"]
    assert not rep.checks["dominance"]


def test_two_state_greedy_equals_fastest_only_when_min_at_j():
    seen = set()
    for chain in random_chains(60, 2, seed=3):
        for j in range(2):
            gd = greedy_dual_row(chain, j)
            regime = classify_greedy_case(chain, j, gd).regime
            G, F = dual_sst_dist(gd).dist, fastest_sst_from_restricted(chain, j).dist
            seen.add(regime)
            if regime is Regime.UNIQUE_MIN_AT_J:
                assert gd.p_other == 0.0
                n = min(G.n_max, F.n_max)
                assert np.max(np.abs(G.pmf[: n + 1] - F.pmf[: n + 1])) <= 1e-12
            else:
                # A_2 = {j} is an intermediate set, and the law stops at 2
                assert regime is Regime.MIN_ELSEWHERE and gd.p_other > 0
                assert G.n_max <= 2 < F.n_max
                assert not D.check_stochastic_dominance(G, F).holds
    assert seen == {Regime.UNIQUE_MIN_AT_J, Regime.MIN_ELSEWHERE}

import math

import numpy as np
import pytest

from convexlab.frames import gram_defect
from convexlab.instance import make_instance
from convexlab.experiments import (GuessOracle, InformedStrategy,
                                   guess_response, _lazy_frame,
                                   hiding_report, max_parallel_queries,
                                   measure_delta1, measure_delta2,
                                   measure_query_wall, parallel_bound,
                                   quantum_bound_analytic, rate_estimate,
                                   run_hybrid_game, toy_enumerate_strategies,
                                   toy_exact_success, toy_partial_secret,
                                   toy_random_guess_game, toy_simulate_success)
from convexlab.schedule import params_schedule
from scipy.stats import ks_2samp


@pytest.fixture(scope="module")
def inst():
    params = params_schedule(512, 1, "scaled", {"gamma": 0.01})
    return make_instance(params, seed=5, mc_samples=64)


def test_rate_estimate_clopper_pearson():
    r = rate_estimate(0, 100)
    assert r.rate == 0.0 and r.ci_low == 0.0
    assert r.ci_high == pytest.approx(1 - 0.025 ** (1 / 100), rel=1e-10)
    r2 = rate_estimate(100, 100)
    assert r2.ci_high == 1.0
    assert r2.ci_low == pytest.approx(0.025 ** (1 / 100), rel=1e-10)
    r3 = rate_estimate(5, 50)
    assert r3.ci_low < 0.1 < r3.ci_high


def test_delta1_top_level_is_identically_zero(inst):
    frag = measure_delta1(inst, inst.params.k - 1, trials=40, probe_count=16)
    assert frag.revealed.rate == 0.0


def test_delta1_validates_inputs(inst):
    with pytest.raises(ValueError):
        measure_delta1(inst, inst.params.k, trials=10)
    with pytest.raises(ValueError):
        measure_delta1(inst, 0, trials=10, query_distribution="bogus")


def test_delta1_adversarial_at_least_uniform(inst):
    # monotone hiding: the descent-cap queries reveal at least as often
    uni = measure_delta1(inst, 1, trials=150, probe_count=16, seed=1)
    adv = measure_delta1(inst, 1, trials=150, probe_count=16, seed=1,
                         query_distribution="adversarial-cap")
    assert adv.revealed.rate >= uni.revealed.rate


def test_delta2_zero_point_and_control(inst):
    zero = measure_delta2(inst, trials=30, output_distribution="zero", seed=2)
    assert zero.optimal.rate == 0.0 and not zero.control
    ctrl = measure_delta2(inst, trials=30, output_distribution="xstar-control",
                          seed=2)
    assert ctrl.control and ctrl.optimal.rate == 1.0


def test_hiding_report_structure(inst):
    rep = hiding_report(inst, trials=25, seed=3, probe_count=16,
                        witness_samples=256)
    assert len(rep.delta1) == inst.params.k
    assert rep.params["k"] == inst.params.k
    assert rep.witness_estimate <= rep.witness_certificate + 3 * rep.witness_stderr
    assert 0.0 <= rep.delta1_max <= 1.0
    assert parallel_bound(0.01, 0.02, 4, 8) == pytest.approx(0.34)
    assert quantum_bound_analytic(0.01, 0.02, 4) == pytest.approx(0.02 + 1.6)


def test_lazy_frame_is_haar(inst):
    # joint law of lazily sampled frames matches direct Haar sampling:
    # orthonormality is exact; the last-vector marginal passes a two-sample
    # test against a fresh direct draw
    from convexlab.frames import haar_frame

    f = _lazy_frame(inst, seed=11)
    assert gram_defect(f.vectors) <= 1e-10
    n, draws = 8, 1500
    small = params_schedule(n, 1, "scaled", {"gamma": 0.02, "k": 3,
                                             "beta": 0.005, "rho": 1e-4})
    tmpl = make_instance(small, seed=0, mc_samples=8)
    lazy_proj = np.array([_lazy_frame(tmpl, seed=i).vectors[2, 0]
                          for i in range(draws)])
    direct_proj = np.array([haar_frame(n, 3, seed=10_000 + i).vectors[2, 0]
                            for i in range(draws)])
    assert ks_2samp(lazy_proj, direct_proj).pvalue > 0.01


def test_zero_strategy_game(inst):
    t = run_hybrid_game("zero", inst, rounds=3, K=1, seed=21)
    assert t.divergence_round is None
    assert not t.success and not t.hybrid_success
    assert t.rounds_played == 3
    assert [r.oracle_level for r in t.rounds] == [1, 2, 3]


def test_game_round_and_k_validation(inst):
    with pytest.raises(ValueError):
        run_hybrid_game("zero", inst, rounds=0, K=1, seed=0)
    with pytest.raises(ValueError):
        run_hybrid_game("zero", inst, rounds=inst.params.k + 1, K=1, seed=0)
    cap = max_parallel_queries(inst.params)
    with pytest.raises(ValueError, match="K must be"):
        run_hybrid_game("zero", inst, rounds=1, K=cap + 1, seed=0)
    with pytest.raises(ValueError, match="unknown algorithm"):
        run_hybrid_game("sgd", inst, rounds=1, K=1, seed=0)


def test_game_transcript_determinism(inst):
    a = run_hybrid_game("random", inst, rounds=3, K=4, seed=33)
    b = run_hybrid_game("random", inst, rounds=3, K=4, seed=33)
    assert a == b
    c = run_hybrid_game("random", inst, rounds=3, K=4, seed=34)
    assert c.output_digest != a.output_digest


def test_informed_strategy_learns_frame(inst):
    t = run_hybrid_game("informed", inst, rounds=inst.params.k, K=1, seed=44)
    assert t.success and t.hybrid_success
    assert t.divergence_round is None
    wall = measure_query_wall(inst, seed=44)
    assert wall == inst.params.k


def test_informed_strategy_unit_queries(inst):
    p = inst.params
    s = InformedStrategy(p.n, p.R)
    (x0,) = s.queries()
    np.testing.assert_array_equal(x0, np.zeros(p.n))


def test_baselines_fail_below_wall(inst):
    for algo in ("subgradient", "random"):
        t = run_hybrid_game(algo, inst, rounds=inst.params.k - 1, K=1, seed=55)
        assert not t.success


# --- toy family ------------------------------------------------------------

def test_guess_response_examples():
    assert guess_response((1, 2), (1, 2)) == (1, 2)
    assert guess_response((1, 2), (2, 1)) == (1, 0)
    assert guess_response((3, 1, 2), (3, 2, 2)) == (3, 1, 0)
    assert guess_response((3, 1, 2), (1, 1, 2)) == (3, 0, 0)


def test_guess_oracle_partial_chain():
    o = GuessOracle((2, 1, 3))
    assert o.partial(1).secret == (2, 0, 0)
    assert toy_partial_secret((2, 1, 3), 2) == (2, 1, 0)
    # partial reveals no more than its prefix
    assert o.partial(1)((2, 1, 3)) == (2, 0, 0)


def test_toy_enumeration_count():
    strats = toy_enumerate_strategies(2, 2)
    assert len(strats) == 4 * 4**3
    best = max(toy_exact_success(q, m, 2, 2) for q, m in strats)
    assert best == pytest.approx(0.75)  # optimal 1-query strategy at N=2, m=2


def test_toy_exact_matches_simulation():
    strats = toy_enumerate_strategies(2, 2)
    q, omap = strats[17]
    exact = toy_exact_success(q, omap, 2, 2)
    sim = toy_simulate_success(q, omap, 2, 2, trials=4000, seed=9)
    assert sim.ci_low <= exact <= sim.ci_high


def test_toy_random_guess_bound():
    # success <= delta2 + (m-1)*delta1 with delta1 = delta2 = 1/N
    r = toy_random_guess_game(16, 8, queries=7, trials=3000, seed=10)
    assert r.ci_low <= 1 / 16 + 7 / 16

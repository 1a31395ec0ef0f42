import math

import pytest
from hypothesis import given, settings, strategies as st

from convexlab.schedule import (InstanceParams, ScheduleError, min_viable_n,
                                params_schedule)


def test_paper_exact_large_n():
    p = params_schedule(2**24, 1)
    assert p.k == 1
    assert p.alpha == 2.0
    assert p.R == 1.0
    assert math.isclose(p.gamma, 0.039831, rel_tol=1e-4)
    assert math.isclose(p.beta, 2.3944e-3, rel_tol=1e-4)
    assert math.isclose(p.rho, 1.1972e-5, rel_tol=1e-4)
    assert p.epsilon == 0.1


def test_scaled_gamma_override():
    p = params_schedule(4096, 1, "scaled", {"gamma": 0.01})
    assert p.k == 4
    assert p.epsilon == 0.05
    assert p.rho < p.beta < p.gamma < 1


def test_small_n_rejected_with_min_n_hint():
    with pytest.raises(ScheduleError, match="minimum n"):
        params_schedule(8, 1)
    # the reported minimum really is the boundary
    m = min_viable_n(1)
    params_schedule(m, 1)
    with pytest.raises(ScheduleError):
        params_schedule(m - 1, 1)


def test_paper_exact_ignores_overrides():
    a = params_schedule(2**24, 2)
    b = params_schedule(2**24, 2, "paper-exact", {"gamma": 0.5})
    assert a == b


def test_stability_inequality_enforced():
    # ordering holds but rho*(1+alpha)*ln n + 2*beta < gamma fails
    with pytest.raises(ScheduleError, match="stability inequality"):
        params_schedule(4096, 1, "scaled",
                        {"gamma": 0.01, "beta": 0.004, "rho": 0.001})


def test_ordering_enforced():
    with pytest.raises(ScheduleError):
        params_schedule(4096, 1, "scaled", {"gamma": 0.01, "beta": 0.5})


def test_unknown_override_rejected():
    with pytest.raises(ScheduleError, match="unknown override"):
        params_schedule(4096, 1, "scaled", {"gama": 0.01})


def test_gamma_above_ceps_rejected():
    with pytest.raises(ScheduleError, match="c_eps"):
        params_schedule(4096, 1, "scaled", {"gamma": 0.2})


def test_explicit_k_override():
    p = params_schedule(16384, 1, "scaled", {"gamma": 0.004})
    assert p.k == 8
    q = params_schedule(16384, 1, "scaled", {"gamma": 0.004, "k": 6})
    assert q.k == 6


def test_invalid_direct_construction_rejected():
    with pytest.raises(ScheduleError):
        InstanceParams(n=100, p=1, k=2, gamma=0.1, rho=0.2, beta=0.05,
                       alpha=2.0, R=1.0, epsilon=0.07, mode="scaled")


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2_400_000, max_value=2**26), st.integers(1, 3))
def test_paper_exact_is_pure(n, p):
    a = params_schedule(n, p)
    b = params_schedule(n, p)
    assert a == b
    assert a.singlestep_margin > 0
    assert a.k == math.floor((0.1 / a.gamma) ** (2.0 / 3.0))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from longmem import svclass
from longmem.errors import DomainError
from longmem.svclass import Envelope, EtaFunction, SlowlyVaryingL

KINDS = [Envelope.power(1.0, 1.0), Envelope.power(0.5, 0.3),
         Envelope.log_inverse(1.0), Envelope.log_inverse(2.5), Envelope.loglog_inverse()]


@pytest.mark.parametrize("env", KINDS, ids=lambda e: e.kind)
def test_envelope_invariants(env):
    assert svclass.check_envelope(env) == []
    s = svclass.verification_grid(2048)
    v = env(s)
    assert np.all(np.diff(v) >= -1e-15)
    assert env(1e-12) < 0.1 and env(1e-12) < env(math.pi)


def test_custom_envelope_flags_decreasing():
    env = Envelope.custom(lambda s: 1.0 / (1.0 + s))
    assert "not non-decreasing" in svclass.check_envelope(env)


def test_envelope_rejects_bad_parameters():
    with pytest.raises(DomainError):
        Envelope.power(-1.0, 1.0)
    with pytest.raises(DomainError):
        Envelope.log_inverse(0.0)


def test_record_roundtrip():
    for env in KINDS:
        assert Envelope.from_record({k: str(v) for k, v in env.to_record().items()}) == env


def test_eval_L_zero_eta():
    L = SlowlyVaryingL(EtaFunction.scaled(Envelope.power(), 0.0), l_pi=1.0)
    for x in (1e-9, 0.3, math.pi):
        assert svclass.eval_L(L, x) == 1.0


def test_eval_L_log_power_at_e2():
    # eta = -eta_star for the log_inverse envelope, normalised at 1/e:
    # L(x) = log^rho(1/x), so L(e^-2) = 2^rho
    for rho in (1.0, 0.5):
        eta = EtaFunction.scaled(Envelope.log_inverse(rho), -1.0)
        L = SlowlyVaryingL(eta, l_pi=1.0, upper=math.exp(-1))
        assert svclass.eval_L(L, math.exp(-2)) == pytest.approx(2 ** rho, rel=1e-12)
        assert svclass.eval_L(L, math.exp(-2), method="quad") == pytest.approx(2 ** rho, rel=1e-9)


def test_eval_L_power_matches_trapezoid_oracle():
    eta = EtaFunction(Envelope.power(0.5, 1.0), fn=lambda s: 0.5 * s)
    L = SlowlyVaryingL(eta, l_pi=1.0)
    x = math.pi / 2
    s = np.linspace(x, math.pi, 1_000_001)
    oracle = math.exp(-integrate.trapezoid(0.5 * s / s, s))
    assert svclass.eval_L(L, x) == pytest.approx(oracle, rel=1e-8)
    assert oracle == pytest.approx(math.exp(-math.pi / 4), rel=1e-12)


def test_eval_L_domain():
    L = SlowlyVaryingL(EtaFunction.scaled(Envelope.power(), 0.5))
    for bad in (0.0, -1.0, 4.0):
        with pytest.raises(DomainError):
            svclass.eval_L(L, bad)


def test_hstar_power_exact():
    eta = EtaFunction.scaled(Envelope.power(1.0, 1.0), 1.0)
    for x in (1e-6, 0.1, 1.0, 3.0):
        h, hs = svclass.h_and_hstar(eta, x)
        assert hs == pytest.approx(math.pi - x, rel=1e-14)
        assert h == pytest.approx(-(math.pi - x), rel=1e-14)
        hq, hsq = svclass.h_and_hstar(eta, x, method="quad")
        assert hq == pytest.approx(h, rel=1e-10)


def test_h_zero_eta():
    eta = EtaFunction(Envelope.log_inverse(), fn=lambda s: 0.0 * s)
    h, hs = svclass.h_and_hstar(eta, 0.01)
    assert h == 0.0
    assert hs == pytest.approx(float(Envelope.log_inverse().hstar(0.01)))


def test_h_log_inverse_cross_check():
    env = Envelope.log_inverse(1.0)
    eta = EtaFunction.scaled(env, -1.0)
    x = math.exp(-2)
    h, hs = svclass.h_and_hstar(eta, x, upper=math.exp(-1))
    assert h == pytest.approx(math.log(2.0), rel=1e-12)  # log log(1/x) - log log(e)
    assert abs(h) <= hs * (1 + 1e-12)


@pytest.mark.parametrize("env", KINDS, ids=lambda e: e.kind)
def test_h_bounded_by_hstar_for_random_members(env, rng):
    x = np.geomspace(1e-8, math.pi, 60)
    for _ in range(5):
        eta = svclass.random_member(env, rng)
        assert svclass.verify_membership(eta)
        h = svclass.h_values(eta, x)
        assert np.all(np.abs(h) <= env.hstar(x) * (1 + 1e-9) + 1e-12)


@pytest.mark.parametrize("env", KINDS, ids=lambda e: e.kind)
def test_h_values_panels_match_adaptive(env, rng):
    eta = svclass.random_member(env, rng)
    x = np.array([1e-7, 1e-3, 0.2, 1.5])
    fast = svclass.h_values(eta, x)
    slow = [svclass.h_and_hstar(eta, xi, method="quad")[0] for xi in x]
    np.testing.assert_allclose(fast, slow, rtol=1e-9, atol=1e-12)


def test_verify_membership_examples():
    env = Envelope.log_inverse(1.0)
    assert svclass.verify_membership(EtaFunction.scaled(env, 0.5)).ok
    rep = svclass.verify_membership(EtaFunction.scaled(env, 2.0))
    assert not rep.ok and rep.violations
    step = svclass.step_eta(env, 0.01, float(env(0.01)))
    assert svclass.verify_membership(step).ok
    with pytest.raises(DomainError):
        svclass.verify_membership(step, grid_size=1)


def _analytic_pairs():
    x0 = math.exp(-1)
    # (L, analytic function) on x <= cap
    li = Envelope.log_inverse(1.3)
    yield (SlowlyVaryingL(EtaFunction.scaled(li, -1.0), 1.0, upper=x0),
           lambda x: np.log(1 / x) ** 1.3, x0)
    yield (SlowlyVaryingL(EtaFunction.scaled(li, 1.0), 1.0, upper=x0),
           lambda x: np.log(1 / x) ** -1.3, x0)
    ll = Envelope.loglog_inverse()
    cap = math.exp(-math.e)
    yield (SlowlyVaryingL(EtaFunction.scaled(ll, -1.0), 1.0, upper=cap),
           lambda x: np.log(np.log(1 / x)), cap)
    pw = Envelope.power(0.7, 0.5)
    yield (SlowlyVaryingL(EtaFunction.scaled(pw, 1.0), 2.0),
           lambda x: 2.0 * np.exp(-0.7 / 0.5 * (math.pi ** 0.5 - x ** 0.5)), math.pi / 2)


@pytest.mark.parametrize("pair", list(_analytic_pairs()), ids=["logrho", "loginv", "loglog", "power"])
def test_representation_consistency(pair):
    L, exact, hi = pair
    for x in np.geomspace(1e-6, min(hi, math.pi / 2), 9):
        assert svclass.eval_L(L, x, method="quad") == pytest.approx(float(exact(x)), rel=1e-6)
        assert svclass.eval_L(L, x) == pytest.approx(float(exact(x)), rel=1e-10)


@pytest.mark.parametrize("pair", list(_analytic_pairs())[:3], ids=["logrho", "loginv", "loglog"])
def test_slow_variation_dyadic(pair):
    L = pair[0]
    x = 1e-2 * 2.0 ** -np.arange(0, 40)
    dev = np.abs(L(2 * x) / L(x) - 1)
    assert np.all(np.diff(dev) < 0)


def test_L_value_at_normalisation_point():
    L = SlowlyVaryingL(EtaFunction.scaled(Envelope.loglog_inverse(), 0.3), l_pi=1.7)
    assert L(math.pi) == pytest.approx(1.7, rel=1e-14)
    assert np.all(L(np.geomspace(1e-12, math.pi, 50)) > 0)


@settings(max_examples=40, deadline=None)
@given(scale=st.floats(-1, 1), x=st.floats(1e-10, math.pi))
def test_h_bound_property(scale, x):
    env = Envelope.log_inverse(1.0)
    h, hs = svclass.h_and_hstar(EtaFunction.scaled(env, scale), x)
    assert abs(h) <= hs * (1 + 1e-12) + 1e-15

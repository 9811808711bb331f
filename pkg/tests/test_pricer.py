import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy.stats import lognorm, norm

from ladder_pricing.mc_oracle import McConfig, sample_terminal
from ladder_pricing.pricer import (
    call_price,
    lognormal_band_moments,
    price,
    put_price,
    vanilla_price,
)
from ladder_pricing.rates import (
    AffineTheta,
    HullWhite,
    MarketParams,
    TerminalLaw,
    Vasicek,
    fixed_law,
    hw_law,
    vasicek_law,
)
from ladder_pricing.strategy import (
    BandKind,
    CallStrategy,
    PutStrategy,
    call_ladder,
    call_payoff,
    ladder_for,
    payoff,
    put_ladder,
    put_payoff,
)

from .conftest import BS_CALL_ATM, BS_PUT_ATM, black_scholes

MARKET = MarketParams(100.0, 0.2, 1.0)
FIXED = fixed_law(MARKET, 0.05)
LAWS = {
    "fixed": FIXED,
    "vasicek": vasicek_law(MARKET, Vasicek(0.5, 0.02, 0.01, 0.04)),
    "hull_white": hw_law(MARKET, HullWhite(0.5, AffineTheta(0.02, 0.005), 0.01, 0.04)),
}

laws = st.builds(
    lambda spot, vol, T, r: fixed_law(MarketParams(spot, vol, T), r),
    st.floats(20.0, 300.0),
    st.floats(0.05, 0.8),
    st.floats(0.1, 5.0),
    st.floats(-0.02, 0.1),
)
call_strats = st.builds(CallStrategy, st.floats(0.01, 1.0), st.floats(0.0, 1.0), st.integers(1, 30), st.floats(50.0, 150.0))
put_strats = st.builds(PutStrategy, st.floats(0.01, 0.9), st.floats(0.0, 1.0), st.integers(1, 30), st.floats(50.0, 150.0))


def quadrature_price(s, law):
    """discount * int payoff(x) f(x) dx with scipy's adaptive quadrature, split at every kink."""
    dist = lognorm(law.log_sd, scale=math.exp(law.log_mean))
    kinks = sorted((s.strike,) + ladder_for(s).levels)
    edges = [dist.ppf(1e-16)] + [k for k in kinks if dist.ppf(1e-16) < k < dist.ppf(1 - 1e-16)] + [dist.ppf(1 - 1e-16)]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += sp_integrate.quad(lambda x: payoff(x, s) * dist.pdf(x), lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return law.discount * total


# --- band moments ----------------------------------------------------------


def test_band_moments_whole_axis():
    law = TerminalLaw(0.3, 0.09, 1.0)
    mom = lognormal_band_moments(law, 0.0, math.inf)
    assert mom.prob_mass == 1.0
    assert mom.partial_expectation == pytest.approx(math.exp(0.3 + 0.045), rel=1e-15)


def test_band_moments_vanishing_interval():
    law = TerminalLaw(0.0, 0.04, 1.0)
    mom = lognormal_band_moments(law, 1.0, 1.0 + 1e-13)
    assert mom.prob_mass == pytest.approx(0.0, abs=1e-12)
    assert mom.partial_expectation == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        lognormal_band_moments(law, 1.0, 1.0)
    with pytest.raises(ValueError):
        lognormal_band_moments(law, -1.0, 1.0)


def test_band_moments_against_density_quadrature():
    law = TerminalLaw(0.0, 0.04, 1.0)
    dist = lognorm(0.2, scale=1.0)
    mass = sp_integrate.quad(dist.pdf, 1.0, 2.0, epsabs=1e-14, epsrel=1e-14)[0]
    partial = sp_integrate.quad(lambda x: x * dist.pdf(x), 1.0, 2.0, epsabs=1e-14, epsrel=1e-14)[0]
    mom = lognormal_band_moments(law, 1.0, 2.0)
    assert abs(mom.prob_mass - mass) <= 1e-9
    assert abs(mom.partial_expectation - partial) <= 1e-9


# --- vanilla limits --------------------------------------------------------


def test_vanilla_reference_values():
    assert abs(vanilla_price("call", 100.0, FIXED) - BS_CALL_ATM) <= 1e-9
    assert abs(vanilla_price("put", 100.0, FIXED) - BS_PUT_ATM) <= 1e-9
    assert abs(call_price(CallStrategy(0.1, 0.0, 4, 100.0), FIXED).price - BS_CALL_ATM) <= 1e-9
    assert abs(put_price(PutStrategy(0.1, 0.0, 4, 100.0), FIXED).price - BS_PUT_ATM) <= 1e-9


def test_vanilla_zero_strike():
    law = LAWS["vasicek"]
    assert vanilla_price("call", 0.0, law) == pytest.approx(MARKET.spot, rel=1e-12)
    assert vanilla_price("put", 1e-12, law) == pytest.approx(0.0, abs=1e-300)
    with pytest.raises(ValueError):
        vanilla_price("straddle", 100.0, law)


@settings(max_examples=100)
@given(
    st.floats(20.0, 300.0), st.floats(20.0, 300.0), st.floats(0.05, 0.8), st.floats(0.1, 5.0),
    st.floats(-0.02, 0.1), st.floats(0.01, 0.9), st.integers(1, 30),
)
def test_beta_zero_is_black_scholes(spot, strike, vol, T, r, alpha, n):
    law = fixed_law(MarketParams(spot, vol, T), r)
    c = call_price(CallStrategy(alpha, 0.0, n, strike), law).price
    p = put_price(PutStrategy(alpha, 0.0, n, strike), law).price
    assert abs(c - black_scholes("call", spot, strike, r, vol, T)) <= 1e-10
    assert abs(p - black_scholes("put", spot, strike, r, vol, T)) <= 1e-10
    assert abs(c - vanilla_price("call", strike, law)) <= 1e-10
    assert abs(p - vanilla_price("put", strike, law)) <= 1e-10


# --- structure of the breakdown --------------------------------------------


@given(call_strats, laws)
def test_call_breakdown_invariants(s, law):
    bd = call_price(s, law)
    assert abs(bd.total_mass - 1.0) <= 1e-12
    legs = math.fsum(x for t in bd.band_terms for x in (t.stock_leg, t.cash_leg))
    assert abs(bd.price - max(bd.discount * legs, 0.0)) <= 1e-12
    assert bd.price >= 0.0
    kinds = [t.band.kind for t in bd.band_terms]
    assert kinds.count(BandKind.BAND) == s.n_trades - 1
    # bands tile (0, inf) without gaps
    bounds = [(t.lower, t.upper) for t in bd.band_terms]
    assert bounds[0][0] == 0.0 and bounds[-1][1] == math.inf
    assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))


@given(put_strats, laws)
def test_put_breakdown_invariants(s, law):
    bd = put_price(s, law)
    assert abs(bd.total_mass - 1.0) <= 1e-12
    legs = math.fsum(x for t in bd.band_terms for x in (t.stock_leg, t.cash_leg))
    assert abs(bd.price - max(bd.discount * legs, 0.0)) <= 1e-12
    bounds = [(t.lower, t.upper) for t in bd.band_terms]
    assert bounds[0][0] == 0.0 and bounds[-1][1] == math.inf
    assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))


# --- agreement with independent integrations -------------------------------


@pytest.mark.parametrize("law_name", sorted(LAWS))
@pytest.mark.parametrize(
    "strat",
    [
        CallStrategy(0.1, 1.0, 4, 100.0),
        CallStrategy(0.5, 0.6, 7, 120.0),
        CallStrategy(0.05, 0.3, 1, 90.0),
        PutStrategy(0.1, 1.0, 4, 100.0),
        PutStrategy(0.7, 0.8, 3, 90.0),
        PutStrategy(0.2, 0.3, 16, 110.0),
    ],
)
def test_closed_form_matches_payoff_quadrature(law_name, strat):
    law = LAWS[law_name]
    assert abs(price(strat, law).price - quadrature_price(strat, law)) <= 1e-9


def explicit_two_trade_call(s, law):
    """Ten-term closed form for N = 2 with one intermediate band, written out by hand."""
    mu, sig = law.log_mean, law.log_sd
    var = sig * sig
    K, beta = s.strike, s.beta
    S1, S2 = call_ladder(s).levels
    F = math.exp(mu + var / 2)
    c1 = 1 - beta * K / 2 * (1 / S1)
    c2 = 1 - beta * K / 2 * (1 / S1 + 1 / S2)
    d1 = (math.log(S1) - mu - var) / sig
    d2 = (math.log(K) - mu - var) / sig
    d3 = (math.log(S1) - mu) / sig
    d4 = (math.log(K) - mu) / sig
    d5 = (math.log(S2) - mu - var) / sig
    d6 = (math.log(S1) - mu - var) / sig
    d7 = (math.log(S2) - mu) / sig
    d8 = (math.log(S1) - mu) / sig
    d9 = (mu + var - math.log(S2)) / sig
    d10 = (mu - math.log(S2)) / sig
    N = norm.cdf
    return law.discount * (
        F * (N(d1) - N(d2))
        - K * (N(d3) - N(d4))
        + F * c1 * (N(d5) - N(d6))
        + (beta / 2 - 1) * K * (N(d7) - N(d8))
        + F * c2 * N(d9)
        + (beta - 1) * K * N(d10)
    ), (d1, d2, d3, d4, d5, d6, d7, d8, -d9, -d10)


def explicit_two_trade_put(s, law):
    mu, sig = law.log_mean, law.log_sd
    var = sig * sig
    K, beta = s.strike, s.beta
    S1, S2 = put_ladder(s).levels
    F = math.exp(mu + var / 2)
    c1 = 1 - beta * K / 2 * (1 / S1)
    c2 = 1 - beta * K / 2 * (1 / S1 + 1 / S2)
    d1 = (math.log(S2) - mu) / sig
    d2 = (math.log(S2) - mu - var) / sig
    d3 = (math.log(S1) - mu) / sig
    d4 = (math.log(S2) - mu) / sig
    d5 = (math.log(S1) - mu - var) / sig
    d6 = (math.log(S2) - mu - var) / sig
    d7 = (math.log(K) - mu) / sig
    d8 = (math.log(S1) - mu) / sig
    d9 = (math.log(K) - mu - var) / sig
    d10 = (math.log(S1) - mu - var) / sig
    N = norm.cdf
    return law.discount * (
        K * (1 - beta) * N(d1)
        - F * c2 * N(d2)
        + (1 - beta / 2) * K * (N(d3) - N(d4))
        - F * c1 * (N(d5) - N(d6))
        + K * (N(d7) - N(d8))
        - F * (N(d9) - N(d10))
    ), (d1, d2, d3, d4, d5, d6, d7, d8, d9, d10)


@pytest.mark.parametrize("law_name", sorted(LAWS))
@pytest.mark.parametrize("beta", [0.0, 0.4, 1.0])
def test_two_trade_call_matches_explicit_formula(law_name, beta):
    s = CallStrategy(0.15, beta, 2, 100.0)
    law = LAWS[law_name]
    expected, d_args = explicit_two_trade_call(s, law)
    bd = call_price(s, law)
    assert bd.price == pytest.approx(expected, abs=1e-12)
    for d in d_args:
        assert min(abs(d - x) for x in bd.d_arguments) <= 1e-12


@pytest.mark.parametrize("law_name", sorted(LAWS))
@pytest.mark.parametrize("beta", [0.0, 0.4, 1.0])
def test_two_trade_put_matches_explicit_formula(law_name, beta):
    s = PutStrategy(0.15, beta, 2, 100.0)
    law = LAWS[law_name]
    expected, d_args = explicit_two_trade_put(s, law)
    bd = put_price(s, law)
    assert bd.price == pytest.approx(expected, abs=1e-12)
    for d in d_args:
        assert min(abs(d - x) for x in bd.d_arguments) <= 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("strat", [CallStrategy(0.1, 1.0, 4, 100.0), PutStrategy(0.1, 1.0, 4, 100.0)])
def test_closed_form_within_terminal_mc(strat):
    est = sample_terminal(FIXED, lambda x: payoff(x, strat), McConfig(10**6, seed=5))
    assert est.within(price(strat, FIXED).price)


# --- economic properties ---------------------------------------------------


@given(call_strats, laws, st.floats(0.0, 1.0))
def test_call_price_non_increasing_in_beta(s, law, other):
    lo, hi = sorted((s.beta, other))
    p_lo = call_price(CallStrategy(s.alpha, lo, s.n_trades, s.strike), law).price
    p_hi = call_price(CallStrategy(s.alpha, hi, s.n_trades, s.strike), law).price
    p_0 = call_price(CallStrategy(s.alpha, 0.0, s.n_trades, s.strike), law).price
    assert p_hi <= p_lo + 1e-12
    assert p_hi <= p_0 + 1e-12


@given(put_strats, laws, st.floats(0.0, 1.0))
def test_put_price_non_increasing_in_beta(s, law, other):
    lo, hi = sorted((s.beta, other))
    p_lo = put_price(PutStrategy(s.alpha, lo, s.n_trades, s.strike), law).price
    p_hi = put_price(PutStrategy(s.alpha, hi, s.n_trades, s.strike), law).price
    p_0 = put_price(PutStrategy(s.alpha, 0.0, s.n_trades, s.strike), law).price
    assert p_hi <= p_lo + 1e-12
    assert p_hi <= p_0 + 1e-12


@pytest.mark.parametrize(
    "make", [lambda n: CallStrategy(0.1, 0.8, n, 100.0), lambda n: PutStrategy(0.3, 0.8, n, 100.0)]
)
def test_refining_the_ladder_converges(make):
    ns = [2**k for k in range(4, 12)]
    prices = [price(make(n), FIXED).price for n in ns]
    diffs = np.diff(prices)
    # Cauchy differences shrink on every doubling
    assert np.all(np.abs(diffs[1:]) < np.abs(diffs[:-1]))
    trend = np.sign(diffs[0])
    for n, d in zip(ns[1:], diffs):
        if n >= 512:  # difference between n/2 >= 256 and n
            assert np.sign(d) == trend or abs(d) <= 1e-6
    # first-order convergence: each difference is half the previous
    ratios = diffs[1:] / diffs[:-1]
    assert np.all(np.abs(ratios[-3:] - 0.5) < 0.01)


def test_degenerate_volatility_prices_the_forward():
    law = TerminalLaw(math.log(112.0), 1e-16, 0.95)
    s = CallStrategy(0.2, 1.0, 4, 100.0)
    bd = call_price(s, law)
    assert bd.price == pytest.approx(0.95 * call_payoff(112.0, s), rel=1e-12)
    assert bd.total_mass == 1.0
    ps = PutStrategy(0.2, 1.0, 4, 100.0)
    law_put = TerminalLaw(math.log(87.0), 0.0, 0.95)
    assert put_price(ps, law_put).price == pytest.approx(0.95 * put_payoff(87.0, ps), rel=1e-12)
    assert vanilla_price("put", 100.0, law_put) == pytest.approx(0.95 * 13.0, rel=1e-12)


def test_put_price_rejects_trigger_offset():
    with pytest.raises(ValueError, match="trigger_offset"):
        put_price(PutStrategy(0.1, 0.5, 4, 100.0, trigger_offset=2.0), FIXED)

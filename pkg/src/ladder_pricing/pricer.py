"""Closed-form prices for ladder-hedged calls and puts.

On every band of the terminal-price axis the payoff is ``stock_coef * S_T +
cash_coef``, so its expectation is ``stock_coef * E[S_T; band] + cash_coef *
P(band)``. Both moments of a lognormal over an interval are normal-CDF
differences. The price is the discounted sum over all bands, including the
out-of-money band whose coefficients are zero (kept so band masses tile the
whole axis).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

from .numerics import normal_interval
from .rates import TerminalLaw
from .strategy import (
    Band,
    BandKind,
    CallStrategy,
    PutStrategy,
    call_ladder,
    inverse_level_sums,
    payoff,
    put_ladder,
    vanilla_payoff,
)

DEGENERATE_LOG_VAR = 1e-14


@dataclass(frozen=True)
class BandMoments:
    prob_mass: float
    partial_expectation: float
    d_arguments: tuple[float, ...] = ()


def _log_or_inf(x: float) -> float:
    if x == 0.0:
        return -math.inf
    if math.isinf(x):
        return math.inf
    return math.log(x)


def lognormal_band_moments(law: TerminalLaw, lower: float, upper: float) -> BandMoments:
    """Probability mass and partial expectation E[S_T 1{lower < S_T < upper}].

    ``lower = 0`` and ``upper = inf`` are allowed. The returned ``d_arguments``
    are the finite CDF arguments used, cash-leg pair first then stock-leg pair.
    """
    if not (0.0 <= lower < upper):
        raise ValueError(f"band bounds must satisfy 0 <= lower < upper, got ({lower}, {upper})")
    mu, var = law.log_mean, law.log_var
    sd = math.sqrt(var)
    lo, hi = _log_or_inf(lower), _log_or_inf(upper)
    z_lo, z_hi = (lo - mu) / sd, (hi - mu) / sd
    # shifting by sd moves to the size-biased (stock) measure
    mass = normal_interval(z_lo, z_hi)
    partial = math.exp(mu + 0.5 * var) * normal_interval(z_lo - sd, z_hi - sd)
    d_args = tuple(d for d in (z_hi, z_lo, z_hi - sd, z_lo - sd) if math.isfinite(d))
    return BandMoments(mass, partial, d_args)


@dataclass(frozen=True)
class BandTerm:
    band: Band
    lower: float
    upper: float
    stock_coef: float
    cash_coef: float
    prob_mass: float
    partial_expectation: float

    @property
    def stock_leg(self) -> float:
        return self.stock_coef * self.partial_expectation

    @property
    def cash_leg(self) -> float:
        return self.cash_coef * self.prob_mass

    @property
    def value(self) -> float:
        return self.stock_leg + self.cash_leg


@dataclass(frozen=True)
class PriceBreakdown:
    price: float
    discount: float
    band_terms: tuple[BandTerm, ...]
    d_arguments: tuple[float, ...] = field(default=())

    @property
    def total_mass(self) -> float:
        return math.fsum(t.prob_mass for t in self.band_terms)

    def mass_of(self, kind: BandKind) -> float:
        return math.fsum(t.prob_mass for t in self.band_terms if t.band.kind is kind)


def _call_bands(s: CallStrategy):
    """(band, lower, upper, stock_coef, cash_coef) for every call band, low to high."""
    ladder = call_ladder(s)
    levels = ladder.levels
    k, n, beta = s.strike, s.n_trades, s.beta
    c = inverse_level_sums(ladder)
    yield Band(BandKind.OUT_OF_MONEY), 0.0, k, 0.0, 0.0
    yield Band(BandKind.VANILLA), k, levels[0], 1.0, -k
    for m in range(1, n):
        yield (
            Band(BandKind.BAND, m),
            levels[m - 1],
            levels[m],
            1.0 - beta * k / n * c[m],
            (beta * m / n - 1.0) * k,
        )
    yield Band(BandKind.SATURATED, n), levels[-1], math.inf, 1.0 - beta * k / n * c[n], (beta - 1.0) * k


def _put_bands(s: PutStrategy):
    """(band, lower, upper, stock_coef, cash_coef) for every put band, low to high."""
    ladder = put_ladder(s)
    levels = ladder.levels
    k, n, beta = s.strike, s.n_trades, s.beta
    c = inverse_level_sums(ladder)
    yield Band(BandKind.SATURATED, n), 0.0, levels[-1], -(1.0 - beta * k / n * c[n]), (1.0 - beta) * k
    for m in range(n - 1, 0, -1):
        yield (
            Band(BandKind.BAND, m),
            levels[m],
            levels[m - 1],
            -(1.0 - beta * k / n * c[m]),
            (1.0 - beta * m / n) * k,
        )
    yield Band(BandKind.VANILLA), levels[0], k, -1.0, k
    yield Band(BandKind.OUT_OF_MONEY), k, math.inf, 0.0, 0.0


def _assemble(bands, law: TerminalLaw, strategy) -> PriceBreakdown:
    if law.log_var < DEGENERATE_LOG_VAR:
        return _degenerate(bands, law, strategy)
    terms = []
    d_args: list[float] = []
    for band, lo, hi, a_coef, b_coef in bands:
        mom = lognormal_band_moments(law, lo, hi)
        terms.append(BandTerm(band, lo, hi, a_coef, b_coef, mom.prob_mass, mom.partial_expectation))
        if band.kind is not BandKind.OUT_OF_MONEY:
            d_args.extend(mom.d_arguments)
    undiscounted = math.fsum(x for t in terms for x in (t.stock_leg, t.cash_leg))
    price = max(law.discount * undiscounted, 0.0)
    return PriceBreakdown(price, law.discount, tuple(terms), tuple(d_args))


def _degenerate(bands, law, strategy) -> PriceBreakdown:
    # point mass at the forward; the band containing it carries all the probability
    fwd = law.forward
    terms = []
    for band, lo, hi, a_coef, b_coef in bands:
        inside = lo < fwd <= hi if band.kind is not BandKind.OUT_OF_MONEY else lo <= fwd < hi
        mass = 1.0 if inside else 0.0
        terms.append(BandTerm(band, lo, hi, a_coef, b_coef, mass, fwd * mass))
    price = law.discount * payoff(fwd, strategy)
    return PriceBreakdown(price, law.discount, tuple(terms), ())


def call_price(s: CallStrategy, law: TerminalLaw) -> PriceBreakdown:
    return _assemble(list(_call_bands(s)), law, s)


def put_price(s: PutStrategy, law: TerminalLaw) -> PriceBreakdown:
    return _assemble(list(_put_bands(s)), law, s)


def price(s: CallStrategy | PutStrategy, law: TerminalLaw) -> PriceBreakdown:
    return call_price(s, law) if isinstance(s, CallStrategy) else put_price(s, law)


def vanilla_price(kind: Literal["call", "put"], strike: float, law: TerminalLaw) -> float:
    """European call/put price from the terminal law (Black-Scholes form)."""
    if law.log_var < DEGENERATE_LOG_VAR:
        return law.discount * vanilla_payoff(law.forward, strike, kind)
    if kind == "call":
        mom = lognormal_band_moments(law, strike, math.inf)
        return law.discount * (mom.partial_expectation - strike * mom.prob_mass)
    if kind == "put":
        mom = lognormal_band_moments(law, 0.0, strike)
        return law.discount * (strike * mom.prob_mass - mom.partial_expectation)
    raise ValueError(f"kind must be 'call' or 'put', got {kind!r}")

"""Terminal laws of ln S_T and zero-coupon discount factors.

Under the T-forward measure the forward ``S_t / P(t, T)`` is a lognormal
martingale, so each law is fully described by the variance of ``ln S_T``
and the bond price ``P(0, T)``; the mean follows from

    log_mean = ln(S0 / P(0, T)) - log_var / 2.

Short-rate dynamics (both Gaussian, driver independent of the equity's):

    Vasicek:     dr = (theta    - a r) dt + rate_vol dW2
    Hull-White:  dr = (theta(t) - a r) dt + rate_vol dW2
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate


@dataclass(frozen=True)
class MarketParams:
    spot: float
    equity_vol: float
    maturity: float

    def __post_init__(self):
        for name in ("spot", "equity_vol", "maturity"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class TerminalLaw:
    log_mean: float
    log_var: float
    discount: float

    def __post_init__(self):
        if not math.isfinite(self.log_mean):
            raise ValueError(f"log_mean must be finite, got {self.log_mean}")
        if not (self.log_var >= 0 and math.isfinite(self.log_var)):
            raise ValueError(f"log_var must be non-negative, got {self.log_var}")
        if not (self.discount > 0 and math.isfinite(self.discount)):
            raise ValueError(f"discount must be positive, got {self.discount}")

    @property
    def log_sd(self) -> float:
        return math.sqrt(self.log_var)

    @property
    def forward(self) -> float:
        """E[S_T] under the pricing measure."""
        return math.exp(self.log_mean + 0.5 * self.log_var)

    def shifted(self, log_mean_shift: float) -> "TerminalLaw":
        return TerminalLaw(self.log_mean + log_mean_shift, self.log_var, self.discount)


# ---------------------------------------------------------------------------
# drift-level functions for Hull-White
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantTheta:
    value: float

    def __call__(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), self.value)
        return self.value

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def to_dict(self) -> dict:
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class AffineTheta:
    intercept: float
    slope: float

    def __call__(self, t):
        return self.intercept + self.slope * t

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def to_dict(self) -> dict:
        return {"type": "affine", "intercept": self.intercept, "slope": self.slope}


@dataclass(frozen=True)
class PiecewiseConstantTheta:
    """``values[i]`` applies on ``[times[i-1], times[i])`` with ``times[-1] = 0``;
    the last value extends past the final breakpoint."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.times) + 1:
            raise ValueError("piecewise theta needs exactly one more value than breakpoints")
        if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise ValueError("piecewise theta breakpoints must be strictly increasing")
        if self.times and self.times[0] <= 0:
            raise ValueError("piecewise theta breakpoints must be positive")

    def __call__(self, t):
        idx = np.searchsorted(self.times, t, side="right")
        out = np.asarray(self.values)[idx]
        return float(out) if np.ndim(t) == 0 else out

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.times

    def to_dict(self) -> dict:
        return {"type": "piecewise", "times": list(self.times), "values": list(self.values)}


# ---------------------------------------------------------------------------
# rate models
# ---------------------------------------------------------------------------


def _check_ou(a, rate_vol):
    if not (a > 0 and math.isfinite(a)):
        raise ValueError(f"mean-reversion speed a must be positive, got {a}")
    if not (rate_vol >= 0 and math.isfinite(rate_vol)):
        raise ValueError(f"rate_vol must be non-negative, got {rate_vol}")


@dataclass(frozen=True)
class FixedRate:
    r: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise ValueError(f"r must be finite, got {self.r}")


@dataclass(frozen=True)
class Vasicek:
    a: float
    theta: float
    rate_vol: float
    r0: float

    def __post_init__(self):
        _check_ou(self.a, self.rate_vol)


@dataclass(frozen=True)
class HullWhite:
    a: float
    theta_fn: Callable[[float], float]
    rate_vol: float
    r0: float

    def __post_init__(self):
        _check_ou(self.a, self.rate_vol)
        if not callable(self.theta_fn):
            raise TypeError("theta_fn must be callable")


RateModel = Union[FixedRate, Vasicek, HullWhite]


def _b(a: float, t: float) -> float:
    """(1 - e^{-a t}) / a, evaluated without cancellation for small a*t."""
    return -math.expm1(-a * t) / a


def rate_integral_variance(a: float, rate_vol: float, t: float) -> float:
    """Var(int_0^t r_s ds) for a Gaussian short rate with constant vol."""
    x = a * t
    if x < 0.1:
        # t - 2B(a) + B(2a) loses ~all digits to cancellation when a*t is small;
        # sum its Taylor series instead: sum_k (-1)^k (2^k - 2) a^(k-2) t^(k+1) / (k+1)!
        total = 0.0
        term = t**3 / 6.0  # a^0 t^3 / 3!
        for k in range(2, 40):
            total += (-1) ** k * (2**k - 2) * term
            term *= x / (k + 2)
            if term * 2**k < 1e-18 * abs(total):
                break
        return rate_vol**2 * total
    b1 = _b(a, t)
    b2 = _b(2.0 * a, t)
    return rate_vol**2 / a**2 * (t - 2.0 * b1 + b2)


def _law_from_bond(m: MarketParams, log_var: float, bond: float) -> TerminalLaw:
    log_mean = math.log(m.spot) - math.log(bond) - 0.5 * log_var
    return TerminalLaw(log_mean=log_mean, log_var=log_var, discount=bond)


def fixed_law(m: MarketParams, r: float) -> TerminalLaw:
    t = m.maturity
    return TerminalLaw(
        log_mean=math.log(m.spot) + (r - 0.5 * m.equity_vol**2) * t,
        log_var=m.equity_vol**2 * t,
        discount=math.exp(-r * t),
    )


def vasicek_bond(v: Vasicek, T: float) -> float:
    """Zero-coupon bond price P(0, T) under Vasicek."""
    a, s2 = v.a, v.rate_vol
    b = _b(a, T)
    exponent = (b - T) * (v.theta / a - s2**2 / (2.0 * a**2)) - s2**2 / (4.0 * a) * b**2
    return math.exp(exponent - v.r0 * b)


def vasicek_law(m: MarketParams, v: Vasicek) -> TerminalLaw:
    t = m.maturity
    log_var = rate_integral_variance(v.a, v.rate_vol, t) + m.equity_vol**2 * t
    return _law_from_bond(m, log_var, vasicek_bond(v, t))


def hw_theta_integral(
    h: HullWhite, T: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """int_0^T e^{-a t} int_0^t theta(s) e^{a s} ds dt, as the single integral
    int_0^T theta(s) (1 - e^{-a (T - s)}) / a ds."""
    a = h.a
    theta = h.theta_fn
    return integrate(
        lambda s: theta(s) * _b(a, T - s),
        0.0,
        T,
        spec,
        breakpoints=getattr(theta, "breakpoints", ()),
    )


def hw_bond(h: HullWhite, T: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Zero-coupon bond price P(0, T) under Hull-White."""
    exponent = (
        -h.r0 * _b(h.a, T)
        - hw_theta_integral(h, T, spec)
        + 0.5 * rate_integral_variance(h.a, h.rate_vol, T)
    )
    return math.exp(exponent)


def hw_law(m: MarketParams, h: HullWhite, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> TerminalLaw:
    t = m.maturity
    log_var = rate_integral_variance(h.a, h.rate_vol, t) + m.equity_vol**2 * t
    return _law_from_bond(m, log_var, hw_bond(h, t, spec))


def terminal_law(
    m: MarketParams, model: RateModel, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> TerminalLaw:
    if isinstance(model, FixedRate):
        return fixed_law(m, model.r)
    if isinstance(model, Vasicek):
        return vasicek_law(m, model)
    if isinstance(model, HullWhite):
        return hw_law(m, model, spec)
    raise TypeError(f"unknown rate model {model!r}")


def bond_price(model: RateModel, T: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    if isinstance(model, FixedRate):
        return math.exp(-model.r * T)
    if isinstance(model, Vasicek):
        return vasicek_bond(model, T)
    if isinstance(model, HullWhite):
        return hw_bond(model, T, spec)
    raise TypeError(f"unknown rate model {model!r}")

"""Trade ladders and payoff functions for the discrete linear investment strategy.

A call holder buys ``beta/N`` of the notional each time the price rises through
one of ``N`` equally spaced levels between ``K`` and ``(1 + alpha) K``; a put
holder sells symmetrically on the way down to ``(1 - alpha) K``. The hedge
income is netted against the vanilla payoff, which gives the piecewise-linear
value functions below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np


def _check_common(alpha, beta, n_trades, strike):
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if isinstance(n_trades, bool) or int(n_trades) != n_trades or n_trades < 1:
        raise ValueError(f"n_trades must be a positive integer, got {n_trades}")
    if not (strike > 0 and math.isfinite(strike)):
        raise ValueError(f"strike must be positive, got {strike}")


@dataclass(frozen=True)
class CallStrategy:
    alpha: float
    beta: float
    n_trades: int
    strike: float

    def __post_init__(self):
        _check_common(self.alpha, self.beta, self.n_trades, self.strike)
        object.__setattr__(self, "n_trades", int(self.n_trades))

    @property
    def spacing(self) -> float:
        return self.alpha * self.strike / self.n_trades


@dataclass(frozen=True)
class PutStrategy:
    alpha: float
    beta: float
    n_trades: int
    strike: float
    trigger_offset: float = 0.0

    def __post_init__(self):
        _check_common(self.alpha, self.beta, self.n_trades, self.strike)
        object.__setattr__(self, "n_trades", int(self.n_trades))
        if not (0.0 <= self.trigger_offset < self.strike):
            raise ValueError(
                f"trigger_offset must lie in [0, strike), got {self.trigger_offset}"
            )

    @property
    def spacing(self) -> float:
        return self.alpha * self.strike / self.n_trades


@dataclass(frozen=True)
class TradeLadder:
    levels: tuple[float, ...]
    spacing: float
    direction: Literal["ascending", "descending"]

    @property
    def n_trades(self) -> int:
        return len(self.levels)


def call_ladder(s: CallStrategy) -> TradeLadder:
    k, n = s.strike, s.n_trades
    # K + n*(alpha*K/N) computed as K*(1 + alpha*n/N) so S_N == (1+alpha)K exactly
    levels = tuple(k * (1.0 + s.alpha * (i / n)) for i in range(1, n + 1))
    return TradeLadder(levels=levels, spacing=s.spacing, direction="ascending")


def put_ladder(s: PutStrategy) -> TradeLadder:
    if s.trigger_offset != 0.0:
        raise ValueError(
            f"trigger_offset must be 0 for a priceable put ladder, got {s.trigger_offset}"
        )
    if s.alpha >= 1.0:
        raise ValueError(
            f"degenerate put ladder: alpha={s.alpha} puts the last level at or below zero"
        )
    k, n = s.strike, s.n_trades
    levels = tuple(k * (1.0 - s.alpha * (i / n)) for i in range(1, n + 1))
    return TradeLadder(levels=levels, spacing=s.spacing, direction="descending")


def ladder_for(s: CallStrategy | PutStrategy) -> TradeLadder:
    return call_ladder(s) if isinstance(s, CallStrategy) else put_ladder(s)


class BandKind(str, Enum):
    OUT_OF_MONEY = "out_of_money"
    VANILLA = "vanilla"
    BAND = "band"
    SATURATED = "saturated"


@dataclass(frozen=True)
class Band:
    """Region of the terminal price axis on which a payoff is affine.

    ``trades`` is the number of ladder trades executed in the region
    (0 for out-of-money and vanilla, ``m`` for ``Band(m)``, ``N`` when
    saturated).
    """

    kind: BandKind
    trades: int = 0

    def __str__(self):
        if self.kind is BandKind.BAND:
            return f"band({self.trades})"
        return self.kind.value


def band_index(s_T: float, ladder: TradeLadder, strike: float) -> Band:
    """Locate ``s_T`` on the payoff's band structure.

    Calls use left-closed bands ``[S_m, S_{m+1})``; puts use right-closed
    bands ``(S_{m+1}, S_m]``.
    """
    n = ladder.n_trades
    if ladder.direction == "ascending":
        if s_T < strike:
            return Band(BandKind.OUT_OF_MONEY)
        m = int(np.searchsorted(ladder.levels, s_T, side="right"))
    else:
        if s_T > strike:
            return Band(BandKind.OUT_OF_MONEY)
        ascending = ladder.levels[::-1]
        m = n - int(np.searchsorted(ascending, s_T, side="left"))
    if m == 0:
        return Band(BandKind.VANILLA)
    if m == n:
        return Band(BandKind.SATURATED, n)
    return Band(BandKind.BAND, m)


def inverse_level_sums(ladder: TradeLadder) -> np.ndarray:
    """Cumulative sums ``c_m = sum_{n<=m} 1/S_n`` for ``m = 0..N`` (``c_0 = 0``)."""
    return np.concatenate(([0.0], np.cumsum(1.0 / np.asarray(ladder.levels))))


def _trades_executed(s_T, ladder: TradeLadder) -> np.ndarray:
    levels = np.asarray(ladder.levels)
    if ladder.direction == "ascending":
        return np.searchsorted(levels, s_T, side="right")
    return ladder.n_trades - np.searchsorted(levels[::-1], s_T, side="left")


def _as_output(values, s_T):
    return float(values) if np.ndim(s_T) == 0 else values


def call_payoff(s_T, s: CallStrategy):
    """Terminal value of the call net of the holder's ladder purchases.

    Accepts a scalar or an array of terminal prices.
    """
    x = np.asarray(s_T, dtype=float)
    ladder = call_ladder(s)
    k, n = s.strike, s.n_trades
    m = _trades_executed(x, ladder)
    c = inverse_level_sums(ladder)[m]
    value = x - (s.beta * k / n) * x * c + (s.beta * m / n - 1.0) * k
    return _as_output(np.where(x < k, 0.0, value), s_T)


def put_payoff(s_T, s: PutStrategy):
    """Terminal value of the put net of the holder's ladder sales, per share.

    Accepts a scalar or an array of terminal prices.
    """
    x = np.asarray(s_T, dtype=float)
    ladder = put_ladder(s)
    k, n = s.strike, s.n_trades
    m = _trades_executed(x, ladder)
    c = inverse_level_sums(ladder)[m]
    value = (1.0 - s.beta * m / n) * k - x + (s.beta * k / n) * x * c
    return _as_output(np.where(x > k, 0.0, value), s_T)


def payoff(s_T, s: CallStrategy | PutStrategy):
    return call_payoff(s_T, s) if isinstance(s, CallStrategy) else put_payoff(s_T, s)


def vanilla_payoff(s_T, strike: float, kind: Literal["call", "put"]):
    x = np.asarray(s_T, dtype=float)
    out = np.maximum(x - strike, 0.0) if kind == "call" else np.maximum(strike - x, 0.0)
    return _as_output(out, s_T)


def trade_income(s: float, strat: PutStrategy, capital: float) -> float:
    """Cumulative income from the put holder's ladder sales when the price ends at ``s``.

    Each executed trade sells ``beta*A/(N*S_n)`` shares at ``S_n``; the income
    is marked against the terminal price.
    """
    ladder = put_ladder(strat)
    per_trade = strat.beta * capital / strat.n_trades
    return math.fsum(per_trade / lvl * (lvl - s) for lvl in ladder.levels if s <= lvl)


def writer_loss(s: float, strat: PutStrategy, capital: float) -> float:
    """Option writer's loss: vanilla exposure ``(A/K)(K - S)`` less the hedge income."""
    if not capital > 0:
        raise ValueError(f"capital must be positive, got {capital}")
    if s > strat.strike:
        return 0.0
    shares = capital / strat.strike
    return shares * (strat.strike - s) - trade_income(s, strat, capital)

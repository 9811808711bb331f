"""Closed-form and Monte Carlo pricing of European options held with a
discrete linear investment strategy, under fixed, Vasicek and Hull-White
short rates."""

from .mc_oracle import McConfig, McEstimate, sample_terminal, simulate_paths
from .pricer import PriceBreakdown, call_price, price, put_price, vanilla_price
from .rates import (
    AffineTheta,
    ConstantTheta,
    FixedRate,
    HullWhite,
    MarketParams,
    PiecewiseConstantTheta,
    TerminalLaw,
    bond_price,
    Vasicek,
    terminal_law,
)
from .strategy import CallStrategy, PutStrategy, call_payoff, put_payoff

__version__ = "0.1.0"

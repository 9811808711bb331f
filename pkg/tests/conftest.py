import math

import pytest
from scipy.stats import norm

# independent reference values (40-digit mpmath evaluations)
BS_CALL_ATM = 10.450583572185567  # S0=K=100, r=0.05, vol=0.2, T=1
BS_PUT_ATM = 5.573526022256968
PHI_1 = 0.8413447460685429


def black_scholes(kind, spot, strike, r, vol, T):
    """Textbook Black-Scholes with scipy's normal CDF; shares nothing with the package."""
    d1 = (math.log(spot / strike) + (r + 0.5 * vol * vol) * T) / (vol * math.sqrt(T))
    d2 = d1 - vol * math.sqrt(T)
    if kind == "call":
        return spot * norm.cdf(d1) - strike * math.exp(-r * T) * norm.cdf(d2)
    return strike * math.exp(-r * T) * norm.cdf(-d2) - spot * norm.cdf(-d1)


@pytest.fixture
def bs():
    return black_scholes

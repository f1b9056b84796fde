import math

import pytest

from hdhn.model import HdhnConfig, TierParams, default_two_tier_config


@pytest.fixture
def two_tier():
    """Two-tier default parameter set (tier 0 all-FD, tier 1 all-HD)."""
    return default_two_tier_config()


@pytest.fixture
def single_hd():
    """One HD tier with equal AP and user power, pathloss exponent 4."""
    return HdhnConfig([TierParams(1e-3, 4.0, 1.0, 30.0, 30.0)])


@pytest.fixture
def mixed_alpha():
    """Two tiers with different pathloss exponents: no closed forms apply."""
    return HdhnConfig([
        TierParams(1e-3, 4.0, 1.0, 30.0, 3.0, 0.4, -40.0),
        TierParams(1e-3, 3.5, 1.0, 30.0, 6.0, 0.2, -30.0),
    ])


@pytest.fixture
def perfect_ic(two_tier):
    """Default set with perfect cancellation and mixed FD portions."""
    return (two_tier.replace_tier(0, self_ic_db=-math.inf, fd_portion=0.6)
            .replace_tier(1, self_ic_db=-math.inf, fd_portion=0.25))

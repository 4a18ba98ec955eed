import random

import pytest

from accentshift import default_inventory, default_ruleset


@pytest.fixture(scope="session")
def inventory():
    return default_inventory()


@pytest.fixture(scope="session")
def ruleset():
    return default_ruleset()


def random_ipa(rng: random.Random, max_tokens: int = 40) -> str:
    """Random string of inventory symbols and spaces (edges included)."""
    symbols = sorted(default_inventory().entries) + [" "]
    n = rng.randrange(max_tokens + 1)
    return "".join(rng.choice(symbols) for _ in range(n))

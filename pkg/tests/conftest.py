import numpy as np
import pytest

from kqic import validate


def make_dataset(rng, n, censor_prob=0.4):
    """Random valid dataset: uniform entries, exponential gaps, Bernoulli flags."""
    entry = rng.uniform(0.0, 2.0, n)
    observed = entry + rng.exponential(1.0, n)
    event = rng.random(n) >= censor_prob
    if censor_prob == 0.0:
        event = np.ones(n, dtype=bool)
    return validate(list(zip(entry, observed, event.astype(int))))


def make_loose_dataset(rng, n, censor_prob=0.3):
    """Random dataset with slack between entries and observed times.

    Entry times all sit below the shortest observed time with high
    probability, so whole-permutation rejection sampling stays cheap.
    """
    entry = rng.uniform(0.0, 1.0, n)
    observed = entry + 0.5 + rng.exponential(1.0, n)
    event = rng.random(n) >= censor_prob
    return validate(list(zip(entry, observed, event.astype(int))))


@pytest.fixture(scope="session")
def dataset_batch():
    """100 random datasets with mixed censoring, n in [3, 50]."""
    rng = np.random.default_rng(20240817)
    batch = []
    for _ in range(100):
        n = int(rng.integers(3, 51))
        batch.append(make_dataset(rng, n, censor_prob=float(rng.uniform(0.0, 0.6))))
    return batch


@pytest.fixture(scope="session")
def uncensored_batch():
    """100 random fully-observed datasets with distinct times."""
    rng = np.random.default_rng(9091)
    batch = []
    for _ in range(100):
        n = int(rng.integers(3, 51))
        batch.append(make_dataset(rng, n, censor_prob=0.0))
    return batch

import numpy as np
import pytest

import bellbox as bb


@pytest.fixture(scope="session")
def chained_target() -> bb.Behavior:
    """Singlet at angles (120, 0, 60) degrees on both sides, B outputs swapped.

    The reference nonlocal behavior: its chained Wigner value at (1, 2, 0)
    is exactly -1/8.
    """
    plan = bb.MeasurementPlan.from_degrees([120.0, 0.0, 60.0], [120.0, 0.0, 60.0])
    behavior = bb.behavior_from_state(bb.SINGLET, plan)
    return bb.relabel_outputs(behavior, "B", (1, 0))


@pytest.fixture(scope="session")
def pr_box() -> bb.Behavior:
    """Maximally nonlocal nonsignalling box: a xor b = alpha and beta."""
    scenario = bb.Scenario(2, 2)
    table = np.zeros(scenario.shape)
    for alpha in range(2):
        for beta in range(2):
            for a in range(2):
                for b in range(2):
                    if (a ^ b) == (alpha & beta):
                        table[alpha, beta, a, b] = 0.5
    return bb.validate_behavior(scenario, table)


def random_behavior(rng: np.random.Generator, scenario: bb.Scenario) -> bb.Behavior:
    """A random behavior: independent random distribution per block."""
    raw = rng.random(scenario.shape) + 1e-3
    raw /= raw.sum(axis=(2, 3), keepdims=True)
    return bb.validate_behavior(scenario, raw)


def random_local_model(
    rng: np.random.Generator, strategies: list[bb.LocalStrategy], max_support: int = 8
) -> bb.LocalModel:
    """A random sparse mixture over the given strategy list."""
    support = rng.integers(1, max_support + 1)
    picks = rng.choice(len(strategies), size=support, replace=False)
    weights = rng.dirichlet(np.ones(support))
    return bb.LocalModel(tuple(strategies[i] for i in picks), weights)

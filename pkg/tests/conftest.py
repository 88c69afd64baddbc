import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# derandomized so the suite is reproducible run to run
settings.register_profile(
    "repo", deadline=None, max_examples=40, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def jitter_biases(net, rng):
    """Nonzero biases keep ReLU pre-activations off the kink for difference checks."""
    from dataclasses import replace

    from grouplift.nncore import DenseNetwork

    return DenseNetwork(tuple(replace(l, bias=rng.uniform(0.05, 0.3, l.out_dim)) for l in net.layers), net.input_dim)

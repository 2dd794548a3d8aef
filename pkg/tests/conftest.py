import math

import pytest
from hypothesis import settings

from duffing_decay.model import (ForcingSeries, Linear, ModelSpec, PiecewiseLinear, PolyFourier,
                                 SinePerturbed, cos_forcing, linear_model)

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")

TWO_PI = 2 * math.pi


def sine_model():
    return ModelSpec("sine", 0.5, TWO_PI, SinePerturbed(0.2, 0.05), cos_forcing(0.1))


def bridge_model(h=None):
    return ModelSpec("bridge", 1.0, TWO_PI,
                     PiecewiseLinear(ForcingSeries(TWO_PI, 0.45), ForcingSeries(TWO_PI, 0.3)),
                     cos_forcing(1.0) if h is None else h)


def forced_linear(k, c=1.0):
    return linear_model(c, k, cos_forcing(1.0))


@pytest.fixture
def sine():
    return sine_model()


@pytest.fixture
def bridge():
    return bridge_model()


def random_model(rng, kind=None):
    """A random model of the given variant with moderate coefficients (T = 2 pi)."""
    kinds = ["linear", "poly_fourier", "sine_perturbed", "piecewise_linear"]
    kind = kind or kinds[rng.integers(4)]
    c = float(rng.uniform(0.2, 1.5))
    h = ForcingSeries(TWO_PI, float(rng.uniform(-0.2, 0.2)),
                      ((1, float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-0.5, 0.5))),))
    if kind == "linear":
        g = Linear(float(rng.uniform(0.05, 1.0)))
    elif kind == "sine_perturbed":
        g = SinePerturbed(float(rng.uniform(0.1, 0.5)), float(rng.uniform(-0.1, 0.1)))
    elif kind == "poly_fourier":
        p1 = ForcingSeries(TWO_PI, float(rng.uniform(0.1, 0.6)), ((1, float(rng.uniform(-0.1, 0.1)), 0.0),))
        p3 = ForcingSeries(TWO_PI, float(rng.uniform(0.0, 0.05)))
        g = PolyFourier(((1, p1), (3, p3)))
    else:
        a = ForcingSeries(TWO_PI, float(rng.uniform(0.3, 0.6)), ((1, float(rng.uniform(-0.05, 0.05)), 0.0),))
        g = PiecewiseLinear(a, ForcingSeries(TWO_PI, float(rng.uniform(0.2, 0.5))))
    return ModelSpec(f"random-{kind}", c, TWO_PI, g, h)

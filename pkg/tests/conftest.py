import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from plateauflow import spectral

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def ellipse_points(count=64, a=2.0, b=1.0):
    t = 2 * np.pi * np.arange(count) / count
    return np.column_stack([a * np.cos(t), b * np.sin(t)])


def trefoil_points(count=96):
    t = 2 * np.pi * np.arange(count) / count
    return np.column_stack([np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)])


def on_circle(field, max_mode):
    """Pointwise normalization of a planar field, analyzed at ``max_mode``."""
    def f(phi):
        v = spectral.eval_trace(field, phi)
        return v / np.linalg.norm(v, axis=1, keepdims=True)
    return spectral.from_function(f, max_mode)

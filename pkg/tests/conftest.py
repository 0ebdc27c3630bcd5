import numpy as np
import pytest

from procfp.trace import MetricSchema, TimeSeries, Trace


def make_trace(values, interval=0.25, names=None):
    """Build a trace from an (n_metrics, length) array."""
    values = np.asarray(values, dtype=float)
    if names is None:
        names = tuple(f"m{i + 1}" for i in range(values.shape[0]))
    return Trace(
        schema=MetricSchema(tuple(names)),
        series=tuple(TimeSeries(row, interval) for row in values),
    )


@pytest.fixture
def random_trace():
    def build(seed=0, n=3, length=256, interval=0.25):
        rng = np.random.default_rng(seed)
        return make_trace(rng.standard_normal((n, length)), interval=interval)

    return build

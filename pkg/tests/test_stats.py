import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdseloc.errors import InsufficientDataError
from tdseloc.stats import loglog_fit


@settings(max_examples=50, deadline=None)
@given(st.floats(-4, 2), st.floats(0.01, 100))
def test_power_law_recovered(p, c):
    t = np.geomspace(1, 1000, 12)
    fit = loglog_fit(t, c * t ** p)
    assert fit.slope == pytest.approx(p, abs=1e-9)
    assert fit.predict(7.0) == pytest.approx(c * 7.0 ** p, rel=1e-8)


def test_nonpositive_samples_dropped():
    t = np.array([1.0, 2, 4, 8])
    fit = loglog_fit(t, np.array([1.0, 0.0, 0.25, -1]))
    assert fit.n == 2 and fit.slope == pytest.approx(-1.0)


def test_too_few_points():
    with pytest.raises(InsufficientDataError):
        loglog_fit([1.0, 2.0], [1.0, np.nan])

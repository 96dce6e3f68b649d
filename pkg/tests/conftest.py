"""
Shared fixtures: hand-built realizations and normalized parameter sets.
"""

import pytest

from broadcast_sim.network_model import ModelParams, Realization, Window


@pytest.fixture
def unit_params():
    """alpha=2 with p_t = tau = 1, so the transmission radius is 1."""
    return ModelParams(alpha=2.0, lam=1.0)


@pytest.fixture
def chain_1d():
    """Decodes in two rounds at alpha=2: 0.5 first, then 1.4 from {0, 0.5}."""
    return Realization.from_points([0.0, 0.5, 1.4])


@pytest.fixture
def stranded_1d():
    """The node at 3 never hears the source at alpha=2."""
    return Realization.from_points([0.0, 3.0])


@pytest.fixture
def event_line():
    """Hand realization with levels (0, 1] and (1, 3] holding 2 and 3 nodes."""
    return Realization.from_points([0.0, 0.3, 0.7, 1.5, 2.0, 2.9], window=Window(1, 6.0), lam=1.0)


@pytest.fixture
def source_only_1d():
    return Realization.from_points([], window=Window(1, 10.0))

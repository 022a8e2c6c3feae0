import pytest

from ehrelay import default_params


@pytest.fixture
def params():
    """Reference operating point: 40 dBm, N0 = 1e-4 W, eta 0.7, 5 m hops."""
    return default_params()

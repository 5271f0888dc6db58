import pytest
from mpmath import mp

from chlab.precision import DEFAULT_PRECISION_BITS


@pytest.fixture(autouse=True)
def _reset_precision():
    mp.prec = DEFAULT_PRECISION_BITS
    yield
    mp.prec = DEFAULT_PRECISION_BITS

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from modelset.scheme import EuclideanScheme, ModelSet  # noqa: E402
from modelset.windows import BoxWindow  # noqa: E402

ZSQRT2_JSON = {
    "type": "euclidean",
    "d": 1,
    "m": 1,
    "basis": [[1, 1.41421356237309], [1, -1.41421356237309]],
    "exact_form": "zsqrt2",
    "window": {"kind": "box", "half_widths": [0.8]},
}


@pytest.fixture(scope="session")
def zscheme():
    return EuclideanScheme.zsqrt2()


@pytest.fixture(scope="session")
def fib(zscheme):
    """Z[√2] model set with window [-0.8, 0.8]."""
    return ModelSet(zscheme, BoxWindow([0.8]))

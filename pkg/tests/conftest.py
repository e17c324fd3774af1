import numpy as np
import pytest

from tabweave.bezier import Separator
from tabweave.selection import order_regularize


def line(a, b, T=15, **kw):
    return Separator(np.linspace(a, b, T), **kw)


def grid_set(xs, ys, T=15):
    """Ordered set of straight full-length separators through the given coordinates."""
    seps = [line((xs[0], y), (xs[-1], y), T) for y in ys]
    seps += [line((x, ys[0]), (x, ys[-1]), T) for x in xs]
    return order_regularize(seps)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_H():
    # h0 y=0, h1 y=50, verticals x=0 (idx 2), x=100 (idx 3)
    return grid_set([0, 100], [0, 50])

import math
import pickle

import pytest
from hypothesis import given, strategies as st

from dprshare.units import (
    Quantity,
    UnitError,
    bytes_per_second,
    hertz,
    is_time,
    mhz,
    ms,
    nbytes,
    seconds,
    total,
    us,
)

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False)


def test_constructors_scale():
    assert float(ms(2.5)) == pytest.approx(2.5e-3)
    assert float(us(7)) == pytest.approx(7e-6)
    assert float(mhz(200)) == 200e6


def test_adding_time_to_bytes_is_rejected():
    with pytest.raises(UnitError):
        seconds(1) + nbytes(1)
    with pytest.raises(UnitError):
        seconds(1) < nbytes(2)


def test_bytes_over_rate_is_time():
    t = nbytes(300_000) / bytes_per_second(128e6)
    assert is_time(t)
    assert float(t) == pytest.approx(2.34375e-3)


def test_pixels_over_clock_is_time():
    t = 1280 * 720 / hertz(200e6)
    assert is_time(t)
    assert float(t) == pytest.approx(4.608e-3)


def test_dimensionless_collapses_to_float():
    r = seconds(3) / seconds(1.5)
    assert type(r) is float and r == 2.0


def test_sum_starts_from_plain_zero():
    assert float(sum([seconds(1), seconds(2)])) == 3.0
    assert is_time(total([], seconds(0)))


def test_sentinels_compare_with_any_dimension():
    assert seconds(1) < math.inf
    assert seconds(1) > 0


def test_pickle_keeps_dimension():
    q = pickle.loads(pickle.dumps(ms(3)))
    assert isinstance(q, Quantity) and is_time(q) and float(q) == pytest.approx(3e-3)


@given(finite, finite)
def test_addition_matches_float(a, b):
    assert float(seconds(a) + seconds(b)) == a + b


@given(finite, st.floats(min_value=1e-6, max_value=1e12))
def test_division_roundtrip(a, b):
    rate = bytes_per_second(b)
    t = nbytes(a) / rate
    assert float(t * rate) == pytest.approx(a, rel=1e-12, abs=1e-9)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from darwinsim import fixed


def test_half_ties_round_to_even():
    assert fixed.to_raw(0.5 / 256) == 0
    assert fixed.to_raw(1.5 / 256) == 2
    assert fixed.to_raw(-2.5 / 256) == -2


def test_range_limits():
    assert fixed.max_value() == pytest.approx(127.99609375)
    assert fixed.min_value() == -128.0
    with pytest.raises(fixed.QuantizationError, match="gain"):
        fixed.to_raw(200.0, name="gain")
    with pytest.raises(fixed.QuantizationError):
        fixed.to_raw(float("nan"))


def test_products_floor():
    assert fixed.qmul(3, 128) == 1  # 1.5 raw -> 1
    assert fixed.qmul(-3, 128) == -2  # -1.5 raw -> -2


@given(st.integers(-(1 << 20), 1 << 20))
def test_saturate_clamps(v):
    s = fixed.saturate(v)
    assert fixed.RAW_MIN <= s <= fixed.RAW_MAX
    if fixed.RAW_MIN <= v <= fixed.RAW_MAX:
        assert s == v


@given(st.floats(-127.9, 127.9, allow_nan=False))
def test_quantization_error_bounded(x):
    assert abs(fixed.to_float(fixed.to_raw(x)) - x) <= 2 ** -9 + 1e-12

"""16-bit signed fixed-point helpers.

State, parameters and weights are held as raw ``int`` values of a Q(m, f)
format with ``f`` fraction bits (Q8.8 by default).  Arithmetic saturates at
the 16-bit extremes; products are floored (truncated toward -inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

RAW_MIN = -(1 << 15)
RAW_MAX = (1 << 15) - 1
DEFAULT_FRAC_BITS = 8


class QuantizationError(ValueError):
    """A value cannot be represented in the requested fixed-point format."""


def saturate(raw: int) -> int:
    if raw > RAW_MAX:
        return RAW_MAX
    if raw < RAW_MIN:
        return RAW_MIN
    return raw


def qmul(a: int, b: int, frac_bits: int = DEFAULT_FRAC_BITS) -> int:
    """Unsaturated product, floored to ``frac_bits`` (Python ``>>`` floors)."""
    return (a * b) >> frac_bits


def to_float(raw: int, frac_bits: int = DEFAULT_FRAC_BITS) -> float:
    return raw / (1 << frac_bits)


def to_raw(value: float, frac_bits: int = DEFAULT_FRAC_BITS, *, name: str = "value") -> int:
    """Round-to-nearest-even into the Q format; raises when out of range."""
    if not math.isfinite(value):
        raise QuantizationError(f"{name}: non-finite value {value!r}")
    raw = round(value * (1 << frac_bits))  # Python round() is half-to-even
    if raw < RAW_MIN or raw > RAW_MAX:
        lo, hi = to_float(RAW_MIN, frac_bits), to_float(RAW_MAX, frac_bits)
        raise QuantizationError(f"{name}={value!r} outside representable range [{lo}, {hi}]")
    return raw


def max_value(frac_bits: int = DEFAULT_FRAC_BITS) -> float:
    return to_float(RAW_MAX, frac_bits)


def min_value(frac_bits: int = DEFAULT_FRAC_BITS) -> float:
    return to_float(RAW_MIN, frac_bits)


@dataclass(frozen=True)
class Fixed:
    """A raw value tagged with its format; convenient for tests and reports."""

    raw: int
    frac_bits: int = DEFAULT_FRAC_BITS

    @classmethod
    def from_float(cls, value: float, frac_bits: int = DEFAULT_FRAC_BITS) -> "Fixed":
        return cls(to_raw(value, frac_bits), frac_bits)

    def __float__(self) -> float:
        return to_float(self.raw, self.frac_bits)

    def __add__(self, other: "Fixed") -> "Fixed":
        return Fixed(saturate(self.raw + other.raw), self.frac_bits)

    def __sub__(self, other: "Fixed") -> "Fixed":
        return Fixed(saturate(self.raw - other.raw), self.frac_bits)

    def __mul__(self, other: "Fixed") -> "Fixed":
        return Fixed(saturate(qmul(self.raw, other.raw, self.frac_bits)), self.frac_bits)

    def __repr__(self) -> str:
        return f"Fixed({float(self):g}, raw={self.raw}, f={self.frac_bits})"

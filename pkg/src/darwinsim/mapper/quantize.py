"""Float to fixed-point conversion with error reporting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import fixed
from ..connectivity.weights import WIDTHS, value_range


@dataclass
class QuantizationReport:
    errors: dict[str, float] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    def merge(self, other: "QuantizationReport", prefix: str = "") -> None:
        for k, v in other.errors.items():
            self.errors[prefix + k] = v


def quantize_params(values: dict[str, float], frac_bits: int = fixed.DEFAULT_FRAC_BITS,
                    ) -> tuple[dict[str, int], QuantizationReport]:
    """Round every value to the nearest representable raw (ties to even).

    Raises :class:`fixed.QuantizationError` naming the first parameter that
    does not fit.
    """
    raw = {}
    report = QuantizationReport()
    for name, v in values.items():
        r = fixed.to_raw(float(v), frac_bits, name=name)
        raw[name] = r
        report.errors[name] = abs(float(v) - fixed.to_float(r, frac_bits))
    return raw, report


def quantize_weights(values, width: int, frac_bits: int = fixed.DEFAULT_FRAC_BITS,
                     name: str = "weights") -> tuple[np.ndarray, int, float]:
    """Raw weights on the grid a ``width``-bit field with a common shift can hold.

    Returns ``(raw int64 array, shift, max absolute error)``.  The shift is
    the smallest one under which the largest magnitude fits; every raw value
    is then rounded (ties to even) to a multiple of ``2**shift``.
    """
    if width not in WIDTHS:
        raise ValueError(f"unsupported weight width {width}")
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return np.zeros(0, dtype=np.int64), 0, 0.0
    if not np.all(np.isfinite(vals)):
        raise fixed.QuantizationError(f"{name}: non-finite weight")
    scaled = vals * (1 << frac_bits)
    base = np.rint(scaled)
    if base.min() < fixed.RAW_MIN or base.max() > fixed.RAW_MAX:
        raise fixed.QuantizationError(
            f"{name}: weight outside [{fixed.min_value(frac_bits)}, {fixed.max_value(frac_bits)}]")
    signed = bool(base.min() < 0)
    lo, hi = value_range(width, signed)
    for shift in range(0, 16):
        q = np.rint(scaled / (1 << shift))
        if q.min() >= lo and q.max() <= hi:
            break
    else:  # pragma: no cover - 16-bit range always fits at shift 15
        raise fixed.QuantizationError(f"{name}: cannot fit {width}-bit weights")
    q = np.clip(q.astype(np.int64), fixed.RAW_MIN >> shift, fixed.RAW_MAX >> shift)
    raw = q << shift
    err = float(np.max(np.abs(vals - raw / (1 << frac_bits))))
    return raw, shift, err

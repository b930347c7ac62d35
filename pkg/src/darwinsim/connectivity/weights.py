"""Packed fixed-width weight runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WIDTHS = (1, 2, 4, 8, 16)
# Width codes stored in 3-bit entry fields.
WIDTH_CODES = {w: i for i, w in enumerate(WIDTHS)}


class WeightError(ValueError):
    pass


def value_range(width: int, signed: bool) -> tuple[int, int]:
    if signed:
        return -(1 << (width - 1)), (1 << (width - 1)) - 1
    return 0, (1 << width) - 1


def choose_shift(raw_values, width: int) -> tuple[int, bool]:
    """Smallest left shift under which every raw weight is an exact ``width``-bit integer.

    Returns ``(shift, signed)``.  Raises :class:`WeightError` when no shift works.
    """
    if width not in WIDTHS:
        raise WeightError(f"unsupported weight width {width}")
    vals = np.asarray(raw_values, dtype=np.int64)
    signed = bool(vals.size and vals.min() < 0)
    lo, hi = value_range(width, signed)
    for shift in range(0, 17 - (1 if signed else 0)):
        q = vals >> shift
        if np.all((q << shift) == vals) and (vals.size == 0 or (q.min() >= lo and q.max() <= hi)):
            return shift, signed
    bad = vals[(vals < (lo << 15)) | (vals > (hi << 15))]
    raise WeightError(
        f"weights not representable at {width} bits (e.g. raw {int(bad[0]) if bad.size else int(vals[0])})"
    )


@dataclass(frozen=True)
class WeightArray:
    """``width``-bit elements packed little-endian into 64-bit words.

    Element ``i`` occupies bits ``[i*width, (i+1)*width)`` of the stream.
    """

    width: int
    signed: bool
    count: int
    words: tuple[int, ...]

    @classmethod
    def pack(cls, values, width: int, signed: bool | None = None) -> "WeightArray":
        if width not in WIDTHS:
            raise WeightError(f"unsupported weight width {width}")
        vals = [int(v) for v in values]
        if signed is None:
            signed = any(v < 0 for v in vals)
        lo, hi = value_range(width, signed)
        mask = (1 << width) - 1
        stream = 0
        for i, v in enumerate(vals):
            if not lo <= v <= hi:
                raise WeightError(f"element {i}={v} outside {width}-bit {'signed' if signed else 'unsigned'} range")
            stream |= (v & mask) << (i * width)
        nwords = (len(vals) * width + 63) // 64
        words = tuple((stream >> (64 * k)) & ((1 << 64) - 1) for k in range(nwords))
        return cls(width, signed, len(vals), words)

    def unpack(self) -> list[int]:
        if not self.count:
            return []
        bits = np.unpackbits(np.frombuffer(self.to_bytes(), dtype=np.uint8), bitorder="little")
        fields = bits[:self.count * self.width].reshape(self.count, self.width).astype(np.int64)
        vals = fields @ (np.int64(1) << np.arange(self.width, dtype=np.int64))
        if self.signed:
            vals = np.where(vals >= 1 << (self.width - 1), vals - (1 << self.width), vals)
        return vals.tolist()

    @property
    def bits(self) -> int:
        return self.count * self.width

    def to_bytes(self) -> bytes:
        return b"".join(w.to_bytes(8, "little") for w in self.words)

"""Program binary format: 8-byte header then little-endian 16-bit words.

Header layout: magic ``b"D3IS"``, u16 format version, u16 reserved (zero).
"""

from __future__ import annotations

import struct

MAGIC = b"D3IS"
VERSION = 1
_HEADER = struct.Struct("<4sHH")


class BinaryFormatError(ValueError):
    pass


def pack_program(words) -> bytes:
    words = list(words)
    for w in words:
        if not 0 <= w <= 0xFFFF:
            raise BinaryFormatError(f"word {w!r} is not a 16-bit value")
    return _HEADER.pack(MAGIC, VERSION, 0) + struct.pack(f"<{len(words)}H", *words)


def unpack_program(blob: bytes) -> list[int]:
    if len(blob) < _HEADER.size:
        raise BinaryFormatError("truncated header")
    magic, version, _ = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BinaryFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BinaryFormatError(f"unsupported version {version}")
    body = blob[_HEADER.size:]
    if len(body) % 2:
        raise BinaryFormatError("payload is not a whole number of 16-bit words")
    return list(struct.unpack(f"<{len(body) // 2}H", body))

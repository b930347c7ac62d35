"""Bit-level encode/decode of 16-bit instruction words."""

from __future__ import annotations

from dataclasses import dataclass

from .opcodes import (
    FORMATS,
    HOT_FIELDS,
    OPERAND_BITS,
    SIGNED_FIELDS,
    Opcode,
    register_name,
)


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    """A decoded instruction: opcode plus its operand sub-fields in layout order."""

    op: Opcode
    values: tuple[int, ...]

    @classmethod
    def make(cls, op: Opcode | str, **fields: int) -> "Instruction":
        op = Opcode[op.upper()] if isinstance(op, str) else Opcode(op)
        fmt = FORMATS[op]
        names = {name for name, _ in fmt}
        unknown = set(fields) - names
        if unknown:
            raise EncodingError(f"{op.name}: unknown field(s) {sorted(unknown)}")
        return cls(op, tuple(fields.get(name, 0) for name, _ in fmt))

    def __getitem__(self, name: str) -> int:
        for (fname, _), value in zip(FORMATS[self.op], self.values):
            if fname == name:
                return value
        raise KeyError(name)

    def fields(self) -> dict[str, int]:
        return {name: v for (name, _), v in zip(FORMATS[self.op], self.values) if name != "rsv"}

    def hot(self, name: str) -> tuple[str, ...]:
        """Registers selected by a hot-code field, in set order."""
        regs = HOT_FIELDS[(self.op, name)]
        value = self[name]
        width = len(regs)
        return tuple(r for i, r in enumerate(regs) if value >> (width - 1 - i) & 1)

    @property
    def canonical(self) -> bool:
        return is_canonical(self)


@dataclass(frozen=True)
class Illegal:
    """Result of decoding a word whose opcode value is unassigned."""

    opcode: int
    word: int


def _field_range(op: Opcode, name: str, width: int) -> tuple[int, int]:
    if (op, name) in SIGNED_FIELDS:
        return -(1 << (width - 1)), (1 << (width - 1)) - 1
    return 0, (1 << width) - 1


def encode(instr: Instruction) -> int:
    fmt = FORMATS[instr.op]
    if len(instr.values) != len(fmt):
        raise EncodingError(f"{instr.op.name}: expected {len(fmt)} fields, got {len(instr.values)}")
    operand = 0
    for (name, width), value in zip(fmt, instr.values):
        lo, hi = _field_range(instr.op, name, width)
        if not lo <= value <= hi:
            raise EncodingError(f"{instr.op.name}: field '{name}'={value} outside [{lo}, {hi}]")
        operand = (operand << width) | (value & ((1 << width) - 1))
    return (int(instr.op) << OPERAND_BITS) | operand


def decode(word: int) -> Instruction | Illegal:
    if not 0 <= word <= 0xFFFF:
        raise EncodingError(f"word {word!r} is not a 16-bit value")
    opval = word >> OPERAND_BITS
    try:
        op = Opcode(opval)
    except ValueError:
        return Illegal(opval, word)
    operand = word & ((1 << OPERAND_BITS) - 1)
    values = []
    shift = OPERAND_BITS
    for name, width in FORMATS[op]:
        shift -= width
        v = (operand >> shift) & ((1 << width) - 1)
        if (op, name) in SIGNED_FIELDS and v >> (width - 1):
            v -= 1 << width
        values.append(v)
    return Instruction(op, tuple(values))


def is_canonical(instr: Instruction) -> bool:
    """True when reserved bits are zero and register codes are assigned."""
    f = dict(zip((n for n, _ in FORMATS[instr.op]), instr.values))
    if f.get("rsv", 0) != 0:
        return False
    if "a" in f:
        if instr.op is Opcode.LOGIC:
            return register_name(0, f["a"]) is not None and register_name(0, f["b"]) is not None
        if register_name(f.get("p", 0), f["a"]) is None:
            return False
        if "b" in f and register_name(0, f["b"]) is None:
            return False
    if instr.op is Opcode.SHIFT and f["dir"] == 1 and f["amt"] == 0:
        return False
    return True


def is_legal(word: int) -> bool:
    d = decode(word)
    return isinstance(d, Instruction) and d.canonical

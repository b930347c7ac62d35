"""Text assembler and disassembler.

Source format: one instruction per line, ``;`` starts a comment, an optional
``label:`` prefix, case-insensitive mnemonics and labels.  Neuromorphic
instructions take either the raw 11-bit operand (``UPTVM 0xD``) or named
fields (``UPTLS k=3, l=4, m=3, n=1``; hot fields also accept register lists
such as ``n=LS0|LS5|LS6``).  ``.word 0x1234`` emits a literal word.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .encoding import EncodingError, Illegal, Instruction, decode, encode
from .opcodes import (
    FORMATS,
    HOT_FIELDS,
    JMP_CONDITIONS,
    JMP_DEFAULT,
    JMP_NAMES,
    LOGIC_MODES,
    NEUROMORPHIC,
    OPERAND_MASK,
    REGISTER_CODES,
    Opcode,
    register_name,
)


class AssemblyError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class SourceLine:
    lineno: int
    label: str | None
    mnemonic: str | None
    operands: str


@dataclass
class AssemblyProgram:
    lines: list[SourceLine] = field(default_factory=list)
    words: list[int] = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.words)

    def instructions(self) -> list[Instruction | Illegal]:
        return [decode(w) for w in self.words]

    def entry(self, label: str) -> int:
        try:
            return self.labels[label.lower()]
        except KeyError:
            raise KeyError(f"no label {label!r}") from None


_LABEL_RE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*:(.*)$")
_IDENT_RE = re.compile(r"^[A-Za-z_][\w.]*$")
_TWO_REG = {Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.MOV, Opcode.WMOV, Opcode.CMP, Opcode.DIV, Opcode.EXP}


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok.replace("_", ""), 0)
    except ValueError:
        raise AssemblyError(f"malformed number {tok!r}", lineno) from None


def _split_operands(text: str) -> list[str]:
    return [t for t in re.split(r"[\s,]+", text.strip()) if t]


def _register(tok: str, lineno: int, *, allow_param: bool) -> tuple[int, int]:
    try:
        p, code = REGISTER_CODES[tok.upper()]
    except KeyError:
        raise AssemblyError(f"unknown register {tok!r}", lineno) from None
    if p and not allow_param:
        raise AssemblyError(f"parameter register {tok!r} cannot be a source operand", lineno)
    return p, code


def _tokenize(source: str) -> list[SourceLine]:
    out = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split(";", 1)[0].strip()
        label = None
        m = _LABEL_RE.match(text)
        if m:
            label, text = m.group(1).lower(), m.group(2).strip()
        if not text:
            if label:
                out.append(SourceLine(lineno, label, None, ""))
            continue
        parts = text.split(None, 1)
        out.append(SourceLine(lineno, label, parts[0].upper(), parts[1] if len(parts) > 1 else ""))
    return out


def _neuromorphic(op: Opcode, text: str, lineno: int) -> Instruction:
    text = text.strip()
    fmt = FORMATS[op]
    if not text:
        return Instruction.make(op)
    if "=" not in text:
        toks = _split_operands(text)
        if len(toks) != 1:
            raise AssemblyError(f"{op.name} expects one operand value", lineno)
        operand = _parse_int(toks[0], lineno)
        if not 0 <= operand <= OPERAND_MASK:
            raise AssemblyError(f"{op.name} operand {operand:#x} exceeds 11 bits", lineno)
        d = decode((int(op) << 11) | operand)
        assert isinstance(d, Instruction)
        return d
    kw: dict[str, int] = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise AssemblyError(f"malformed field {item.strip()!r}", lineno)
        name, value = (s.strip() for s in item.split("=", 1))
        name = name.lower()
        if name not in {n for n, _ in fmt} or name == "rsv":
            raise AssemblyError(f"{op.name} has no field {name!r}", lineno)
        regs = HOT_FIELDS.get((op, name))
        if regs is not None and not re.match(r"^[-+]?(0[xob])?[0-9a-f_]+$", value, re.I):
            bits = 0
            upper = [r.upper() for r in regs]
            for reg in value.split("|"):
                reg = reg.strip().upper()
                if reg not in upper:
                    raise AssemblyError(f"{reg!r} is not in the {name} register set", lineno)
                bits |= 1 << (len(regs) - 1 - upper.index(reg))
            kw[name] = bits
        else:
            kw[name] = _parse_int(value, lineno)
    try:
        instr = Instruction.make(op, **kw)
        encode(instr)
    except EncodingError as exc:
        raise AssemblyError(str(exc), lineno) from None
    return instr


def _extended(op: Opcode, text: str, lineno: int, pc: int, labels: dict[str, int]) -> Instruction:
    toks = _split_operands(text)

    def want(n: int) -> None:
        if len(toks) != n:
            raise AssemblyError(f"{op.name} expects {n} operand(s), got {len(toks)}", lineno)

    try:
        if op in _TWO_REG:
            want(2)
            p, a = _register(toks[0], lineno, allow_param=True)
            _, b = _register(toks[1], lineno, allow_param=False)
            return _checked(Instruction.make(op, p=p, a=a, b=b))
        if op is Opcode.ADDI:
            want(2)
            p, a = _register(toks[0], lineno, allow_param=True)
            if "." in toks[1]:
                imm16 = float(toks[1]) * 16
                if imm16 != int(imm16):
                    raise AssemblyError(f"ADDI immediate {toks[1]} is not a multiple of 1/16", lineno)
                imm = int(imm16)
            else:
                imm = _parse_int(toks[1], lineno)
            return _checked(Instruction.make(op, p=p, a=a, imm=imm))
        if op is Opcode.SHIFT:
            want(2)
            p, a = _register(toks[0], lineno, allow_param=True)
            amount = _parse_int(toks[1], lineno)
            return _checked(Instruction.make(op, p=p, a=a, dir=int(amount < 0), amt=abs(amount)))
        if op is Opcode.LOGIC:
            want(3)
            pa, a = _register(toks[0], lineno, allow_param=False)
            _, b = _register(toks[1], lineno, allow_param=False)
            mode = toks[2].upper()
            if mode not in LOGIC_MODES:
                raise AssemblyError(f"unknown LOGIC mode {toks[2]!r}", lineno)
            if a > 15 or b > 15:
                raise AssemblyError("LOGIC operands must be TR0-TR7, S0-S5, LS0 or LS1", lineno)
            return _checked(Instruction.make(op, a=a, b=b, mode=LOGIC_MODES.index(mode)))
        if op in (Opcode.LOAD, Opcode.STORE):
            want(2)
            p, a = _register(toks[0], lineno, allow_param=True)
            return _checked(Instruction.make(op, p=p, a=a, addr=_parse_int(toks[1], lineno)))
        if op in (Opcode.PUSH, Opcode.POP):
            want(1)
            p, a = _register(toks[0], lineno, allow_param=True)
            return _checked(Instruction.make(op, p=p, a=a))
        if op in (Opcode.SA, Opcode.TS):
            want(1)
            return _checked(Instruction.make(op, index=_parse_int(toks[0], lineno)))
        if op is Opcode.SP:
            want(1)
            return _checked(Instruction.make(op, value=_parse_int(toks[0], lineno)))
        if op is Opcode.NOP:
            want(0)
            return Instruction.make(op)
    except EncodingError as exc:
        raise AssemblyError(str(exc), lineno) from None
    raise AssemblyError(f"unhandled mnemonic {op.name}", lineno)  # pragma: no cover


def _checked(instr: Instruction) -> Instruction:
    encode(instr)
    return instr


def _jump(cond: int, text: str, lineno: int, pc: int, labels: dict[str, int]) -> Instruction:
    toks = _split_operands(text)
    if len(toks) != 1:
        raise AssemblyError("JMP expects one target", lineno)
    target = toks[0]
    if _IDENT_RE.match(target):
        key = target.lower()
        if key not in labels:
            raise AssemblyError(f"unresolved label {target!r}", lineno)
        off = labels[key] - pc
    else:
        off = _parse_int(target, lineno)
    try:
        return _checked(Instruction.make(Opcode.JMP, cond=cond, off=off))
    except EncodingError:
        raise AssemblyError(f"jump offset {off} out of range", lineno) from None


def assemble(source: str) -> AssemblyProgram:
    """Assemble source text into resolved 16-bit words."""
    lines = _tokenize(source)
    labels: dict[str, int] = {}
    pc = 0
    for ln in lines:
        if ln.label is not None:
            if ln.label in labels:
                raise AssemblyError(f"duplicate label {ln.label!r}", ln.lineno)
            labels[ln.label] = pc
        if ln.mnemonic is not None:
            pc += 1
    prog = AssemblyProgram(lines=lines, labels=labels)
    pc = 0
    for ln in lines:
        if ln.mnemonic is None:
            continue
        mnem = ln.mnemonic
        if mnem == ".WORD":
            toks = _split_operands(ln.operands)
            if len(toks) != 1:
                raise AssemblyError(".word expects one value", ln.lineno)
            word = _parse_int(toks[0], ln.lineno)
            if not 0 <= word <= 0xFFFF:
                raise AssemblyError(f".word value {word:#x} exceeds 16 bits", ln.lineno)
            prog.words.append(word)
        elif mnem == "JMP" or mnem.startswith("JMP."):
            cond = JMP_DEFAULT
            if "." in mnem:
                suffix = mnem.split(".", 1)[1]
                if suffix not in JMP_CONDITIONS:
                    raise AssemblyError(f"unknown jump condition {suffix!r}", ln.lineno)
                cond = JMP_CONDITIONS[suffix]
            prog.words.append(encode(_jump(cond, ln.operands, ln.lineno, pc, labels)))
        else:
            try:
                op = Opcode[mnem]
            except KeyError:
                raise AssemblyError(f"unknown mnemonic {ln.mnemonic!r}", ln.lineno) from None
            if op in NEUROMORPHIC:
                instr = _neuromorphic(op, ln.operands, ln.lineno)
            else:
                instr = _extended(op, ln.operands, ln.lineno, pc, labels)
            prog.words.append(encode(instr))
        pc += 1
    return prog


def format_instruction(instr: Instruction, *, label_for=None, pc: int = 0) -> str | None:
    """Canonical text for one instruction, or None when it has no text form."""
    op = instr.op
    f = instr.fields()
    if op in NEUROMORPHIC:
        return f"{op.name} 0x{encode(instr) & OPERAND_MASK:X}"
    if not instr.canonical:
        return None
    if op in _TWO_REG:
        return f"{op.name} {register_name(f['p'], f['a'])}, {register_name(0, f['b'])}"
    if op is Opcode.ADDI:
        return f"ADDI {register_name(f['p'], f['a'])}, {f['imm']}"
    if op is Opcode.SHIFT:
        amount = -f["amt"] if f["dir"] else f["amt"]
        return f"SHIFT {register_name(f['p'], f['a'])}, {amount}"
    if op is Opcode.LOGIC:
        return f"LOGIC {register_name(0, f['a'])}, {register_name(0, f['b'])}, {LOGIC_MODES[f['mode']]}"
    if op in (Opcode.LOAD, Opcode.STORE):
        return f"{op.name} {register_name(f['p'], f['a'])}, {f['addr']}"
    if op in (Opcode.PUSH, Opcode.POP):
        return f"{op.name} {register_name(f['p'], f['a'])}"
    if op in (Opcode.SA, Opcode.TS):
        return f"{op.name} {f['index']}"
    if op is Opcode.SP:
        return f"SP {f['value']}"
    if op is Opcode.JMP:
        mnem = "JMP" if f["cond"] == JMP_DEFAULT else f"JMP.{JMP_NAMES[f['cond']]}"
        target = pc + f["off"]
        if label_for is not None and label_for(target) is not None:
            return f"{mnem} {label_for(target)}"
        return f"{mnem} {f['off']:+d}"
    if op is Opcode.NOP:
        return "NOP"
    return None  # pragma: no cover


def disassemble(program: AssemblyProgram | list[int]) -> str:
    """Render words back to source; assembling the result reproduces the words."""
    words = program.words if isinstance(program, AssemblyProgram) else list(program)
    n = len(words)
    decoded = [decode(w) for w in words]
    targets = set()
    for pc, d in enumerate(decoded):
        if isinstance(d, Instruction) and d.op is Opcode.JMP and d.canonical:
            t = pc + d["off"]
            if 0 <= t <= n:
                targets.add(t)

    def label_for(t: int) -> str | None:
        return f"L{t}" if t in targets else None

    out = []
    for pc, (w, d) in enumerate(zip(words, decoded)):
        text = None
        if isinstance(d, Instruction):
            text = format_instruction(d, label_for=label_for, pc=pc)
        if text is None:
            text = f".word 0x{w:04X}"
        prefix = f"{label_for(pc)}: " if pc in targets else ""
        out.append(prefix + text)
    if n in targets:
        out.append(f"L{n}:")
    return "\n".join(out) + ("\n" if out else "")

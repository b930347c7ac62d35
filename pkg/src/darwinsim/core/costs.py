"""Datapath cycle costs and the decoded-program table shared by both kernels.

Cost model: multipliers run in parallel, so an update instruction pays two
cycles once if it performs any multiplication, plus one cycle per addition.
A product chain of ``k`` factors is evaluated as a balanced tree.  GSPRS
reuses the comparator on the write-back path and adds no datapath cycles.
"""

from __future__ import annotations

import math

import numpy as np

from ..isa.encoding import Illegal, Instruction, decode
from ..isa.opcodes import PARAM_BASE, Opcode, register_name

MUL_CYCLES = 2
ADD_CYCLES = 1

# Row layout of a decoded program: [op, x0, x1, x2, x3, x4].
ROW_WIDTH = 6
OP_ILLEGAL = -1

# Unassigned register codes read from a slot that is never written and write
# into a sink slot that is never read.
REG_ZERO = 62
REG_SINK = 63


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _sum_cost(terms: int, products: int) -> int:
    """A gated sum of ``terms`` of which ``products`` need the multiplier."""
    return max((MUL_CYCLES if products else 0) + max(terms - 1, 0) * ADD_CYCLES, 1)


def instruction_cycles(instr: Instruction | Illegal) -> int:
    if isinstance(instr, Illegal):
        return 0
    op = instr.op
    if op is Opcode.UPTVM:
        bits = instr["nhvm"]
        return _sum_cost(_popcount(bits), _popcount(bits & 0b1110))
    if op is Opcode.UPTIS:
        gates = set(instr.hot("nhip"))
        total = 0
        for target in instr.hot("ohis"):
            if target == "g":
                muls = len(gates & {"IP5", "IP6"})
                total += _sum_cost(muls, muls)
            elif target == "I":
                muls = len(gates & {"IC1", "IP7"})
                total += _sum_cost(muls, muls)
            else:
                muls = len(gates & {"IP3", "IP4"})
                total += _sum_cost(muls + ("IC1" in gates), muls)
        return total
    if op is Opcode.UPTLS:
        return MUL_CYCLES + ADD_CYCLES
    if op is Opcode.UPTWT:
        k = _popcount(instr["n"])
        return MUL_CYCLES * math.ceil(math.log2(k + 1)) + ADD_CYCLES
    if op is Opcode.UPTTS:
        return MUL_CYCLES + (ADD_CYCLES if instr["n"] != 3 else 0)
    if op is Opcode.GSPRS:
        return 0
    if op in (Opcode.MUL, Opcode.WMOV, Opcode.EXP):
        return 2
    if op is Opcode.DIV:
        return 4
    return 1


def program_cycle_cost(words) -> int:
    """Static cycle count of a straight-line pass over ``words``."""
    return sum(instruction_cycles(decode(w)) for w in words)


def _reg(p: int, code: int) -> tuple[int, int]:
    """(read index, write index) into the 64-slot register file."""
    if register_name(p, code) is None:
        return REG_ZERO, REG_SINK
    idx = code + (PARAM_BASE if p else 0)
    return idx, idx


def decode_table(words) -> tuple[np.ndarray, np.ndarray]:
    """Pre-decode a program into an int32 row table plus per-row cycle costs."""
    words = list(words)
    table = np.zeros((len(words), ROW_WIDTH), dtype=np.int32)
    costs = np.zeros(len(words), dtype=np.int32)
    for pc, w in enumerate(words):
        d = decode(w)
        costs[pc] = instruction_cycles(d)
        if isinstance(d, Illegal):
            table[pc, 0] = OP_ILLEGAL
            continue
        op = d.op
        row = [int(op), 0, 0, 0, 0, 0]
        f = d.fields()
        if op is Opcode.LSIS:
            row[1:3] = [f["ls"], f["nhis"]]
        elif op is Opcode.LDIP:
            row[1:3] = [f["nhip"], f["nhic"]]
        elif op is Opcode.LSLS:
            row[1:3] = [f["ls"], f["nhls"]]
        elif op is Opcode.LDLP:
            row[1:3] = [f["nhlp"], f["nhlc"]]
        elif op is Opcode.UPTIS:
            row[1:3] = [f["ohis"], f["nhip"]]
        elif op is Opcode.UPTVM:
            row[1] = f["nhvm"]
        elif op in (Opcode.UPTLS, Opcode.UPTTS):
            row[1:5] = [f["k"], f["l"], f["m"], f["n"]]
        elif op is Opcode.UPTWT:
            row[1:3] = [f["m"], f["n"]]
        elif op is Opcode.GSPRS:
            row[1] = f["nhsp"]
        elif op is Opcode.LOGIC:
            ra, wa = _reg(0, f["a"])
            rb, _ = _reg(0, f["b"])
            row[1:5] = [wa, ra, rb, f["mode"]]
        elif op is Opcode.JMP:
            row[1:3] = [f["cond"], f["off"]]
        elif op in (Opcode.SA, Opcode.TS):
            row[1] = f["index"]
        elif op is Opcode.SP:
            row[1] = f["value"]
        elif op is Opcode.NOP:
            pass
        else:
            ra, wa = _reg(f["p"], f["a"])
            row[1:3] = [wa, ra]
            if op is Opcode.ADDI:
                row[3] = f["imm"]
            elif op is Opcode.SHIFT:
                row[3:5] = [f["dir"], f["amt"]]
            elif op in (Opcode.LOAD, Opcode.STORE):
                row[3] = f["addr"]
            elif op not in (Opcode.PUSH, Opcode.POP):
                row[3] = _reg(0, f["b"])[0]
        table[pc] = row
    return table, costs

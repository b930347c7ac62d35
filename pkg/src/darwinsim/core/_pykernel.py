"""Pure-Python interpreter kernel.

Mirrors ``_ckernel.pyx`` operation for operation; the two are checked against
each other in the test-suite.  Both kernels mutate their array arguments in
place and share the argument conventions documented in :mod:`.kernel`.
"""

from __future__ import annotations

RAW_MIN = -32768
RAW_MAX = 32767

# Register file indices (see isa.opcodes).
TR0, S0, LS0, W, FLAG, PB = 0, 8, 14, 24, 25, 32
IC0 = PB + 9
LP0 = PB + 12
LC0 = PB + 20
V0 = PB + 28
NPARAM = 29

# counters
C_SAT, C_LUT, C_CYCLES, C_INSTR = 0, 1, 2, 3
# fault codes
F_ILLEGAL, F_RUNAWAY, F_STACK, F_CONTEXT, F_JUMP = 1, 2, 3, 4, 5

SCRATCH_WORDS = 32
_GATE = (LS0 + 2, LS0 + 2, -1, LS0 + 5, LS0 + 5, -1, LS0 + 8, LS0 + 8)

RECIP = [round((1 << 16) / (64 + i)) for i in range(64)]


class _Ctx:
    __slots__ = ("sat", "lut", "cycles", "steps")

    def __init__(self):
        self.sat = 0
        self.lut = 0
        self.cycles = 0
        self.steps = 0


def _div(a: int, b: int, f: int, ctx: _Ctx) -> int:
    if b == 0:
        ctx.sat += 1
        return RAW_MAX if a >= 0 else RAW_MIN
    mag = -b if b < 0 else b
    length = mag.bit_length()
    mant = mag >> (length - 7) if length >= 7 else mag << (7 - length)
    prod = a * RECIP[mant - 64]
    shift = f + 7 - length - 16
    q = prod << shift if shift >= 0 else prod >> -shift
    if b < 0:
        q = -q
    if q > RAW_MAX:
        ctx.sat += 1
        return RAW_MAX
    if q < RAW_MIN:
        ctx.sat += 1
        return RAW_MIN
    return q


def _execute(R, prog, costs, params, f, one, lut, lo, hi, scratch, budget, ctx, nrow, lsrow):
    """Run one program over register list ``R``.

    Returns (fault code, pc, fired).  ``nrow``/``lsrow`` are the backing rows
    for explicit LSIS/LSLS transfers (``lsrow`` is None outside learning).
    """

    def sat(x):
        if x > RAW_MAX:
            ctx.sat += 1
            return RAW_MAX
        if x < RAW_MIN:
            ctx.sat += 1
            return RAW_MIN
        return x

    n = len(prog)
    pc = 0
    sp = 0
    fired = 0
    steps = 0
    while pc < n:
        if steps >= budget:
            ctx.steps += steps
            return F_RUNAWAY, pc, 0
        steps += 1
        ctx.cycles += costs[pc]
        op, x0, x1, x2, x3, x4 = prog[pc]
        if op == 5:  # UPTVM
            acc = 0
            if x0 & 8:
                acc += (R[PB] * R[S0]) >> f
            if x0 & 4:
                acc += (R[PB + 1] * R[S0 + 2]) >> f
            if x0 & 2:
                acc += (R[PB + 2] * R[S0 + 4]) >> f
            if x0 & 1:
                acc += R[IC0]
            R[S0] = sat(acc)
        elif op == 9:  # GSPRS
            cond = (R[S0] > R[S0 + 5]) if x0 & 4 else True
            if cond:
                if x0 & 8:
                    fired = 1
                if x0 & 2:
                    R[S0 + 4] = sat(R[S0 + 4] + R[IC0 + 2])
                if x0 & 1:
                    R[S0] = R[V0]
        elif op == 4:  # UPTIS
            if x0 & 2:
                acc = 0
                if x1 & 8:
                    acc += (R[PB + 5] * R[S0 + 1]) >> f
                if x1 & 4:
                    acc += (R[PB + 6] * R[S0 + 3]) >> f
                R[S0 + 1] = sat(acc)
            if x0 & 4:
                acc = 0
                if x1 & 1:
                    acc += (R[S0 + 1] * R[S0]) >> f
                if x1 & 2:
                    acc += (R[PB + 7] * R[S0 + 1]) >> f
                R[S0 + 2] = sat(acc)
            if x0 & 1:
                acc = 0
                if x1 & 32:
                    acc += (R[PB + 3] * R[S0 + 4]) >> f
                if x1 & 16:
                    acc += (R[PB + 4] * R[S0]) >> f
                if x1 & 1:
                    acc += R[IC0 + 1]
                R[S0 + 4] = sat(acc)
        elif op == 6:  # UPTLS
            g = _GATE[x0]
            gate = one if g < 0 else R[g]
            R[LS0 + x0] = sat(((R[LP0 + x1] * R[LS0 + x2]) >> f) + ((R[LC0 + x3] * gate) >> f))
        elif op == 7:  # UPTWT
            prod = R[LP0 + x0]
            for i in range(9):
                if x1 & (256 >> i):
                    prod = sat((prod * R[LS0 + i]) >> f)
            R[W] = sat(R[W] + prod)
        elif op == 8:  # UPTTS
            acc = (R[PB + x1] * R[S0 + x2]) >> f if x2 < 6 else 0
            if x3 < 3:
                acc += R[IC0 + x3]
            R[TR0 + x0] = sat(acc)
        elif op == 0:  # LSIS
            for i in range(6):
                if x1 & (32 >> i):
                    if x0:
                        nrow[i] = R[S0 + i]
                    else:
                        R[S0 + i] = nrow[i]
        elif op == 2:  # LSLS
            for i in range(10):
                if x1 & (512 >> i):
                    if lsrow is None:
                        if not x0:
                            R[LS0 + i] = 0
                    elif x0:
                        lsrow[i] = R[LS0 + i]
                    else:
                        R[LS0 + i] = lsrow[i]
        elif op == 1:  # LDIP
            for i in range(8):
                if x0 & (128 >> i):
                    R[PB + i] = params[i]
            for i in range(3):
                if x1 & (4 >> i):
                    R[IC0 + i] = params[9 + i]
        elif op == 3:  # LDLP
            for i in range(7):
                if x0 & (64 >> i):
                    R[LP0 + i] = params[12 + i]
            for i in range(4):
                if x1 & (8 >> i):
                    R[LC0 + i] = params[20 + i]
        elif op == 10:  # ADD
            R[x0] = sat(R[x1] + R[x2])
        elif op == 11:  # SUB
            R[x0] = sat(R[x1] - R[x2])
        elif op == 12:  # MUL
            R[x0] = sat((R[x1] * R[x2]) >> f)
        elif op == 13:  # ADDI
            R[x0] = sat(R[x1] + (x2 << (f - 4) if f >= 4 else x2 >> (4 - f)))
        elif op == 14:  # SHIFT
            R[x0] = R[x1] >> x3 if x2 else sat(R[x1] << x3)
        elif op == 15:  # LOGIC
            a = R[x1] & 0xFFFF
            b = R[x2] & 0xFFFF
            if x3 == 0:
                r = a & b
            elif x3 == 1:
                r = a | b
            elif x3 == 2:
                r = a ^ b
            elif x3 == 3:
                r = ~a
            elif x3 == 4:
                r = ~(a & b)
            elif x3 == 5:
                r = ~(a | b)
            elif x3 == 6:
                r = ~(a ^ b)
            else:
                r = a & ~b
            r &= 0xFFFF
            R[x0] = r - 0x10000 if r & 0x8000 else r
        elif op == 16:  # MOV
            R[x0] = R[x2]
        elif op == 17:  # WMOV
            R[x0] = sat((R[W] * R[x2]) >> f)
        elif op == 18:  # CMP
            d = R[x1] - R[x2]
            R[FLAG] = (d > 0) - (d < 0)
        elif op == 19:  # JMP
            fl = R[FLAG]
            bit = 4 if fl < 0 else (2 if fl == 0 else 1)
            if x0 & bit:
                pc += x1
                if pc < 0:
                    ctx.steps += steps
                    return F_JUMP, pc - x1, 0
                continue
        elif op == 20 or op == 21:  # SA / TS
            if x0:
                ctx.steps += steps
                return F_CONTEXT, pc, 0
        elif op == 22:  # LOAD
            R[x0] = scratch[x2]
        elif op == 23:  # STORE
            scratch[x2] = R[x1]
        elif op == 24:  # PUSH
            if sp >= SCRATCH_WORDS:
                ctx.steps += steps
                return F_STACK, pc, 0
            scratch[sp] = R[x1]
            sp += 1
        elif op == 25:  # POP
            if sp <= 0:
                ctx.steps += steps
                return F_STACK, pc, 0
            sp -= 1
            R[x0] = scratch[sp]
        elif op == 26:  # SP
            sp = x0
        elif op == 27:  # DIV
            R[x0] = _div(R[x1], R[x2], f, ctx)
        elif op == 28:  # EXP
            x = R[x2]
            if x < lo:
                idx = 0
                ctx.lut += 1
            elif x > hi:
                idx = 63
                ctx.lut += 1
            else:
                span = hi - lo
                idx = ((x - lo) * 126 + span) // (2 * span)
            R[x0] = lut[idx]
        elif op == 29:  # NOP
            pass
        else:
            ctx.steps += steps
            return F_ILLEGAL, pc, 0
        pc += 1
    ctx.steps += steps
    return 0, pc, fired


def _finish(ctx, counters):
    counters[C_SAT] += ctx.sat
    counters[C_LUT] += ctx.lut
    counters[C_CYCLES] += ctx.cycles
    counters[C_INSTR] += ctx.steps


def _record_fault(fault, code, index, pc):
    if fault[3] == 0:
        fault[0], fault[1], fault[2] = code, index, pc
    fault[3] += 1


def run_inference(table, costs, nrec, params, pending, cuba, frac, exp_lut, exp_lo, exp_hi,
                  scratch, budget, fired, counters, fault):
    prog = [tuple(int(v) for v in row) for row in table]
    cost = [int(c) for c in costs]
    bank = [int(p) for p in params]
    lut = [int(v) for v in exp_lut]
    scr = [int(v) for v in scratch]
    f = int(frac)
    one = 1 << f
    ctx = _Ctx()
    ip8 = bank[8]
    base = [0] * 64
    base[PB:PB + NPARAM] = bank
    for nidx in range(nrec.shape[0]):
        row = [int(v) for v in nrec[nidx]]
        h = ((ip8 * row[3]) >> f) + int(pending[nidx])
        if h > RAW_MAX:
            ctx.sat += 1
            h = RAW_MAX
        elif h < RAW_MIN:
            ctx.sat += 1
            h = RAW_MIN
        row[3] = h
        if cuba:
            row[2] = h
        R = list(base)
        R[S0:S0 + 6] = row[0:6]
        R[TR0:TR0 + 8] = row[6:14]
        code, pc, fl = _execute(R, prog, cost, bank, f, one, lut, exp_lo, exp_hi, scr, budget, ctx, row, None)
        pending[nidx] = 0
        if code:
            _record_fault(fault, code, nidx, pc)
            fired[nidx] = 0
            continue
        row[0:6] = R[S0:S0 + 6]
        row[6:14] = R[TR0:TR0 + 8]
        nrec[nidx] = row
        fired[nidx] = fl
    scratch[:] = scr
    _finish(ctx, counters)


def run_learning(table, costs, nrec, params, syn_ls, syn_w, syn_post, pre_flag, fired, reward,
                 frac, exp_lut, exp_lo, exp_hi, scratch, budget, counters, fault):
    prog = [tuple(int(v) for v in row) for row in table]
    cost = [int(c) for c in costs]
    bank = [int(p) for p in params]
    lut = [int(v) for v in exp_lut]
    scr = [int(v) for v in scratch]
    f = int(frac)
    one = 1 << f
    ctx = _Ctx()
    base = [0] * 64
    base[PB:PB + NPARAM] = bank
    reward = int(reward)
    for s in range(syn_w.shape[0]):
        post = int(syn_post[s])
        nrow = [int(v) for v in nrec[post]]
        ls = [int(v) for v in syn_ls[s]]
        ls[2] = one if pre_flag[s] else 0
        ls[5] = one if fired[post] else 0
        ls[8] = reward
        R = list(base)
        R[S0:S0 + 6] = nrow[0:6]
        R[TR0:TR0 + 8] = nrow[6:14]
        R[LS0:LS0 + 10] = ls
        R[W] = int(syn_w[s])
        code, pc, _ = _execute(R, prog, cost, bank, f, one, lut, exp_lo, exp_hi, scr, budget, ctx, nrow, ls)
        pre_flag[s] = 0
        if code:
            _record_fault(fault, code, s, pc)
            continue
        ls = R[LS0:LS0 + 10]
        ls[2] = ls[5] = ls[8] = 0
        syn_ls[s] = ls
        syn_w[s] = R[W]
        nrec[post, 0:6] = nrow[0:6]
    scratch[:] = scr
    _finish(ctx, counters)

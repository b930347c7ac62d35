# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled interpreter kernel; semantics identical to ``_pykernel``.

Signed right shifts rely on the compiler's arithmetic shift (gcc and clang
guarantee it), matching Python's flooring ``>>``.
"""

from libc.stdint cimport int32_t, int64_t, uint8_t

cdef enum:
    RAW_MIN = -32768
    RAW_MAX = 32767
    TR0 = 0
    S0 = 8
    LS0 = 14
    W = 24
    FLAG = 25
    PB = 32
    IC0 = 41
    LP0 = 44
    LC0 = 52
    V0 = 60
    NPARAM = 29
    NREG = 64
    SCRATCH_WORDS = 32


cdef int32_t RECIP[64]
for _i in range(64):
    RECIP[_i] = round((1 << 16) / (64 + _i))

cdef int GATE[8]
GATE[:] = [LS0 + 2, LS0 + 2, -1, LS0 + 5, LS0 + 5, -1, LS0 + 8, LS0 + 8]


cdef struct Ctx:
    int64_t sat
    int64_t lut
    int64_t cycles
    int64_t steps
    int pc
    int fired


cdef inline int64_t sat(int64_t x, Ctx* c) noexcept nogil:
    if x > RAW_MAX:
        c.sat += 1
        return RAW_MAX
    if x < RAW_MIN:
        c.sat += 1
        return RAW_MIN
    return x


cdef inline int bit_length(int64_t v) noexcept nogil:
    cdef int n = 0
    while v:
        v >>= 1
        n += 1
    return n


cdef int64_t cdiv(int64_t a, int64_t b, int f, Ctx* c) noexcept nogil:
    cdef int64_t mag, mant, prod, q
    cdef int length, shift
    if b == 0:
        c.sat += 1
        return RAW_MAX if a >= 0 else RAW_MIN
    mag = -b if b < 0 else b
    length = bit_length(mag)
    if length >= 7:
        mant = mag >> (length - 7)
    else:
        mant = mag << (7 - length)
    prod = a * RECIP[mant - 64]
    shift = f + 7 - length - 16
    if shift >= 0:
        q = prod * ((<int64_t>1) << shift)
    else:
        q = prod >> (-shift)
    if b < 0:
        q = -q
    return sat(q, c)


cdef int execute(int64_t* R, const int32_t[:, ::1] prog, const int32_t[::1] costs,
                 const int32_t[::1] params, int f, int64_t one, const int32_t[::1] lut,
                 int64_t lo, int64_t hi, int32_t[::1] scratch, int budget, Ctx* c,
                 int64_t* nrow, int64_t* lsrow) noexcept nogil:
    cdef int n = prog.shape[0]
    cdef int pc = 0, sp = 0, steps = 0, i, g
    cdef int op, x0, x1, x2, x3
    cdef int64_t acc, prod, gate, a, b, r, d, x, span, idx
    c.fired = 0
    while pc < n:
        if steps >= budget:
            c.steps += steps
            c.pc = pc
            return 2
        steps += 1
        c.cycles += costs[pc]
        op = prog[pc, 0]
        x0 = prog[pc, 1]
        x1 = prog[pc, 2]
        x2 = prog[pc, 3]
        x3 = prog[pc, 4]
        if op == 5:
            acc = 0
            if x0 & 8:
                acc += (R[PB] * R[S0]) >> f
            if x0 & 4:
                acc += (R[PB + 1] * R[S0 + 2]) >> f
            if x0 & 2:
                acc += (R[PB + 2] * R[S0 + 4]) >> f
            if x0 & 1:
                acc += R[IC0]
            R[S0] = sat(acc, c)
        elif op == 9:
            if (not (x0 & 4)) or R[S0] > R[S0 + 5]:
                if x0 & 8:
                    c.fired = 1
                if x0 & 2:
                    R[S0 + 4] = sat(R[S0 + 4] + R[IC0 + 2], c)
                if x0 & 1:
                    R[S0] = R[V0]
        elif op == 4:
            if x0 & 2:
                acc = 0
                if x1 & 8:
                    acc += (R[PB + 5] * R[S0 + 1]) >> f
                if x1 & 4:
                    acc += (R[PB + 6] * R[S0 + 3]) >> f
                R[S0 + 1] = sat(acc, c)
            if x0 & 4:
                acc = 0
                if x1 & 1:
                    acc += (R[S0 + 1] * R[S0]) >> f
                if x1 & 2:
                    acc += (R[PB + 7] * R[S0 + 1]) >> f
                R[S0 + 2] = sat(acc, c)
            if x0 & 1:
                acc = 0
                if x1 & 32:
                    acc += (R[PB + 3] * R[S0 + 4]) >> f
                if x1 & 16:
                    acc += (R[PB + 4] * R[S0]) >> f
                if x1 & 1:
                    acc += R[IC0 + 1]
                R[S0 + 4] = sat(acc, c)
        elif op == 6:
            g = GATE[x0]
            gate = one if g < 0 else R[g]
            R[LS0 + x0] = sat(((R[LP0 + x1] * R[LS0 + x2]) >> f) + ((R[LC0 + x3] * gate) >> f), c)
        elif op == 7:
            prod = R[LP0 + x0]
            for i in range(9):
                if x1 & (256 >> i):
                    prod = sat((prod * R[LS0 + i]) >> f, c)
            R[W] = sat(R[W] + prod, c)
        elif op == 8:
            acc = ((R[PB + x1] * R[S0 + x2]) >> f) if x2 < 6 else 0
            if x3 < 3:
                acc += R[IC0 + x3]
            R[TR0 + x0] = sat(acc, c)
        elif op == 0:
            for i in range(6):
                if x1 & (32 >> i):
                    if x0:
                        nrow[i] = R[S0 + i]
                    else:
                        R[S0 + i] = nrow[i]
        elif op == 2:
            for i in range(10):
                if x1 & (512 >> i):
                    if lsrow == NULL:
                        if not x0:
                            R[LS0 + i] = 0
                    elif x0:
                        lsrow[i] = R[LS0 + i]
                    else:
                        R[LS0 + i] = lsrow[i]
        elif op == 1:
            for i in range(8):
                if x0 & (128 >> i):
                    R[PB + i] = params[i]
            for i in range(3):
                if x1 & (4 >> i):
                    R[IC0 + i] = params[9 + i]
        elif op == 3:
            for i in range(7):
                if x0 & (64 >> i):
                    R[LP0 + i] = params[12 + i]
            for i in range(4):
                if x1 & (8 >> i):
                    R[LC0 + i] = params[20 + i]
        elif op == 10:
            R[x0] = sat(R[x1] + R[x2], c)
        elif op == 11:
            R[x0] = sat(R[x1] - R[x2], c)
        elif op == 12:
            R[x0] = sat((R[x1] * R[x2]) >> f, c)
        elif op == 13:
            if f >= 4:
                R[x0] = sat(R[x1] + <int64_t>x2 * ((<int64_t>1) << (f - 4)), c)
            else:
                R[x0] = sat(R[x1] + (<int64_t>x2 >> (4 - f)), c)
        elif op == 14:
            if x2:
                R[x0] = R[x1] >> x3
            else:
                R[x0] = sat(R[x1] * ((<int64_t>1) << x3), c)
        elif op == 15:
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
        elif op == 16:
            R[x0] = R[x2]
        elif op == 17:
            R[x0] = sat((R[W] * R[x2]) >> f, c)
        elif op == 18:
            d = R[x1] - R[x2]
            R[FLAG] = (d > 0) - (d < 0)
        elif op == 19:
            if R[FLAG] < 0:
                g = 4
            elif R[FLAG] == 0:
                g = 2
            else:
                g = 1
            if x0 & g:
                if pc + x1 < 0:
                    c.steps += steps
                    c.pc = pc
                    return 5
                pc += x1
                continue
        elif op == 20 or op == 21:
            if x0:
                c.steps += steps
                c.pc = pc
                return 4
        elif op == 22:
            R[x0] = scratch[x2]
        elif op == 23:
            scratch[x2] = <int32_t>R[x1]
        elif op == 24:
            if sp >= SCRATCH_WORDS:
                c.steps += steps
                c.pc = pc
                return 3
            scratch[sp] = <int32_t>R[x1]
            sp += 1
        elif op == 25:
            if sp <= 0:
                c.steps += steps
                c.pc = pc
                return 3
            sp -= 1
            R[x0] = scratch[sp]
        elif op == 26:
            sp = x0
        elif op == 27:
            R[x0] = cdiv(R[x1], R[x2], f, c)
        elif op == 28:
            x = R[x2]
            if x < lo:
                idx = 0
                c.lut += 1
            elif x > hi:
                idx = 63
                c.lut += 1
            else:
                span = hi - lo
                idx = ((x - lo) * 126 + span) // (2 * span)
            R[x0] = lut[idx]
        elif op == 29:
            pass
        else:
            c.steps += steps
            c.pc = pc
            return 1
        pc += 1
    c.steps += steps
    c.pc = pc
    return 0


cdef inline void record_fault(int64_t[::1] fault, int code, int64_t index, int pc) noexcept nogil:
    if fault[3] == 0:
        fault[0] = code
        fault[1] = index
        fault[2] = pc
    fault[3] += 1


cdef inline void finish(Ctx* c, int64_t[::1] counters) noexcept nogil:
    counters[0] += c.sat
    counters[1] += c.lut
    counters[2] += c.cycles
    counters[3] += c.steps


def run_inference(const int32_t[:, ::1] table, const int32_t[::1] costs, int32_t[:, ::1] nrec,
                  const int32_t[::1] params, int64_t[::1] pending, int cuba, int frac,
                  const int32_t[::1] exp_lut, int64_t exp_lo, int64_t exp_hi, int32_t[::1] scratch,
                  int budget, uint8_t[::1] fired, int64_t[::1] counters, int64_t[::1] fault):
    cdef Ctx c
    cdef int64_t R[NREG]
    cdef int64_t base[NREG]
    cdef int64_t row[14]
    cdef int64_t h, one = (<int64_t>1) << frac
    cdef Py_ssize_t nidx, i
    cdef int code
    c.sat = 0
    c.lut = 0
    c.cycles = 0
    c.steps = 0
    with nogil:
        for i in range(NREG):
            base[i] = 0
        for i in range(NPARAM):
            base[PB + i] = params[i]
        for nidx in range(nrec.shape[0]):
            for i in range(14):
                row[i] = nrec[nidx, i]
            h = ((params[8] * row[3]) >> frac) + pending[nidx]
            row[3] = sat(h, &c)
            if cuba:
                row[2] = row[3]
            for i in range(NREG):
                R[i] = base[i]
            for i in range(6):
                R[S0 + i] = row[i]
            for i in range(8):
                R[TR0 + i] = row[6 + i]
            code = execute(R, table, costs, params, frac, one, exp_lut, exp_lo, exp_hi, scratch,
                           budget, &c, row, NULL)
            pending[nidx] = 0
            if code:
                record_fault(fault, code, nidx, c.pc)
                fired[nidx] = 0
                continue
            for i in range(6):
                nrec[nidx, i] = <int32_t>R[S0 + i]
            for i in range(8):
                nrec[nidx, 6 + i] = <int32_t>R[TR0 + i]
            fired[nidx] = c.fired
        finish(&c, counters)


def run_learning(const int32_t[:, ::1] table, const int32_t[::1] costs, int32_t[:, ::1] nrec,
                 const int32_t[::1] params, int32_t[:, ::1] syn_ls, int32_t[::1] syn_w,
                 const int32_t[::1] syn_post, uint8_t[::1] pre_flag, const uint8_t[::1] fired,
                 int64_t reward, int frac, const int32_t[::1] exp_lut, int64_t exp_lo, int64_t exp_hi,
                 int32_t[::1] scratch, int budget, int64_t[::1] counters, int64_t[::1] fault):
    cdef Ctx c
    cdef int64_t R[NREG]
    cdef int64_t base[NREG]
    cdef int64_t nrow[14]
    cdef int64_t ls[10]
    cdef int64_t one = (<int64_t>1) << frac
    cdef Py_ssize_t s, i, post
    cdef int code
    c.sat = 0
    c.lut = 0
    c.cycles = 0
    c.steps = 0
    with nogil:
        for i in range(NREG):
            base[i] = 0
        for i in range(NPARAM):
            base[PB + i] = params[i]
        for s in range(syn_w.shape[0]):
            post = syn_post[s]
            for i in range(14):
                nrow[i] = nrec[post, i]
            for i in range(10):
                ls[i] = syn_ls[s, i]
            ls[2] = one if pre_flag[s] else 0
            ls[5] = one if fired[post] else 0
            ls[8] = reward
            for i in range(NREG):
                R[i] = base[i]
            for i in range(6):
                R[S0 + i] = nrow[i]
            for i in range(8):
                R[TR0 + i] = nrow[6 + i]
            for i in range(10):
                R[LS0 + i] = ls[i]
            R[W] = syn_w[s]
            code = execute(R, table, costs, params, frac, one, exp_lut, exp_lo, exp_hi, scratch,
                           budget, &c, nrow, ls)
            pre_flag[s] = 0
            if code:
                record_fault(fault, code, s, c.pc)
                continue
            for i in range(10):
                syn_ls[s, i] = <int32_t>R[LS0 + i]
            syn_ls[s, 2] = 0
            syn_ls[s, 5] = 0
            syn_ls[s, 8] = 0
            syn_w[s] = <int32_t>R[W]
            for i in range(6):
                nrec[post, i] = <int32_t>nrow[i]
        finish(&c, counters)

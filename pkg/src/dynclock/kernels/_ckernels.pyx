# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contract as ``_pykernels``."""

from libc.stdint cimport int64_t, uint32_t


cdef inline uint32_t _alu(uint32_t a, uint32_t b, int64_t op) nogil:
    if op == 0:
        return a & b
    if op == 1:
        return a | b
    if op == 2:
        return a ^ b
    if op == 3:
        return a + b
    if op == 4:
        return a - b
    if op == 5:
        return 1 if a < b else 0
    if op == 6:
        return a << (b & 31)
    return a >> (b & 31)


def execute(const int64_t[:] table, uint32_t[:] regs, uint32_t[:] dmem,
            int64_t pc, int64_t base, int64_t end, int64_t unit, int64_t max_steps):
    cdef Py_ssize_t nwords = dmem.shape[0]
    cdef Py_ssize_t row
    cdef int64_t steps = 0, total_period = 0, total_delay = 0
    cdef int64_t cls, alu, rd, rs1, rs2, imm, nxt, target
    cdef uint32_t addr, b
    cdef int halt = 0
    if table.shape[0] < ((end - base) // unit) * 9:
        raise ValueError("table shorter than the image")
    if regs.shape[0] != 32:
        raise ValueError("regs must hold 32 entries")
    with nogil:
        while True:
            if pc < base or pc >= end:
                halt = 0
                break
            if steps >= max_steps:
                halt = 1
                break
            row = ((pc - base) // unit) * 9
            cls = table[row]
            if cls < 0:
                halt = 2
                break
            alu = table[row + 1]
            rd = table[row + 2]
            rs1 = table[row + 3]
            rs2 = table[row + 4]
            imm = table[row + 5]
            nxt = pc + table[row + 6]
            if cls <= 1:
                b = regs[rs2] if cls == 0 else <uint32_t>imm
                if rd:
                    regs[rd] = _alu(regs[rs1], b, alu)
            elif cls <= 3:
                addr = regs[rs1] + <uint32_t>imm
                if (addr & 3) or (addr >> 2) >= nwords:
                    halt = 3
                    break
                if cls == 2:
                    if rd:
                        regs[rd] = dmem[addr >> 2]
                else:
                    dmem[addr >> 2] = regs[rs2]
            elif not (cls == 4 and regs[rs1] != regs[rs2]):
                target = imm if cls == 5 else pc + imm
                if target % unit or target < base or target > end:
                    halt = 4
                    break
                if cls != 4 and rd:
                    regs[rd] = <uint32_t>nxt
                nxt = target
            pc = nxt
            steps += 1
            total_period += table[row + 7]
            total_delay += table[row + 8]
    return halt, pc, steps, total_period, total_delay


def replay_shifter(shifts):
    cdef int64_t total = 1
    cdef int64_t s, c, half
    cdef Py_ssize_t i = 0
    cdef list seq = list(shifts)
    for s in seq:
        if s < 2:
            raise ValueError(f"shift value {s} leaves no high phase (need >= 2)")
        total += s + 1
    counts = bytearray(total)
    levels = bytearray(total)
    cdef unsigned char[:] cv = counts
    cdef unsigned char[:] lv = levels
    for s in seq:
        half = s >> 1
        for c in range(s + 1):
            cv[i] = <unsigned char>c
            lv[i] = 1 if c < half else 0
            i += 1
    cv[i] = 0
    lv[i] = 1
    return counts, levels

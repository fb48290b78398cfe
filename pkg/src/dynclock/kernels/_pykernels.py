"""Pure-Python kernels. Reference twin of ``_ckernels.pyx``; keep them in step."""

MASK32 = 0xFFFFFFFF


def _alu(a, b, op):
    if op == 0:
        return a & b
    if op == 1:
        return a | b
    if op == 2:
        return a ^ b
    if op == 3:
        return (a + b) & MASK32
    if op == 4:
        return (a - b) & MASK32
    if op == 5:
        return 1 if a < b else 0
    if op == 6:
        return (a << (b & 31)) & MASK32
    return a >> (b & 31)


def execute(table, regs, dmem, pc, base, end, unit, max_steps):
    """Run a pre-decoded program until it halts.

    ``table`` holds 9 ints per ``unit``-byte slot of the image (see the
    package for the column layout). ``regs`` and ``dmem`` are mutated.
    Returns (halt_code, pc, steps, total_period_ps, total_delay_ps).
    """
    r = list(regs)
    mem = list(dmem)
    nwords = len(mem)
    steps = 0
    total_period = 0
    total_delay = 0
    halt = 0
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
        alu, rd, rs1, rs2, imm, size = table[row + 1:row + 7]
        nxt = pc + size
        if cls <= 1:
            b = r[rs2] if cls == 0 else imm & MASK32
            if rd:
                r[rd] = _alu(r[rs1], b, alu)
        elif cls <= 3:
            addr = (r[rs1] + imm) & MASK32
            if addr & 3 or (addr >> 2) >= nwords:
                halt = 3
                break
            if cls == 2:
                if rd:
                    r[rd] = mem[addr >> 2]
            else:
                mem[addr >> 2] = r[rs2]
        elif cls == 4 and r[rs1] != r[rs2]:
            pass
        else:
            target = imm if cls == 5 else pc + imm
            if target % unit or target < base or target > end:
                halt = 4
                break
            if cls != 4 and rd:
                r[rd] = nxt & MASK32
            nxt = target
        pc = nxt
        steps += 1
        total_period += table[row + 7]
        total_delay += table[row + 8]
    for i, v in enumerate(r):
        regs[i] = v
    for i, v in enumerate(mem):
        dmem[i] = v
    return halt, pc, steps, total_period, total_delay


def replay_shifter(shifts):
    """Counter and output level of the phase shifter at every master tick.

    Period ``i`` lasts ``shifts[i] + 1`` ticks. The returned sequences have
    one entry per tick plus the closing tick that starts the next period.
    """
    counts = bytearray()
    levels = bytearray()
    for s in shifts:
        if s < 2:
            raise ValueError(f"shift value {s} leaves no high phase (need >= 2)")
        half = s >> 1
        for c in range(s + 1):
            counts.append(c)
            levels.append(1 if c < half else 0)
    counts.append(0)
    levels.append(1)
    return counts, levels

"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]

Workloads: a counting loop run through ``execute`` for N steps, and the
shifter replay of a long shift sequence. Results must match across backends;
the script exits non-zero if they do not.
"""

import argparse
import sys
import timeit
from array import array

from dynclock import assemble, kernels
from dynclock.datapath import Layout
from dynclock.simulator import SimConfig, predecode

LOOP = """
        addi x1, x0, 0
        addi x2, x0, 1
loop:   add  x1, x1, x2
        sw   x1, 0(x0)
        lw   x3, 0(x0)
        c.xor x4, x3
        c.jal loop
"""


def bench_execute(mod, table, end, steps, repeat):
    def once():
        regs = array("I", [0] * 32)
        dmem = array("I", [0] * 64)
        return mod.execute(table, regs, dmem, 0, 0, end, 2, steps), list(regs)

    result = once()
    best = min(timeit.repeat(once, number=1, repeat=repeat))
    return best, result


def bench_replay(mod, shifts, repeat):
    result = mod.replay_shifter(shifts)
    best = min(timeit.repeat(lambda: mod.replay_shifter(shifts), number=1, repeat=repeat))
    return best, (bytes(result[0]), bytes(result[1]))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000, help="execute steps (default: 200000)")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats, best is kept (default: 5)")
    args = ap.parse_args(argv)

    backends = kernels.backends()
    img = assemble(LOOP, Layout.PACKED)
    table = predecode(img, SimConfig())
    shifts = [2, 6, 8, 6, 6] * (args.steps // 5)

    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    ok = True
    for name, fn, arg in (
        ("execute", lambda m: bench_execute(m, table, img.end, args.steps, args.repeat), args.steps),
        ("replay_shifter", lambda m: bench_replay(m, shifts, args.repeat), len(shifts)),
    ):
        times = {}
        outputs = {}
        for bname, mod in backends.items():
            times[bname], outputs[bname] = fn(mod)
        same = len({repr(o) for o in outputs.values()}) == 1
        ok &= same
        line = "  ".join(f"{b} {t * 1e3:8.2f} ms" for b, t in times.items())
        if "cython" in times:
            line += f"  speedup {times['python'] / times['cython']:6.1f}x"
        print(f"{name:<15} n={arg:<8} {line}  results {'match' if same else 'DIFFER'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

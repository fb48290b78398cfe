"""Value-change-dump output of the master and derived clocks.

The shifter is replayed tick by tick from the traced shift values, so the
waveform is an independent reconstruction of the trace's time accounting:
every derived-clock rising edge after t=0 lands on a record's
``cumulative_time_ps``.

Signals: ``CLK`` (master), ``clk`` (derived), ``count``, ``shift_value``,
``pc`` and ``rst`` (high during the idle reset periods).
"""

from __future__ import annotations

import io

from vcd import VCDWriter

from . import kernels
from .clocking import RESET_SHIFT
from .simulator import RunResult, SimConfig

TIMESCALE = "1 ps"
SCOPE = "dynclock"

_SIGNALS = (
    # name, width, initial value
    ("CLK", 1, 1),
    ("clk", 1, 1),
    ("count", 4, 0),
    ("shift_value", 4, RESET_SHIFT),
    ("pc", 32, 0),
    ("rst", 1, 0),
)

_END_HEADER = "$enddefinitions $end\n"


def vcd_text(result: RunResult, cfg: SimConfig = SimConfig()) -> str:
    buf = io.StringIO()
    writer = VCDWriter(buf, timescale=TIMESCALE, date="", version="dynclock")
    var = {name: writer.register_var(SCOPE, name, "wire", size=width, init=init)
           for name, width, init in _SIGNALS}
    if not result.trace:
        writer.flush()
        text = buf.getvalue()
        return text[: text.index(_END_HEADER) + len(_END_HEADER)]

    shifts = [RESET_SHIFT] * cfg.reset_cycles + [r.shift for r in result.trace]
    pcs = [result.trace[0].pc] * cfg.reset_cycles + [r.pc for r in result.trace]
    rst = [1] * cfg.reset_cycles + [0] * len(result.trace)
    counts, levels = kernels.replay_shifter(shifts)
    master = cfg.clock.master_period_ps
    half = master // 2

    # the period index advances whenever the counter wraps back to 0
    period = 0
    last_tick = len(counts) - 1
    for tick in range(len(counts)):
        if tick and counts[tick] == 0:
            period += 1
        t = tick * master
        writer.change(var["CLK"], t, 1)
        writer.change(var["clk"], t, levels[tick])
        writer.change(var["count"], t, counts[tick])
        if period < len(shifts):
            writer.change(var["shift_value"], t, shifts[period])
            writer.change(var["pc"], t, pcs[period])
            writer.change(var["rst"], t, rst[period])
        if tick != last_tick:
            writer.change(var["CLK"], t + half, 0)
    writer.close()
    return buf.getvalue()


def emit_vcd(result: RunResult, cfg: SimConfig = SimConfig(), out=None):
    """Write the VCD to ``out`` (path or text stream); return the text if ``out`` is None."""
    text = vcd_text(result, cfg)
    if out is None:
        return text
    if isinstance(out, io.TextIOBase):
        out.write(text)
    else:
        with open(out, "w", newline="\n") as fp:
            fp.write(text)
    return None

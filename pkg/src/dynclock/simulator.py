"""Fetch, phase-decode, execute and advance the dynamic clock.

Two execution paths share one contract:

* the traced path walks decode -> control -> datapath step for every
  instruction and records a :class:`TraceRecord` per step;
* the untraced path pre-decodes the image once and hands it to the
  compiled execute loop in :mod:`dynclock.kernels`.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import asdict, dataclass, field, replace

from . import kernels
from .assembler import Image
from .clocking import RESET_SHIFT, ClockConfig, max_period, period_of, phase_decode
from .control import control_signals, instruction_class
from .datapath import (
    DEFAULT_DMEM_WORDS,
    MASK32,
    DelayModel,
    Layout,
    MachineState,
    StepEffects,
    delay_of,
    step,
)
from .errors import DecodeError, IllegalInstruction, InvalidJumpTarget, MemoryFault, SelectorError
from .isa import decode, disassemble, is_compressed

HALT_PC_OUT = "pc-out-of-image"
HALT_MAX_STEPS = "max-steps"
HALT_ILLEGAL = "illegal-instruction"
HALT_MEMORY_FAULT = "memory-fault"

_KERNEL_HALTS = {
    kernels.HALT_PC_OUT: HALT_PC_OUT,
    kernels.HALT_MAX_STEPS: HALT_MAX_STEPS,
    kernels.HALT_ILLEGAL: HALT_ILLEGAL,
    kernels.HALT_MEM_FAULT: HALT_MEMORY_FAULT,
    kernels.HALT_BAD_TARGET: HALT_PC_OUT,
}

_KERNEL_CLASS = {
    "rtype": kernels.CLS_ALU_REG,
    "addi": kernels.CLS_ALU_IMM,
    "load": kernels.CLS_LOAD,
    "store": kernels.CLS_STORE,
    "beq": kernels.CLS_BRANCH,
}


@dataclass(frozen=True)
class SimConfig:
    mode: Layout = Layout.PACKED
    clock: ClockConfig = ClockConfig()
    delays: DelayModel = DelayModel()
    max_steps: int = 10000
    on_fault: str = "halt"  # or "raise"
    reset_cycles: int = 0
    dmem_words: int = DEFAULT_DMEM_WORDS
    trace: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Layout(self.mode))
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.on_fault not in ("halt", "raise"):
            raise ValueError(f"on_fault must be 'halt' or 'raise', got {self.on_fault!r}")
        if self.reset_cycles < 0:
            raise ValueError("reset_cycles must be non-negative")
        if self.dmem_words <= 0:
            raise ValueError("dmem_words must be positive")

    @property
    def reset_ps(self) -> int:
        return self.reset_cycles * period_of(RESET_SHIFT, self.clock)


@dataclass(frozen=True)
class TraceRecord:
    step: int
    pc: int
    raw: int
    mnemonic: str
    text: str
    compressed: bool
    shift: int
    period_ps: int
    cumulative_time_ps: int
    delay_ps: int
    slack_ps: int
    effects: StepEffects
    zero: int

    @property
    def start_time_ps(self) -> int:
        return self.cumulative_time_ps - self.period_ps

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


@dataclass(frozen=True)
class EfficiencyReport:
    steps: int
    fixed_period_ps: int
    fixed_total_ps: int
    dynamic_total_ps: int
    busy_ps: int
    reset_ps: int = 0

    @property
    def improvement(self) -> float:
        """Fraction of the fixed-clock run time saved by the dynamic clock."""
        if not self.fixed_total_ps:
            return 0.0
        return (self.fixed_total_ps - self.dynamic_total_ps) / self.fixed_total_ps

    @property
    def utilization_fixed(self) -> float:
        return self.busy_ps / self.fixed_total_ps if self.fixed_total_ps else 0.0

    @property
    def utilization_dynamic(self) -> float:
        return self.busy_ps / self.dynamic_total_ps if self.dynamic_total_ps else 0.0

    @property
    def speedup(self) -> float:
        return self.fixed_total_ps / self.dynamic_total_ps if self.dynamic_total_ps else 1.0

    def as_dict(self) -> dict:
        return {
            **asdict(self),
            "improvement": self.improvement,
            "utilization_fixed": self.utilization_fixed,
            "utilization_dynamic": self.utilization_dynamic,
            "speedup": self.speedup,
        }

    def table(self) -> str:
        ns = lambda ps: f"{ps / 1000:g} ns"  # noqa: E731
        rows = [
            ("instructions executed", str(self.steps)),
            ("fixed clock period", ns(self.fixed_period_ps)),
            ("fixed-clock total", ns(self.fixed_total_ps)),
            ("dynamic-clock total", ns(self.dynamic_total_ps)),
            ("improvement", f"{100 * self.improvement:.2f} %"),
            ("speedup", f"{self.speedup:.4f}x"),
            ("busy time (sum of delays)", ns(self.busy_ps)),
            ("utilization, fixed clock", f"{100 * self.utilization_fixed:.2f} %"),
            ("utilization, dynamic clock", f"{100 * self.utilization_dynamic:.2f} %"),
        ]
        if self.reset_ps:
            rows.append(("reset time (excluded)", ns(self.reset_ps)))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


@dataclass
class RunResult:
    state: MachineState
    halt_reason: str
    trace: list = field(default_factory=list)
    steps: int = 0
    dynamic_total_ps: int = 0
    busy_ps: int = 0
    reset_ps: int = 0
    min_slack_ps: int | None = None
    fault: str | None = None
    metrics: EfficiencyReport | None = None

    @property
    def end_time_ps(self) -> int:
        return self.reset_ps + self.dynamic_total_ps

    @property
    def timing_ok(self) -> bool:
        return self.min_slack_ps is None or self.min_slack_ps > 0


def fetch(img: Image, pc: int, mode: Layout) -> int:
    """Instruction word at ``pc``; a compressed one is returned as its halfword."""
    if mode is Layout.WORD_ALIGNED:
        if img.end - pc < 4:
            half = img.half(pc)
            if is_compressed(half):
                return half
            raise IllegalInstruction(f"truncated instruction at {pc:#x}")
        word = img.word(pc)
        return word & 0xFFFF if is_compressed(word) else word
    half = img.half(pc)
    if is_compressed(half):
        return half
    if img.end - pc < 4:
        raise IllegalInstruction(f"truncated 32-bit instruction at {pc:#x}")
    return img.word(pc)


def _initial_state(img: Image, cfg: SimConfig, dmem_init) -> MachineState:
    return MachineState.reset(img.base, cfg.dmem_words, dmem_init)


def run(img: Image, cfg: SimConfig = SimConfig(), dmem_init=None) -> RunResult:
    if not cfg.trace:
        return _run_kernel(img, cfg, dmem_init)
    mode = cfg.mode
    state = _initial_state(img, cfg, dmem_init)
    bounds = (img.base, img.end)
    now = cfg.reset_ps
    trace = []
    busy = 0
    min_slack = None
    fault = None
    while True:
        pc = state.pc
        if not img.contains(pc):
            reason = HALT_PC_OUT
            break
        if len(trace) >= cfg.max_steps:
            reason = HALT_MAX_STEPS
            break
        try:
            raw = fetch(img, pc, mode)
            shift = phase_decode(raw)
            period = period_of(shift, cfg.clock)
            instr = decode(raw)
            signals = control_signals(instr)
            effects = step(state, instr, signals, mode, bounds)
        except DecodeError as exc:
            if cfg.on_fault == "raise":
                raise
            reason, fault = HALT_ILLEGAL, str(exc)
            break
        except MemoryFault as exc:
            if cfg.on_fault == "raise":
                raise
            reason, fault = HALT_MEMORY_FAULT, str(exc)
            break
        except InvalidJumpTarget as exc:
            if cfg.on_fault == "raise":
                raise
            reason, fault = HALT_PC_OUT, str(exc)
            break
        delay = delay_of(instr, cfg.delays)
        now += period
        busy += delay
        slack = period - delay
        min_slack = slack if min_slack is None else min(min_slack, slack)
        trace.append(TraceRecord(
            step=len(trace), pc=pc, raw=raw, mnemonic=str(instr.mnemonic),
            text=disassemble(instr), compressed=instr.compressed, shift=shift,
            period_ps=period, cumulative_time_ps=now, delay_ps=delay, slack_ps=slack,
            effects=effects, zero=effects.zero_flag,
        ))
    result = RunResult(
        state=state, halt_reason=reason, trace=trace, steps=len(trace),
        dynamic_total_ps=now - cfg.reset_ps, busy_ps=busy, reset_ps=cfg.reset_ps,
        min_slack_ps=min_slack, fault=fault,
    )
    result.metrics = efficiency_report(result, cfg)
    return result


def predecode(img: Image, cfg: SimConfig) -> array:
    """Flatten the image into the kernel's slot table."""
    mode = cfg.mode
    unit = mode.alignment
    nslots = -(-len(img.data) // unit)
    table = array("q", [0]) * (nslots * kernels.STRIDE)
    for slot in range(nslots):
        row = slot * kernels.STRIDE
        pc = img.base + slot * unit
        try:
            raw = fetch(img, pc, mode)
            instr = decode(raw)
        except DecodeError:
            table[row] = kernels.CLS_ILLEGAL
            continue
        signals = control_signals(instr)
        cls = instruction_class(instr)
        if cls == "jal":
            kcls = kernels.CLS_JUMP_REL if instr.compressed else kernels.CLS_JUMP_ABS
        else:
            kcls = _KERNEL_CLASS[cls]
        table[row:row + kernels.STRIDE] = array("q", (
            kcls, int(signals.alu_control), instr.rd, instr.rs1, instr.rs2, instr.imm,
            mode.slot_size(instr.compressed),
            period_of(phase_decode(raw), cfg.clock),
            delay_of(instr, cfg.delays),
        ))
    return table


def _min_slack_bound(table: array, steps: int):
    # the kernel does not track slack per step; report the worst slack of any
    # decodable slot, which bounds the executed minimum from below
    if not steps:
        return None
    slacks = [table[i + 7] - table[i + 8] for i in range(0, len(table), kernels.STRIDE)
              if table[i] != kernels.CLS_ILLEGAL]
    return min(slacks) if slacks else None


def _run_kernel(img: Image, cfg: SimConfig, dmem_init) -> RunResult:
    state = _initial_state(img, cfg, dmem_init)
    table = predecode(img, cfg)
    regs = array("I", state.regs)
    dmem = array("I", state.dmem)
    halt, pc, steps, total, busy = kernels.execute(
        table, regs, dmem, img.base, img.base, img.end, cfg.mode.alignment, cfg.max_steps)
    reason = _KERNEL_HALTS[halt]
    if cfg.on_fault == "raise" and halt in (kernels.HALT_ILLEGAL, kernels.HALT_MEM_FAULT,
                                             kernels.HALT_BAD_TARGET):
        # replay on the traced path to raise the precise exception
        run(img, replace(cfg, trace=True), dmem_init)
    state.pc = pc
    state.regs = list(regs)
    state.dmem = list(dmem)
    result = RunResult(
        state=state, halt_reason=reason, steps=steps, dynamic_total_ps=total,
        busy_ps=busy, reset_ps=cfg.reset_ps, min_slack_ps=_min_slack_bound(table, steps),
    )
    result.metrics = efficiency_report(result, cfg)
    return result


def efficiency_report(result: RunResult, cfg: SimConfig = SimConfig()) -> EfficiencyReport:
    fixed = max_period(cfg.clock)
    return EfficiencyReport(
        steps=result.steps,
        fixed_period_ps=fixed,
        fixed_total_ps=result.steps * fixed,
        dynamic_total_ps=result.dynamic_total_ps,
        busy_ps=result.busy_ps,
        reset_ps=result.reset_ps,
    )


def write_trace(result: RunResult, fp) -> None:
    for rec in result.trace:
        fp.write(rec.to_json() + "\n")


# -- state dumps

def parse_mem_range(selector: str, dmem_words: int) -> tuple:
    """``"A:B"`` -> (A, B): a half-open, word-aligned byte range."""
    try:
        lo_s, hi_s = selector.split(":")
        lo, hi = int(lo_s, 0), int(hi_s, 0)
    except ValueError:
        raise SelectorError(f"bad memory range {selector!r}, expected A:B") from None
    if lo % 4 or hi % 4:
        raise SelectorError(f"memory range {selector!r} is not word aligned")
    if not 0 <= lo < hi <= 4 * dmem_words:
        raise SelectorError(f"memory range {selector!r} outside [0, {4 * dmem_words}]")
    return lo, hi


def _signed(v: int) -> int:
    return v - (1 << 32) if v >> 31 else v


def dump_state(result: RunResult, regs: bool = True, mem_range=None, fmt: str = "text") -> str:
    state = result.state
    span = None
    if mem_range is not None:
        span = parse_mem_range(mem_range, len(state.dmem)) if isinstance(mem_range, str) else mem_range
    if fmt == "json":
        doc = {"pc": state.pc, "halt_reason": result.halt_reason}
        if regs:
            doc["regs"] = {f"x{i}": state.regs[i] & MASK32 for i in range(32)}
        if span:
            doc["dmem"] = {str(a): state.dmem[a // 4] for a in range(span[0], span[1], 4)}
        return json.dumps(doc, indent=2)
    if fmt != "text":
        raise ValueError(f"unknown dump format {fmt!r}")
    lines = [f"pc = {state.pc:#x}"]
    if regs:
        lines += [f"x{i} = {_signed(state.regs[i])}" for i in range(32)]
    if span:
        lines += [f"dmem[{a}] = {_signed(state.dmem[a // 4])}" for a in range(span[0], span[1], 4)]
    return "\n".join(lines)

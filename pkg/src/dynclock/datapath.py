"""Architectural state and single-cycle execute semantics.

Times are integer picoseconds so period and slack arithmetic stays exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .control import AluOp, ControlSignals, branch_taken, instruction_class
from .errors import InvalidJumpTarget, OutOfBounds, UnalignedAccess
from .isa import Instruction, Mnemonic

MASK32 = 0xFFFFFFFF
NUM_REGS = 32
DEFAULT_DMEM_WORDS = 64


class Layout(str, enum.Enum):
    """How instructions sit in instruction memory.

    PACKED: contiguous halfwords, compressed instructions advance PC by 2.
    WORD_ALIGNED: one instruction per word, PC always advances by 4.
    """

    PACKED = "packed"
    WORD_ALIGNED = "word-aligned"

    @property
    def alignment(self) -> int:
        return 2 if self is Layout.PACKED else 4

    def slot_size(self, compressed: bool) -> int:
        return 2 if compressed and self is Layout.PACKED else 4


@dataclass
class MachineState:
    pc: int = 0
    regs: list = field(default_factory=lambda: [0] * NUM_REGS)
    dmem: list = field(default_factory=lambda: [0] * DEFAULT_DMEM_WORDS)

    @classmethod
    def reset(cls, pc=0, dmem_words=DEFAULT_DMEM_WORDS, dmem_init=None):
        dmem = [0] * dmem_words
        if dmem_init is not None:
            if len(dmem_init) > dmem_words:
                raise OutOfBounds(f"init data has {len(dmem_init)} words, memory holds {dmem_words}")
            dmem[: len(dmem_init)] = [w & MASK32 for w in dmem_init]
        return cls(pc=pc, dmem=dmem)

    def copy(self) -> MachineState:
        return MachineState(self.pc, list(self.regs), list(self.dmem))


@dataclass(frozen=True)
class AluResult:
    alu_out: int
    zero: int


@dataclass(frozen=True)
class DelayModel:
    """Unit delays along the modelled critical paths, in picoseconds."""

    regfile_read_ps: int = 6000
    alu_ps: int = 6000
    dmem_read_ps: int = 4000

    def __post_init__(self):
        for name in ("regfile_read_ps", "alu_ps", "dmem_read_ps"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @classmethod
    def from_ns(cls, regfile_read=6, alu=6, dmem_read=4) -> DelayModel:
        return cls(*(round(ns * 1000) for ns in (regfile_read, alu, dmem_read)))


@dataclass(frozen=True)
class StepEffects:
    next_pc: int
    reg_write: tuple | None = None
    mem_write: tuple | None = None
    zero_flag: int = 0
    loaded_value: int | None = None


def regfile_read(state: MachineState, a1: int, a2: int) -> tuple:
    rd1 = state.regs[a1] if a1 else 0
    rd2 = state.regs[a2] if a2 else 0
    return rd1, rd2


def regfile_write(state: MachineState, a3: int, wd3: int, we3: int) -> MachineState:
    # x0 accepts the write but never changes
    if we3 and a3:
        state.regs[a3] = wd3 & MASK32
    return state


def alu_exec(src_a: int, src_b: int, alu_control: int) -> AluResult:
    a = src_a & MASK32
    b = src_b & MASK32
    op = AluOp(alu_control)
    zero = 0
    if op is AluOp.AND:
        out = a & b
    elif op is AluOp.OR:
        out = a | b
    elif op is AluOp.XOR:
        out = a ^ b
    elif op is AluOp.ADD:
        out = (a + b) & MASK32
    elif op is AluOp.SUB:
        out = (a - b) & MASK32
        zero = int(a == b)
    elif op is AluOp.SLT:
        # unsigned compare, as the ALU's logic-typed operands imply
        out = int(a < b)
    elif op is AluOp.SLL:
        out = (a << (b & 0x1F)) & MASK32
    else:
        out = a >> (b & 0x1F)
    return AluResult(out, zero)


def _word_index(state: MachineState, addr: int) -> int:
    if addr % 4:
        raise UnalignedAccess(f"data address {addr:#x} is not word aligned")
    index = addr // 4
    if not 0 <= index < len(state.dmem):
        raise OutOfBounds(f"data address {addr:#x} outside {len(state.dmem)}-word memory")
    return index


def dmem_access(state: MachineState, addr: int, write_value=None, mem_write: int = 0):
    """Word access at byte address ``addr``. Returns (value read before any write, state)."""
    index = _word_index(state, addr)
    value = state.dmem[index]
    if mem_write:
        state.dmem[index] = write_value & MASK32
    return value, state


def _check_target(target: int, mode: Layout, bounds) -> None:
    if target % mode.alignment:
        raise InvalidJumpTarget(f"target {target:#x} not {mode.alignment}-byte aligned ({mode.value})")
    if bounds is not None:
        lo, hi = bounds
        # hi itself is allowed: jumping to the end of the image halts cleanly
        if not lo <= target <= hi:
            raise InvalidJumpTarget(f"target {target:#x} outside instruction image [{lo:#x}, {hi:#x}]")


def step(state: MachineState, instr: Instruction, signals: ControlSignals,
         mode: Layout = Layout.PACKED, bounds=None) -> StepEffects:
    """Execute one instruction in one clock period and commit its effects.

    Nothing is committed if the step faults. ``bounds`` is the (start, end)
    byte range of the instruction image used to validate control transfers.
    """
    pc = state.pc
    sequential = pc + mode.slot_size(instr.compressed)

    rd1, rd2 = regfile_read(state, instr.rs1, instr.rs2)
    src_b = instr.imm if signals.alu_src else rd2
    alu = alu_exec(rd1, src_b, signals.alu_control)

    loaded = None
    mem_write = None
    if signals.mem_write:
        _word_index(state, alu.alu_out)
        mem_write = (alu.alu_out, rd2)
    elif signals.mem_to_reg and signals.reg_write and not signals.jump:
        loaded, _ = dmem_access(state, alu.alu_out)

    if signals.jump:
        wd3 = sequential
    elif signals.mem_to_reg:
        wd3 = loaded if loaded is not None else 0
    else:
        wd3 = alu.alu_out

    next_pc = sequential
    if branch_taken(signals, alu.zero):
        next_pc = pc + instr.imm
        _check_target(next_pc, mode, bounds)
    elif signals.jump:
        next_pc = instr.imm if instr.mnemonic is Mnemonic.JAL else pc + instr.imm
        _check_target(next_pc, mode, bounds)

    if mem_write is not None:
        dmem_access(state, mem_write[0], mem_write[1], 1)
    reg_write = None
    if signals.reg_write:
        regfile_write(state, instr.rd, wd3, 1)
        reg_write = (instr.rd, wd3 & MASK32)
    state.pc = next_pc
    return StepEffects(next_pc, reg_write, mem_write, alu.zero, loaded)


def delay_of(instr: Instruction, model: DelayModel = DelayModel()) -> int:
    """Critical-path delay in picoseconds: sum of the modelled units traversed."""
    cls = instruction_class(instr)
    if cls == "jal":
        return 0
    delay = model.regfile_read_ps + model.alu_ps
    if cls == "load":
        delay += model.dmem_read_ps
    return delay


"""Control unit: main decoder vector plus the ALU operation selector.

Don't-care entries of the truth table are driven as 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .isa import Fmt, Instruction, Mnemonic


class AluOp(enum.IntEnum):
    AND = 0b000
    OR = 0b001
    XOR = 0b010
    ADD = 0b011
    SUB = 0b100
    SLT = 0b101
    SLL = 0b110
    SRL = 0b111


@dataclass(frozen=True)
class ControlSignals:
    imm_c: int
    reg_write: int
    alu_src: int
    branch: int
    mem_write: int
    mem_to_reg: int
    jump: int
    comp: int
    alu_control: AluOp


# Rows: imm_c, reg_write, alu_src, branch, mem_write, mem_to_reg, jump.
# LOAD drives mem_to_reg=1 so LW commits the loaded word; ADDI drives
# alu_src=1 so the immediate reaches the ALU.
_ROWS = {
    "rtype": (0, 1, 0, 0, 0, 0, 0),
    "load": (1, 1, 1, 0, 0, 1, 0),
    "store": (0, 0, 1, 0, 1, 0, 0),
    "beq": (0, 0, 0, 1, 0, 0, 0),
    "jal": (0, 1, 0, 0, 0, 0, 1),
    "addi": (1, 1, 1, 0, 0, 0, 0),
}

_CLASS = {
    Fmt.R: "rtype",
    Fmt.CA: "rtype",
    Fmt.CL: "load",
    Fmt.CS: "store",
    Fmt.B: "beq",
    Fmt.JABS: "jal",
    Fmt.CJ: "jal",
}

_ALU_BY_MNEMONIC = {
    Mnemonic.ADDI: AluOp.ADD,
    Mnemonic.LW: AluOp.ADD,
    Mnemonic.SW: AluOp.ADD,
    Mnemonic.C_LW: AluOp.ADD,
    Mnemonic.C_SW: AluOp.ADD,
    Mnemonic.BEQ: AluOp.SUB,
    Mnemonic.JAL: AluOp.ADD,
    Mnemonic.C_JAL: AluOp.ADD,
}

# base R-type selector keyed by (funct3, funct7)
_R_ALU = {
    (0b000, 0b0000000): AluOp.ADD,
    (0b000, 0b0100000): AluOp.SUB,
    (0b001, 0b0000000): AluOp.SLL,
    (0b010, 0b0000000): AluOp.SLT,
    (0b100, 0b0000000): AluOp.XOR,
    (0b101, 0b0000000): AluOp.SRL,
    (0b110, 0b0000000): AluOp.OR,
    (0b111, 0b0000000): AluOp.AND,
}

_CA_ALU = {0b00: AluOp.SUB, 0b01: AluOp.XOR, 0b10: AluOp.OR, 0b11: AluOp.AND}


def instruction_class(instr: Instruction) -> str:
    if instr.mnemonic is Mnemonic.ADDI:
        return "addi"
    if instr.mnemonic is Mnemonic.LW:
        return "load"
    if instr.mnemonic is Mnemonic.SW:
        return "store"
    return _CLASS[instr.fmt]


def alu_control(instr: Instruction) -> AluOp:
    """Select the ALU operation from funct fields (R-type) or the instruction class."""
    if instr.fmt is Fmt.R:
        return _R_ALU[(instr.funct3, instr.funct7)]
    if instr.fmt is Fmt.CA:
        return _CA_ALU[instr.funct2]
    return _ALU_BY_MNEMONIC[instr.mnemonic]


def control_signals(instr: Instruction) -> ControlSignals:
    row = _ROWS[instruction_class(instr)]
    return ControlSignals(*row, comp=0 if instr.compressed else 1, alu_control=alu_control(instr))


def branch_taken(signals: ControlSignals, zero: int) -> int:
    return signals.branch & zero

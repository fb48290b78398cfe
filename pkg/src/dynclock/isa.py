"""Instruction set: 13 base (32-bit) and 7 compressed (16-bit) instructions.

Decoded instructions carry their immediate fully extended and already
shifted, so the datapath never has to look at the raw word again.

Immediate layouts::

    I     bits[31:20]                       sign-extended
    S     bits[31:25] | bits[11:7]          sign-extended
    B     S layout, shifted left 2          sign-extended, PC-relative
    Jabs  bits[31:20]                       zero-extended, absolute byte address
    CL/CS bits[12:10] | bits[6:5], << 2     zero-extended
    CJ    bits[12:2], << 1                  sign-extended, PC-relative

Compressed register fields are 3 bits wide and name x0-x7 directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import (
    EncodeError,
    IllegalInstruction,
    ImmediateOutOfRange,
    RegisterOutOfRange,
    WidthMismatch,
)


class Mnemonic(str, enum.Enum):
    ADD = "ADD"
    SUB = "SUB"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    SLT = "SLT"
    SLL = "SLL"
    SRL = "SRL"
    ADDI = "ADDI"
    LW = "LW"
    SW = "SW"
    BEQ = "BEQ"
    JAL = "JAL"
    C_AND = "C.AND"
    C_OR = "C.OR"
    C_XOR = "C.XOR"
    C_SUB = "C.SUB"
    C_LW = "C.LW"
    C_SW = "C.SW"
    C_JAL = "C.JAL"

    def __str__(self):
        return self.value

    @property
    def compressed(self) -> bool:
        return self.value.startswith("C.")


class Fmt(str, enum.Enum):
    R = "R"
    I = "I"  # noqa: E741
    S = "S"
    B = "B"
    JABS = "Jabs"
    CA = "CA"
    CL = "CL"
    CS = "CS"
    CJ = "CJ"


OP_RTYPE = 0b0110011
OP_ADDI = 0b0010011
OP_LOAD = 0b0000011
OP_STORE = 0b0100011
OP_BEQ = 0b1100011
OP_JAL = 0b1101111

# funct6 shared by the compressed register-register group
CA_FUNCT6 = 0b100011

# (funct3, funct7) for the base R-type group
R_FUNCTS = {
    Mnemonic.ADD: (0b000, 0b0000000),
    Mnemonic.SUB: (0b000, 0b0100000),
    Mnemonic.SLL: (0b001, 0b0000000),
    Mnemonic.SLT: (0b010, 0b0000000),
    Mnemonic.XOR: (0b100, 0b0000000),
    Mnemonic.SRL: (0b101, 0b0000000),
    Mnemonic.OR: (0b110, 0b0000000),
    Mnemonic.AND: (0b111, 0b0000000),
}
_R_BY_FUNCTS = {v: k for k, v in R_FUNCTS.items()}

CA_FUNCT2 = {
    Mnemonic.C_SUB: 0b00,
    Mnemonic.C_XOR: 0b01,
    Mnemonic.C_OR: 0b10,
    Mnemonic.C_AND: 0b11,
}
_CA_BY_FUNCT2 = {v: k for k, v in CA_FUNCT2.items()}

FORMAT = {
    **{m: Fmt.R for m in R_FUNCTS},
    Mnemonic.ADDI: Fmt.I,
    Mnemonic.LW: Fmt.I,
    Mnemonic.SW: Fmt.S,
    Mnemonic.BEQ: Fmt.B,
    Mnemonic.JAL: Fmt.JABS,
    **{m: Fmt.CA for m in CA_FUNCT2},
    Mnemonic.C_LW: Fmt.CL,
    Mnemonic.C_SW: Fmt.CS,
    Mnemonic.C_JAL: Fmt.CJ,
}

# opcode / funct3 for non-R base instructions; (funct3, op) for compressed
_BASE_OPS = {
    Mnemonic.ADDI: (OP_ADDI, 0b000),
    Mnemonic.LW: (OP_LOAD, 0b010),
    Mnemonic.SW: (OP_STORE, 0b010),
    Mnemonic.BEQ: (OP_BEQ, 0b000),
    Mnemonic.JAL: (OP_JAL, 0b000),
}
_COMP_OPS = {
    Fmt.CA: (0b100, 0b01),
    Fmt.CL: (0b010, 0b00),
    Fmt.CS: (0b110, 0b00),
    Fmt.CJ: (0b001, 0b01),
}

# inclusive bounds of the (already shifted) immediate, and its required multiple
IMM_RANGE = {
    Fmt.I: (-2048, 2047, 1),
    Fmt.S: (-2048, 2047, 1),
    Fmt.B: (-2048 * 4, 2047 * 4, 4),
    Fmt.JABS: (0, 4095, 1),
    Fmt.CL: (0, 31 * 4, 4),
    Fmt.CS: (0, 31 * 4, 4),
    Fmt.CJ: (-1024 * 2, 1023 * 2, 2),
}

C_JAL_LINK = 1


def op_c(half: int) -> int:
    """5-bit compressed selector ``{half[15:13], half[1:0]}``."""
    return ((half >> 13) & 0b111) << 2 | (half & 0b11)


def is_compressed(word: int) -> bool:
    return (word & 0b11) != 0b11


def sext(value: int, bits: int) -> int:
    value &= (1 << bits) - 1
    return value - (1 << bits) if value >> (bits - 1) else value


@dataclass(frozen=True)
class Instruction:
    mnemonic: Mnemonic
    opcode: int
    funct3: int
    funct7: int
    funct2: int
    rd: int
    rs1: int
    rs2: int
    imm: int
    compressed: bool
    raw: int

    @property
    def fmt(self) -> Fmt:
        return FORMAT[self.mnemonic]

    @property
    def size(self) -> int:
        """Width in bytes of the encoding (not of its slot in word-aligned images)."""
        return 2 if self.compressed else 4

    def __str__(self):
        return disassemble(self)


def decode32(word: int) -> Instruction:
    if word & 0b11 != 0b11:
        raise WidthMismatch(f"{word:#010x} is not a base-width word (bits[1:0] != 11)")
    word &= 0xFFFFFFFF
    opcode = word & 0x7F
    rd = (word >> 7) & 0x1F
    funct3 = (word >> 12) & 0x7
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    funct7 = word >> 25

    def make(m, rd=0, rs1=0, rs2=0, imm=0, funct7=0):
        return Instruction(m, opcode, funct3, funct7, 0, rd, rs1, rs2, imm, False, word)

    if opcode == OP_RTYPE:
        m = _R_BY_FUNCTS.get((funct3, funct7))
        if m is None:
            raise IllegalInstruction(
                f"{word:#010x}: R-type funct3={funct3:03b} funct7={funct7:07b} unsupported"
            )
        return make(m, rd, rs1, rs2, funct7=funct7)
    if opcode == OP_JAL:
        if (word >> 12) & 0xFF:
            raise IllegalInstruction(f"{word:#010x}: JAL bits[19:12] must be zero")
        return make(Mnemonic.JAL, rd=rd, imm=word >> 20)
    for m, (op, f3) in _BASE_OPS.items():
        if op == opcode:
            if f3 != funct3:
                break
            if m in (Mnemonic.ADDI, Mnemonic.LW):
                return make(m, rd, rs1, imm=sext(word >> 20, 12))
            s_imm = sext((funct7 << 5) | rd, 12)
            if m is Mnemonic.SW:
                return make(m, rs1=rs1, rs2=rs2, imm=s_imm)
            return make(m, rs1=rs1, rs2=rs2, imm=s_imm << 2)
    raise IllegalInstruction(f"{word:#010x}: opcode={opcode:07b} funct3={funct3:03b} unsupported")


def decode16(half: int) -> Instruction:
    if half & 0b11 == 0b11:
        raise WidthMismatch(f"{half:#06x} has bits[1:0] == 11 (base width)")
    if half >> 16:
        raise WidthMismatch(f"{half:#x} does not fit in 16 bits")
    funct3 = half >> 13
    quadrant = half & 0b11
    sel = op_c(half)
    r_hi = (half >> 7) & 0b111
    r_lo = (half >> 2) & 0b111

    def make(m, rd=0, rs1=0, rs2=0, imm=0, funct2=0):
        return Instruction(m, sel, funct3, 0, funct2, rd, rs1, rs2, imm, True, half)

    if (funct3, quadrant) == _COMP_OPS[Fmt.CA]:
        if half >> 10 != CA_FUNCT6:
            raise IllegalInstruction(f"{half:#06x}: compressed funct6 {half >> 10:06b} unsupported")
        funct2 = (half >> 5) & 0b11
        return make(_CA_BY_FUNCT2[funct2], r_hi, r_hi, r_lo, funct2=funct2)
    if (funct3, quadrant) in (_COMP_OPS[Fmt.CL], _COMP_OPS[Fmt.CS]):
        imm = (((half >> 10) & 0b111) << 2 | (half >> 5) & 0b11) << 2
        if funct3 == _COMP_OPS[Fmt.CL][0]:
            return make(Mnemonic.C_LW, rd=r_lo, rs1=r_hi, imm=imm)
        return make(Mnemonic.C_SW, rs1=r_hi, rs2=r_lo, imm=imm)
    if (funct3, quadrant) == _COMP_OPS[Fmt.CJ]:
        return make(Mnemonic.C_JAL, rd=C_JAL_LINK, imm=sext(half >> 2, 11) << 1)
    raise IllegalInstruction(f"{half:#06x}: op_c={sel:05b} unsupported")


def decode(word: int) -> Instruction:
    """Decode by width marker; a compressed instruction uses only the low halfword."""
    if is_compressed(word):
        return decode16(word & 0xFFFF)
    return decode32(word)


def _check_imm(fmt: Fmt, imm: int) -> int:
    lo, hi, step = IMM_RANGE[fmt]
    if not lo <= imm <= hi:
        raise ImmediateOutOfRange(f"immediate {imm} outside [{lo}, {hi}] for {fmt.value}-format")
    if imm % step:
        raise ImmediateOutOfRange(f"immediate {imm} is not a multiple of {step} for {fmt.value}-format")
    return imm // step


def _check_regs(compressed: bool, **regs):
    limit = 8 if compressed else 32
    for name, r in regs.items():
        if not 0 <= r < limit:
            raise RegisterOutOfRange(f"{name}=x{r} outside x0-x{limit - 1}")


def encode_fields(mnemonic, rd=0, rs1=0, rs2=0, imm=0) -> int:
    """Encode from operands alone. Unused operands must be zero."""
    m = Mnemonic(mnemonic)
    fmt = FORMAT[m]
    if fmt is Fmt.R:
        _check_regs(False, rd=rd, rs1=rs1, rs2=rs2)
        funct3, funct7 = R_FUNCTS[m]
        return funct7 << 25 | rs2 << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | OP_RTYPE
    if fmt is Fmt.CA:
        if rd != rs1:
            raise EncodeError(f"{m}: rd (x{rd}) and rs1 (x{rs1}) must name the same register")
        _check_regs(True, rd=rd, rs2=rs2)
        return CA_FUNCT6 << 10 | rd << 7 | CA_FUNCT2[m] << 5 | rs2 << 2 | _COMP_OPS[fmt][1]
    if fmt in (Fmt.CL, Fmt.CS):
        if fmt is Fmt.CL:
            _check_regs(True, rd=rd, rs1=rs1)
            lo_reg = rd
        else:
            _check_regs(True, rs1=rs1, rs2=rs2)
            lo_reg = rs2
        field = _check_imm(fmt, imm)
        funct3, quadrant = _COMP_OPS[fmt]
        return (funct3 << 13 | (field >> 2) << 10 | rs1 << 7 | (field & 0b11) << 5
                | lo_reg << 2 | quadrant)
    if fmt is Fmt.CJ:
        if rd != C_JAL_LINK:
            raise EncodeError(f"C.JAL always links x{C_JAL_LINK}, got rd=x{rd}")
        field = _check_imm(fmt, imm) & 0x7FF
        funct3, quadrant = _COMP_OPS[fmt]
        return funct3 << 13 | field << 2 | quadrant

    opcode, funct3 = _BASE_OPS[m]
    if fmt is Fmt.I:
        _check_regs(False, rd=rd, rs1=rs1)
        field = _check_imm(fmt, imm) & 0xFFF
        return field << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | opcode
    if fmt is Fmt.JABS:
        _check_regs(False, rd=rd)
        return _check_imm(fmt, imm) << 20 | rd << 7 | opcode
    # S and B share a layout
    _check_regs(False, rs1=rs1, rs2=rs2)
    field = _check_imm(fmt, imm) & 0xFFF
    return (field >> 5) << 25 | rs2 << 20 | rs1 << 15 | funct3 << 12 | (field & 0x1F) << 7 | opcode


def encode(instr: Instruction) -> int:
    return encode_fields(instr.mnemonic, instr.rd, instr.rs1, instr.rs2, instr.imm)


def make(mnemonic, rd=0, rs1=None, rs2=0, imm=0) -> Instruction:
    """Build a fully populated Instruction from operands.

    ``rs1`` defaults to ``rd`` for the compressed register-register group and
    to 0 elsewhere; C.JAL's ``rd`` is forced to its fixed link register.
    """
    m = Mnemonic(mnemonic)
    fmt = FORMAT[m]
    if rs1 is None:
        rs1 = rd if fmt is Fmt.CA else 0
    if fmt is Fmt.CJ:
        rd = C_JAL_LINK
    return decode(encode_fields(m, rd, rs1, rs2, imm))


def canonical(mnemonic) -> Instruction:
    """A representative all-zero-operand instance of ``mnemonic``."""
    return make(mnemonic)


def disassemble(instr: Instruction) -> str:
    m = instr.mnemonic
    name = m.value.lower()
    fmt = FORMAT[m]
    if fmt is Fmt.R:
        return f"{name} x{instr.rd}, x{instr.rs1}, x{instr.rs2}"
    if fmt is Fmt.CA:
        return f"{name} x{instr.rd}, x{instr.rs2}"
    if m is Mnemonic.ADDI:
        return f"{name} x{instr.rd}, x{instr.rs1}, {instr.imm}"
    if m in (Mnemonic.LW, Mnemonic.C_LW):
        return f"{name} x{instr.rd}, {instr.imm}(x{instr.rs1})"
    if m in (Mnemonic.SW, Mnemonic.C_SW):
        return f"{name} x{instr.rs2}, {instr.imm}(x{instr.rs1})"
    if m is Mnemonic.BEQ:
        return f"{name} x{instr.rs1}, x{instr.rs2}, {instr.imm}"
    if m is Mnemonic.JAL:
        return f"{name} x{instr.rd}, {instr.imm}"
    return f"{name} {instr.imm}"

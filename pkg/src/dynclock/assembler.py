"""Two-pass assembler, image disassembler and memory-image file formats.

Dialect::

    label:  add   x3, x1, x2        # comment
            addi  x1, x0, -5        // comment
            lw    x5, 0(x0)
            sw    x4, 8(x1)
            beq   x1, x2, label     # PC-relative
            jal   x8, label         # absolute byte address
            c.and x2, x3
            c.lw  x2, 4(x3)
            c.jal label             # PC-relative, links x1
            .word 0x1234            # also: .half N, .org ADDR, .align N

Registers are ``x0``-``x31``; ``R0``-``R31`` are accepted too.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import isa
from .datapath import Layout
from .errors import (
    AsmSyntaxError,
    DecodeError,
    DuplicateLabel,
    EncodeError,
    ImmediateOutOfRange,
    MalformedLine,
    MisalignedTarget,
    UndefinedLabel,
)
from .isa import Fmt, Mnemonic

DIRECTIVES = (".word", ".half", ".org", ".align")

_MNEMONICS = {m.value.lower(): m for m in Mnemonic}

# operand shapes per format: r=register, i=immediate, t=target (label or
# number), m=imm(reg)
_SHAPES = {
    Fmt.R: "rrr",
    Fmt.I: "rri",
    Fmt.S: "rm",
    Fmt.B: "rrt",
    Fmt.JABS: "rt",
    Fmt.CA: "rr",
    Fmt.CL: "rm",
    Fmt.CS: "rm",
    Fmt.CJ: "t",
}

_REG_RE = re.compile(r"^(?:x|R|r)(\d+)$")
_NUM_RE = re.compile(r"^[+-]?(?:0[xX][0-9a-fA-F]+|0[bB][01]+|\d+)$")
_LABEL_RE = re.compile(r"^[A-Za-z_.$][\w.$]*$")
_MEM_RE = re.compile(r"^(.*)\(\s*([^()]+?)\s*\)$")


@dataclass(frozen=True)
class Operand:
    kind: str  # "reg", "imm", "label", "mem"
    value: object
    base: int | None = None  # register of a "mem" operand


@dataclass
class Statement:
    line: int
    column: int
    labels: list = field(default_factory=list)
    name: str | None = None  # lowercase mnemonic or directive
    operands: list = field(default_factory=list)

    @property
    def mnemonic(self) -> Mnemonic | None:
        return _MNEMONICS.get(self.name)


@dataclass
class SourceProgram:
    statements: list
    labels: dict  # label -> defining line


@dataclass
class Image:
    data: bytes = b""
    base: int = 0
    symbols: dict = field(default_factory=dict)
    mode: Layout = Layout.PACKED

    @property
    def end(self) -> int:
        return self.base + len(self.data)

    def contains(self, addr: int) -> bool:
        return self.base <= addr < self.end

    def half(self, addr: int) -> int:
        off = addr - self.base
        return int.from_bytes(self.data[off:off + 2], "little")

    def word(self, addr: int) -> int:
        off = addr - self.base
        return int.from_bytes(self.data[off:off + 4], "little")

    def words(self) -> list:
        """32-bit words, a trailing halfword zero-extended."""
        return [int.from_bytes(self.data[i:i + 4], "little") for i in range(0, len(self.data), 4)]


# -- parsing

def _strip_comment(text: str) -> str:
    cut = len(text)
    for marker in ("#", "//"):
        i = text.find(marker)
        if i != -1:
            cut = min(cut, i)
    return text[:cut]


def _parse_number(tok: str) -> int | None:
    if not _NUM_RE.match(tok):
        return None
    return int(tok, 0) if not re.match(r"^[+-]?0\d", tok) else int(tok, 10)


def _parse_reg(tok: str, line: int) -> int | None:
    m = _REG_RE.match(tok)
    if not m:
        return None
    n = int(m.group(1))
    if n > 31:
        raise AsmSyntaxError(f"no such register {tok!r}", line)
    return n


def _parse_operand(tok: str, line: int) -> Operand:
    tok = tok.strip()
    if not tok:
        raise AsmSyntaxError("empty operand", line)
    reg = _parse_reg(tok, line)
    if reg is not None:
        return Operand("reg", reg)
    num = _parse_number(tok)
    if num is not None:
        return Operand("imm", num)
    mem = _MEM_RE.match(tok)
    if mem:
        off_tok = mem.group(1).strip() or "0"
        off = _parse_number(off_tok)
        base = _parse_reg(mem.group(2), line)
        if off is None or base is None:
            raise AsmSyntaxError(f"bad memory operand {tok!r}", line)
        return Operand("mem", off, base)
    if _LABEL_RE.match(tok):
        return Operand("label", tok)
    raise AsmSyntaxError(f"cannot parse operand {tok!r}", line)


_ACCEPTS = {"r": ("reg",), "i": ("imm",), "t": ("imm", "label"), "m": ("mem",)}
_SHAPE_NAMES = {"r": "register", "i": "immediate", "t": "label or offset", "m": "imm(reg)"}


def _check_shape(stmt: Statement) -> None:
    m = stmt.mnemonic
    shape = "rm" if m is Mnemonic.LW else _SHAPES[isa.FORMAT[m]]
    ops = stmt.operands
    if m is Mnemonic.JAL and len(ops) == 1:
        # "jal target" links x1
        stmt.operands = ops = [Operand("reg", 1), *ops]
    if len(ops) != len(shape):
        raise AsmSyntaxError(f"{stmt.name} takes {len(shape)} operand(s), got {len(ops)}", stmt.line)
    for i, (want, op) in enumerate(zip(shape, ops), 1):
        if op.kind not in _ACCEPTS[want]:
            raise AsmSyntaxError(
                f"{stmt.name} operand {i}: expected {_SHAPE_NAMES[want]}, got {op.kind}", stmt.line)


def parse(source: str) -> SourceProgram:
    statements = []
    labels = {}
    pending = []
    for lineno, raw_line in enumerate(source.splitlines(), 1):
        text = _strip_comment(raw_line)
        # leading "name:" definitions, possibly several
        while True:
            m = re.match(r"^\s*([A-Za-z_.$][\w.$]*)\s*:", text)
            if not m:
                break
            name = m.group(1)
            if _REG_RE.match(name) or name.lower() in _MNEMONICS or name in DIRECTIVES:
                raise AsmSyntaxError(f"{name!r} cannot be used as a label", lineno)
            if name in labels:
                raise DuplicateLabel(f"label {name!r} already defined on line {labels[name]}", lineno)
            labels[name] = lineno
            pending.append(name)
            text = text[m.end():]
        body = text.strip()
        if not body:
            continue
        column = raw_line.find(body) + 1
        head, *tail = body.split(None, 1)
        rest = tail[0] if tail else ""
        name = head.lower()
        if name not in _MNEMONICS and name not in DIRECTIVES:
            raise AsmSyntaxError(f"unknown mnemonic {head!r}", lineno)
        rest = rest.strip()
        operands = [_parse_operand(tok, lineno) for tok in rest.split(",")] if rest else []
        stmt = Statement(lineno, column, pending, name, operands)
        pending = []
        if stmt.mnemonic is not None:
            _check_shape(stmt)
        else:
            _check_directive(stmt)
        statements.append(stmt)
    if pending:
        statements.append(Statement(len(source.splitlines()) + 1, 1, pending))
    return SourceProgram(statements, labels)


def _check_directive(stmt: Statement) -> None:
    ops = stmt.operands
    if len(ops) != 1:
        raise AsmSyntaxError(f"{stmt.name} takes exactly one operand", stmt.line)
    allowed = ("imm", "label") if stmt.name in (".word", ".half") else ("imm",)
    if ops[0].kind not in allowed:
        raise AsmSyntaxError(f"{stmt.name} operand must be a number", stmt.line)
    if stmt.name == ".align":
        n = ops[0].value
        if n < 1 or n & (n - 1):
            raise AsmSyntaxError(f".align needs a power of two, got {n}", stmt.line)
    if stmt.name == ".org" and ops[0].value < 0:
        raise AsmSyntaxError(".org address must be non-negative", stmt.line)


# -- assembly

def _layout(prog: SourceProgram, mode: Layout):
    """Pass 1: assign an address to every statement and label."""
    symbols = {}
    addrs = []
    addr = 0
    for stmt in prog.statements:
        if stmt.name == ".org":
            target = stmt.operands[0].value
            if target < addr:
                raise MisalignedTarget(f".org {target:#x} is behind current address {addr:#x}", stmt.line)
            if target % 2:
                raise MisalignedTarget(f".org {target:#x} is not halfword aligned", stmt.line)
            addr = target
        elif stmt.name == ".align":
            n = stmt.operands[0].value
            addr = -(-addr // n) * n
        for label in stmt.labels:
            symbols[label] = addr
        addrs.append(addr)
        m = stmt.mnemonic
        if m is not None:
            if addr % mode.alignment:
                raise MisalignedTarget(
                    f"instruction at {addr:#x} not {mode.alignment}-byte aligned ({mode.value})", stmt.line)
            addr += mode.slot_size(m.compressed)
        elif stmt.name == ".word":
            addr += 4
        elif stmt.name == ".half":
            addr += 2
    return addrs, symbols, addr


def _resolve(op: Operand, symbols: dict, line: int) -> tuple:
    """Return (value, came_from_label)."""
    if op.kind == "label":
        if op.value not in symbols:
            raise UndefinedLabel(f"undefined label {op.value!r}", line)
        return symbols[op.value], True
    return op.value, False


def _encode_stmt(stmt: Statement, pc: int, symbols: dict, mode: Layout) -> int:
    m = stmt.mnemonic
    fmt = isa.FORMAT[m]
    ops = stmt.operands
    line = stmt.line
    rd = rs1 = rs2 = imm = 0
    if fmt is Fmt.R:
        rd, rs1, rs2 = (o.value for o in ops)
    elif m is Mnemonic.LW:
        rd, imm, rs1 = ops[0].value, ops[1].value, ops[1].base
    elif fmt is Fmt.I:
        rd, rs1, imm = ops[0].value, ops[1].value, ops[2].value
    elif fmt in (Fmt.S, Fmt.CS):
        rs2, imm, rs1 = ops[0].value, ops[1].value, ops[1].base
    elif fmt is Fmt.CL:
        rd, imm, rs1 = ops[0].value, ops[1].value, ops[1].base
    elif fmt is Fmt.CA:
        rd = rs1 = ops[0].value
        rs2 = ops[1].value
    elif fmt is Fmt.B:
        rs1, rs2 = ops[0].value, ops[1].value
        target, is_label = _resolve(ops[2], symbols, line)
        imm = target - pc if is_label else target
        if imm % 4:
            raise MisalignedTarget(f"branch offset {imm} is not a multiple of 4", line)
    elif fmt is Fmt.JABS:
        rd = ops[0].value
        imm, _ = _resolve(ops[1], symbols, line)
        if imm % mode.alignment:
            raise MisalignedTarget(f"jump target {imm:#x} not {mode.alignment}-byte aligned", line)
    elif fmt is Fmt.CJ:
        rd = isa.C_JAL_LINK
        target, is_label = _resolve(ops[0], symbols, line)
        imm = target - pc if is_label else target
        if imm % mode.alignment:
            raise MisalignedTarget(f"c.jal offset {imm} not a multiple of {mode.alignment}", line)
    try:
        return isa.encode_fields(m, rd, rs1, rs2, imm)
    except EncodeError as exc:
        raise type(exc)(str(exc), line) from None


def assemble(prog, mode: Layout = Layout.PACKED) -> Image:
    """Assemble a SourceProgram (or source text) into an Image."""
    if isinstance(prog, str):
        prog = parse(prog)
    mode = Layout(mode)
    addrs, symbols, end = _layout(prog, mode)
    out = bytearray(end)
    for stmt, addr in zip(prog.statements, addrs):
        m = stmt.mnemonic
        if m is not None:
            raw = _encode_stmt(stmt, addr, symbols, mode)
            width = 2 if m.compressed else 4
            out[addr:addr + width] = raw.to_bytes(width, "little")
        elif stmt.name in (".word", ".half"):
            width = 4 if stmt.name == ".word" else 2
            value, _ = _resolve(stmt.operands[0], symbols, stmt.line)
            if not -(1 << (8 * width - 1)) <= value < (1 << (8 * width)):
                raise ImmediateOutOfRange(f"{stmt.name} value {value} does not fit {8 * width} bits", stmt.line)
            out[addr:addr + width] = (value & ((1 << (8 * width)) - 1)).to_bytes(width, "little")
    return Image(bytes(out), 0, symbols, mode)


# -- disassembly

def _reassemblable(instr: isa.Instruction, mode: Layout) -> bool:
    if instr.mnemonic in (Mnemonic.JAL, Mnemonic.C_JAL):
        return instr.imm % mode.alignment == 0
    return True


def disassemble_image(img: Image) -> list:
    """Return (address, text) pairs that re-assemble to the same bytes."""
    mode = img.mode
    out = []
    addr = img.base
    while addr < img.end:
        left = img.end - addr
        if left < 4:
            half = img.half(addr)
            text = None
            if mode is Layout.PACKED and isa.is_compressed(half):
                text = _try_decode(half, mode)
            out.append((addr, text or f".half {half:#06x}"))
            addr += 2
            continue
        word = img.word(addr)
        if mode is Layout.PACKED and isa.is_compressed(word):
            half = word & 0xFFFF
            out.append((addr, _try_decode(half, mode) or f".half {half:#06x}"))
            addr += 2
            continue
        text = None
        if not isa.is_compressed(word) or word >> 16 == 0:
            text = _try_decode(word, mode)
        out.append((addr, text or f".word {word:#010x}"))
        addr += 4
    return out


def _try_decode(word: int, mode: Layout) -> str | None:
    try:
        instr = isa.decode(word)
    except DecodeError:
        return None
    return isa.disassemble(instr) if _reassemblable(instr, mode) else None


def disassemble_text(img: Image, addresses: bool = False) -> str:
    lines = []
    for addr, text in disassemble_image(img):
        lines.append(f"{text:<28}# {addr:#06x}" if addresses else text)
    return "\n".join(lines) + ("\n" if lines else "")


# -- image files

class ImageFormat(str, enum.Enum):
    BINTEXT = "bintext"
    HEXTEXT = "hextext"
    BIN = "bin"

    @classmethod
    def guess(cls, path) -> ImageFormat:
        suffix = Path(path).suffix.lower()
        if suffix == ".bin":
            return cls.BIN
        if suffix in (".hex", ".hextext", ".mem"):
            return cls.HEXTEXT
        return cls.BINTEXT


def _text_units(data: bytes):
    for i in range(0, len(data), 4):
        chunk = data[i:i + 4]
        yield int.from_bytes(chunk, "little"), len(chunk) * 8


def format_image(img: Image, fmt) -> bytes:
    fmt = ImageFormat(fmt)
    if fmt is ImageFormat.BIN:
        return bytes(img.data)
    if len(img.data) % 2:
        raise ValueError("image length must be a whole number of halfwords")
    lines = []
    for value, bits in _text_units(img.data):
        if fmt is ImageFormat.BINTEXT:
            lines.append(f"{value:0{bits}b}")
        else:
            lines.append(f"{value:0{bits // 4}x}")
    return "".join(line + "\n" for line in lines).encode("ascii")


def write_image(img: Image, path, fmt=None) -> None:
    fmt = ImageFormat(fmt) if fmt else ImageFormat.guess(path)
    Path(path).write_bytes(format_image(img, fmt))


def parse_image(content, fmt, mode: Layout = Layout.PACKED) -> Image:
    fmt = ImageFormat(fmt)
    mode = Layout(mode)
    if fmt is ImageFormat.BIN:
        if isinstance(content, str):
            content = content.encode("latin-1")
        if len(content) % 2:
            raise MalformedLine(f"binary image has odd length {len(content)}")
        return Image(bytes(content), 0, {}, mode)
    if isinstance(content, bytes):
        content = content.decode("ascii", errors="replace")
    digits, radix, full, short = (
        ("01", 2, 32, 16) if fmt is ImageFormat.BINTEXT else ("0123456789abcdefABCDEF", 16, 8, 4)
    )
    rows = []
    for lineno, line in enumerate(content.splitlines(), 1):
        body = line.split("//", 1)[0].strip()
        if not body:
            continue
        if any(c not in digits for c in body):
            raise MalformedLine(f"{body!r} contains non-{fmt.value} digits", lineno)
        if len(body) not in (full, short):
            raise MalformedLine(f"{body!r} has {len(body)} digits, expected {full}", lineno)
        rows.append((lineno, body))
    out = bytearray()
    for i, (lineno, body) in enumerate(rows):
        if len(body) == short and i != len(rows) - 1:
            raise MalformedLine(f"short line {body!r} allowed only as the final halfword", lineno)
        out += int(body, radix).to_bytes(4 if len(body) == full else 2, "little")
    return Image(bytes(out), 0, {}, mode)


def load_image(path, fmt=None, mode: Layout = Layout.PACKED) -> Image:
    fmt = ImageFormat(fmt) if fmt else ImageFormat.guess(path)
    data = Path(path).read_bytes()
    return parse_image(data, fmt, mode)


def load_words(path, fmt=None) -> list:
    """Read an image file as 32-bit words (data-memory initialisation)."""
    return load_image(path, fmt).words()

"""Single-cycle RISC-V subset simulator with an instruction-driven dynamic clock."""

__version__ = "0.1.0"

from .assembler import Image, assemble, disassemble_image, load_image, parse, write_image
from .clocking import ClockConfig, check_timing, period_of, phase_decode
from .control import control_signals
from .datapath import DelayModel, Layout, MachineState, delay_of
from .isa import Instruction, Mnemonic, decode, decode16, decode32, disassemble, encode
from .simulator import SimConfig, dump_state, efficiency_report, run
from .vcd import emit_vcd

__all__ = [
    "ClockConfig", "DelayModel", "Image", "Instruction", "Layout", "MachineState", "Mnemonic",
    "SimConfig", "assemble", "check_timing", "control_signals", "decode", "decode16", "decode32",
    "delay_of", "disassemble", "disassemble_image", "dump_state", "efficiency_report", "emit_vcd",
    "encode", "load_image", "parse", "period_of", "phase_decode", "run", "write_image",
]

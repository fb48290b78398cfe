"""Command-line driver: ``dynclock {asm,disasm,run,report,check-timing}``.

Exit status: 0 on success / clean halt, 1 on usage or I/O errors, 2 when a
timing violation is found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .assembler import ImageFormat, assemble, disassemble_text, load_image, load_words, write_image
from .clocking import ClockConfig, check_timing
from .datapath import DEFAULT_DMEM_WORDS, DelayModel, Layout
from .errors import DynClockError
from .simulator import SimConfig, dump_state, parse_mem_range, run, write_trace
from .vcd import emit_vcd

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TIMING = 2

SOURCE_SUFFIXES = (".s", ".asm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _delays(text: str) -> DelayModel:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three numbers r,a,d in ns, got {text!r}") from None
    if len(parts) != 3 or any(p < 0 for p in parts):
        raise argparse.ArgumentTypeError(f"expected three non-negative numbers r,a,d in ns, got {text!r}")
    return DelayModel.from_ns(*parts)


def _mhz(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("frequency must be positive")
    return value


def _add_format(p, what="image"):
    p.add_argument("--format", choices=["auto"] + [f.value for f in ImageFormat], default="auto",
                   help=f"{what} file format (default: auto, from the file extension: "
                        ".bin -> bin, .hex/.mem -> hextext, otherwise bintext)")


def _add_mode(p):
    p.add_argument("--mode", choices=[m.value for m in Layout], default=Layout.PACKED.value,
                   help="instruction layout (default: packed)")


def _add_timing(p):
    p.add_argument("--master-clock-mhz", type=_mhz, default=500.0, metavar="MHZ",
                   help="master clock frequency in MHz (default: 500)")
    p.add_argument("--delays", type=_delays, default=DelayModel(), metavar="R,A,D",
                   help="register-read, ALU and data-memory delays in ns (default: 6,6,4)")


def _add_sim(p):
    p.add_argument("image", help="memory image, or assembly source (.s/.asm) assembled on the fly")
    _add_mode(p)
    _add_format(p)
    _add_timing(p)
    p.add_argument("--max-steps", type=int, default=10000, metavar="N",
                   help="stop after N instructions (default: 10000)")
    p.add_argument("--init-dmem", metavar="FILE", default=None,
                   help="initial data-memory contents, same formats as images (default: all zero)")
    p.add_argument("--init-dmem-format", choices=["auto"] + [f.value for f in ImageFormat],
                   default="auto", help="format of --init-dmem (default: auto)")
    p.add_argument("--dmem-words", type=int, default=DEFAULT_DMEM_WORDS, metavar="N",
                   help=f"data-memory size in words (default: {DEFAULT_DMEM_WORDS})")
    p.add_argument("--reset-cycles", type=int, default=0, metavar="N",
                   help="idle reset periods before the first instruction (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dynclock", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("asm", help="assemble a source file into a memory image")
    p.add_argument("source", help="assembly source file")
    p.add_argument("-o", "--output", required=True, help="output image path")
    _add_format(p, "output")
    _add_mode(p)

    p = sub.add_parser("disasm", help="disassemble a memory image")
    p.add_argument("image", help="memory image file")
    _add_format(p)
    _add_mode(p)
    p.add_argument("-o", "--output", default=None, help="write listing here (default: stdout)")
    p.add_argument("--addresses", action="store_true", help="annotate each line with its address (default: off)")

    p = sub.add_parser("run", help="simulate an image")
    _add_sim(p)
    p.add_argument("--trace", metavar="OUT.jsonl", default=None,
                   help="write one JSON record per executed instruction (default: off)")
    p.add_argument("--vcd", metavar="OUT.vcd", default=None,
                   help="write master/derived clock waveforms (default: off)")
    p.add_argument("--dump-regs", action="store_true", help="print the register file after the run (default: off)")
    p.add_argument("--dump-mem", metavar="A:B", default=None,
                   help="print data memory bytes [A, B), word aligned (default: off)")
    p.add_argument("--json", action="store_true", help="print dumps as JSON instead of text (default: off)")

    p = sub.add_parser("report", help="simulate and compare dynamic against fixed clocking")
    _add_sim(p)
    p.add_argument("--json", action="store_true", help="print the report as JSON (default: off)")

    p = sub.add_parser("check-timing", help="check every instruction's delay against its clock period")
    _add_timing(p)
    p.add_argument("--json", action="store_true", help="print rows as JSON (default: off)")
    return parser


def _fmt(value, path):
    return ImageFormat.guess(path) if value == "auto" else ImageFormat(value)


def _load_program(args):
    mode = Layout(args.mode)
    path = Path(args.image)
    if path.suffix.lower() in SOURCE_SUFFIXES:
        return assemble(path.read_text(), mode)
    return load_image(path, _fmt(args.format, path), mode)


def _sim_config(args, trace=True) -> SimConfig:
    if args.max_steps <= 0:
        raise DynClockError("--max-steps must be positive")
    if args.reset_cycles < 0:
        raise DynClockError("--reset-cycles must be non-negative")
    if args.dmem_words <= 0:
        raise DynClockError("--dmem-words must be positive")
    return SimConfig(
        mode=Layout(args.mode),
        clock=ClockConfig.from_mhz(args.master_clock_mhz),
        delays=args.delays,
        max_steps=args.max_steps,
        reset_cycles=args.reset_cycles,
        dmem_words=args.dmem_words,
        trace=trace,
    )


def _simulate(args):
    img = _load_program(args)
    cfg = _sim_config(args)
    dmem_init = None
    if args.init_dmem:
        dmem_init = load_words(args.init_dmem, _fmt(args.init_dmem_format, args.init_dmem))
    return run(img, cfg, dmem_init), cfg


def _summary(result) -> str:
    line = (f"halted: {result.halt_reason} after {result.steps} instruction(s), "
            f"{result.end_time_ps / 1000:g} ns")
    if result.fault:
        line += f" ({result.fault})"
    return line


def _timing_warning(result) -> str:
    return f"timing violation: minimum slack {result.min_slack_ps / 1000:g} ns"


def cmd_asm(args):
    path = Path(args.source)
    img = assemble(path.read_text(), Layout(args.mode))
    write_image(img, args.output, _fmt(args.format, args.output))
    return EXIT_OK


def cmd_disasm(args):
    path = Path(args.image)
    img = load_image(path, _fmt(args.format, path), Layout(args.mode))
    text = disassemble_text(img, addresses=args.addresses)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args):
    mem_span = None
    if args.dump_mem:
        mem_span = parse_mem_range(args.dump_mem, args.dmem_words)
    result, cfg = _simulate(args)
    print(_summary(result), file=sys.stderr)
    if args.trace:
        with open(args.trace, "w", newline="\n") as fp:
            write_trace(result, fp)
    if args.vcd:
        emit_vcd(result, cfg, args.vcd)
    if args.dump_regs or mem_span:
        print(dump_state(result, regs=args.dump_regs, mem_range=mem_span,
                         fmt="json" if args.json else "text"))
    if not result.timing_ok:
        print(_timing_warning(result), file=sys.stderr)
        return EXIT_TIMING
    return EXIT_OK


def cmd_report(args):
    result, _ = _simulate(args)
    metrics = result.metrics
    if args.json:
        print(json.dumps({"halt_reason": result.halt_reason, **metrics.as_dict()}, indent=2))
    else:
        print(_summary(result))
        print(metrics.table())
    if not result.timing_ok:
        print(_timing_warning(result), file=sys.stderr)
        return EXIT_TIMING
    return EXIT_OK


def cmd_check_timing(args):
    report = check_timing(args.delays, ClockConfig.from_mhz(args.master_clock_mhz))
    if args.json:
        print(json.dumps(report.as_dicts(), indent=2))
    else:
        print("\n".join(report.lines()))
        status = "ok" if report.ok else f"FAILED ({len(report.violations)} violation(s))"
        print(f"minimum slack {report.min_slack_ps / 1000:g}ns: {status}")
    return EXIT_OK if report.ok else EXIT_TIMING


COMMANDS = {
    "asm": cmd_asm,
    "disasm": cmd_disasm,
    "run": cmd_run,
    "report": cmd_report,
    "check-timing": cmd_check_timing,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DynClockError, OSError, ValueError) as exc:
        print(f"dynclock {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

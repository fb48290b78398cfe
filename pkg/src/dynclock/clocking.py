"""Dynamic clock source.

The phase decoder maps each fetched instruction to a shift value; the phase
shifter is a counter on the master clock that turns a shift value into one
derived clock period of ``shift + 1`` master ticks, high for ``shift >> 1``
of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .datapath import DelayModel, delay_of
from .errors import DegenerateShift, TimingViolation
from .isa import Mnemonic, canonical, op_c

RESET_SHIFT = 6
DEFAULT_SHIFT = 6

BASE_SHIFTS = {
    0b0110011: 6,  # R-type
    0b0100011: 6,  # SW
    0b0000011: 8,  # LW
    0b0010011: 6,  # ADDI
    0b1100011: 6,  # BEQ
    0b1101111: 2,  # JAL
}

# keyed by op_c = {instr[15:13], instr[1:0]}
COMPRESSED_SHIFTS = {
    0b10001: 6,  # C.AND / C.OR / C.XOR / C.SUB
    0b11000: 6,  # C.SW
    0b01000: 8,  # C.LW
    0b00101: 2,  # C.JAL
}


@dataclass(frozen=True)
class ClockConfig:
    master_period_ps: int = 2000

    def __post_init__(self):
        if int(self.master_period_ps) != self.master_period_ps or self.master_period_ps <= 0:
            raise ValueError(f"master period must be a positive integer ps, got {self.master_period_ps!r}")

    @classmethod
    def from_mhz(cls, mhz: float) -> ClockConfig:
        if mhz <= 0:
            raise ValueError(f"master clock frequency must be positive, got {mhz}")
        return cls(round(1e6 / mhz))

    @classmethod
    def from_ns(cls, ns: float) -> ClockConfig:
        return cls(round(ns * 1000))

    @property
    def master_mhz(self) -> float:
        return 1e6 / self.master_period_ps


@dataclass(frozen=True)
class ShifterState:
    count: int = 0
    clk: int = 1


def phase_decode(word: int, rst: bool = False) -> int:
    if rst:
        return RESET_SHIFT
    if word & 0b11 == 0b11:
        return BASE_SHIFTS.get(word & 0x7F, DEFAULT_SHIFT)
    return COMPRESSED_SHIFTS.get(op_c(word & 0xFFFF), DEFAULT_SHIFT)


def _check_shift(shift: int) -> None:
    if shift < 2:
        raise DegenerateShift(f"shift value {shift} leaves no high phase (need >= 2)")


def period_of(shift: int, cfg: ClockConfig = ClockConfig()) -> int:
    """Derived clock period in picoseconds."""
    _check_shift(shift)
    return (shift + 1) * cfg.master_period_ps


def high_ticks(shift: int) -> int:
    _check_shift(shift)
    return shift >> 1


def low_ticks(shift: int) -> int:
    return shift + 1 - high_ticks(shift)


def shifter_tick(state: ShifterState, shift: int, rst: bool = False) -> ShifterState:
    """Advance the shifter by one master-clock rising edge."""
    _check_shift(shift)
    if rst:
        count = 0
    elif state.count < shift:
        count = state.count + 1
    else:
        count = 0
    return ShifterState(count, int(count < (shift >> 1)))


@dataclass(frozen=True)
class TimingRow:
    mnemonic: Mnemonic
    delay_ps: int
    shift: int
    period_ps: int

    @property
    def slack_ps(self) -> int:
        return self.period_ps - self.delay_ps

    @property
    def ok(self) -> bool:
        return self.slack_ps > 0


def _ns(ps: int) -> str:
    return f"{ps / 1000:g}ns"


@dataclass
class TimingReport:
    rows: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [r for r in self.rows if not r.ok]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def min_slack_ps(self) -> int:
        return min(r.slack_ps for r in self.rows)

    def check(self) -> TimingReport:
        if self.violations:
            names = ", ".join(str(r.mnemonic) for r in self.violations)
            raise TimingViolation(f"non-positive slack for {names}", self.violations)
        return self

    def lines(self) -> list:
        return [
            f"{r.mnemonic}: delay {_ns(r.delay_ps)}, period {_ns(r.period_ps)}, "
            f"slack {_ns(r.slack_ps)}" + ("" if r.ok else "  TIMING VIOLATION")
            for r in self.rows
        ]

    def as_dicts(self) -> list:
        return [
            {"mnemonic": str(r.mnemonic), "delay_ps": r.delay_ps, "shift": r.shift,
             "period_ps": r.period_ps, "slack_ps": r.slack_ps, "ok": r.ok}
            for r in self.rows
        ]


def check_timing(model: DelayModel = DelayModel(), cfg: ClockConfig = ClockConfig()) -> TimingReport:
    """Compare every supported instruction's delay with the period it is given.

    Violations are reported, not raised; call ``.check()`` to raise.
    """
    rows = []
    for m in Mnemonic:
        instr = canonical(m)
        shift = phase_decode(instr.raw)
        rows.append(TimingRow(m, delay_of(instr, model), shift, period_of(shift, cfg)))
    return TimingReport(rows)


def max_period(cfg: ClockConfig = ClockConfig()) -> int:
    """Longest period the decoder can request: the fixed clock that is always safe."""
    return max(period_of(phase_decode(canonical(m).raw), cfg) for m in Mnemonic)

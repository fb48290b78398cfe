"""Exception hierarchy shared by every dynclock module."""


class DynClockError(Exception):
    """Base class. ``line`` is set when the error points at source text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# -- instruction decoding / encoding

class DecodeError(DynClockError):
    pass


class IllegalInstruction(DecodeError):
    pass


class WidthMismatch(IllegalInstruction):
    """Width marker bits[1:0] disagree with the decoder being used."""


class EncodeError(DynClockError, ValueError):
    pass


class ImmediateOutOfRange(EncodeError):
    pass


class RegisterOutOfRange(EncodeError):
    pass


# -- execution faults

class MemoryFault(DynClockError):
    pass


class UnalignedAccess(MemoryFault):
    pass


class OutOfBounds(MemoryFault):
    pass


class InvalidJumpTarget(DynClockError):
    pass


# -- clocking

class DegenerateShift(DynClockError, ValueError):
    pass


class TimingViolation(DynClockError):
    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = list(rows)


# -- assembler and image files

class AssemblerError(DynClockError):
    pass


class AsmSyntaxError(AssemblerError):
    pass


class DuplicateLabel(AssemblerError):
    pass


class UndefinedLabel(AssemblerError):
    pass


class MisalignedTarget(AssemblerError):
    pass


class MalformedLine(DynClockError):
    pass


class SelectorError(DynClockError, ValueError):
    pass

"""Hot loops: the pre-decoded execute loop and the phase-shifter replay.

A compiled Cython build is used when it imported cleanly; otherwise the
pure-Python twin in ``_pykernels`` is used. Both expose the same functions
with the same results, and ``BACKEND`` names the one in use.
"""

from . import _pykernels

try:
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:  # extension not built
    _impl = _pykernels
    BACKEND = "python"

# execute() halt codes
HALT_PC_OUT = 0
HALT_MAX_STEPS = 1
HALT_ILLEGAL = 2
HALT_MEM_FAULT = 3
HALT_BAD_TARGET = 4

# pre-decoded table: one row of STRIDE int64 per instruction slot
STRIDE = 9
COL_CLS, COL_ALU, COL_RD, COL_RS1, COL_RS2, COL_IMM, COL_SIZE, COL_PERIOD, COL_DELAY = range(STRIDE)

CLS_ILLEGAL = -1
CLS_ALU_REG = 0
CLS_ALU_IMM = 1
CLS_LOAD = 2
CLS_STORE = 3
CLS_BRANCH = 4
CLS_JUMP_ABS = 5
CLS_JUMP_REL = 6

execute = _impl.execute
replay_shifter = _impl.replay_shifter


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _pykernels}
    if BACKEND == "cython":
        found["cython"] = _impl
    return found

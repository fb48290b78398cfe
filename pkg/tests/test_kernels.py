from array import array

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynclock import assemble, kernels
from dynclock.clocking import ShifterState, shifter_tick
from dynclock.datapath import Layout
from dynclock.simulator import SimConfig, predecode

from programs import control_flow_program

BACKENDS = kernels.backends()


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert kernels.execute is BACKENDS[kernels.BACKEND].execute


@pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")
def test_cython_backend_is_compiled():
    assert BACKENDS["cython"].__file__.endswith((".so", ".pyd"))


def _execute(mod, table, words, max_steps, unit, end):
    regs = array("I", [0] * 32)
    dmem = array("I", [0] * words)
    out = mod.execute(table, regs, dmem, 0, 0, end, unit, max_steps)
    return out, list(regs), list(dmem)


@given(control_flow_program())
def test_backends_agree_on_execute(case):
    src, packed = case
    mode = Layout.PACKED if packed else Layout.WORD_ALIGNED
    img = assemble(src, mode)
    table = predecode(img, SimConfig(mode=mode))
    results = {name: _execute(mod, table, 64, 500, mode.alignment, img.end)
               for name, mod in BACKENDS.items()}
    first = next(iter(results.values()))
    assert all(r == first for r in results.values())


@given(st.lists(st.integers(2, 15), max_size=30))
def test_replay_matches_shifter_tick(shifts):
    # the replay is the tick-by-tick shifter, switching shift value at each
    # wrap, plus the closing rising edge that ends the last period
    counts, levels = [], []
    state = ShifterState()
    for shift in shifts:
        for _ in range(shift + 1):
            counts.append(state.count)
            levels.append(state.clk)
            state = shifter_tick(state, shift)
    counts.append(state.count)
    levels.append(state.clk)
    for mod in BACKENDS.values():
        c, lv = mod.replay_shifter(shifts)
        assert list(c) == counts and list(lv) == levels


def test_fallback_when_extension_missing():
    import subprocess
    import sys

    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'dynclock.kernels._ckernels':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n"
        "from dynclock import kernels, assemble, run, SimConfig\n"
        "src = open(sys.argv[1]).read()\n"
        "res = run(assemble(src, 'word-aligned'), SimConfig(mode='word-aligned', trace=False))\n"
        "print(kernels.BACKEND, res.state.regs[10], res.dynamic_total_ps)\n"
    )
    from conftest import GOLDEN_SOURCE

    out = subprocess.run([sys.executable, "-c", code, str(GOLDEN_SOURCE)],
                         capture_output=True, text=True, check=True).stdout.split()
    assert out == ["python", "45", "150000"]

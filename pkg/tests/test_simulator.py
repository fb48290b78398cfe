import io
import json
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynclock import Image, assemble, run
from dynclock.clocking import ClockConfig, check_timing
from dynclock.datapath import DelayModel, Layout
from dynclock.errors import MemoryFault, IllegalInstruction, InvalidJumpTarget, SelectorError
from dynclock.simulator import (
    HALT_ILLEGAL,
    HALT_MAX_STEPS,
    HALT_MEMORY_FAULT,
    HALT_PC_OUT,
    SimConfig,
    dump_state,
    efficiency_report,
    parse_mem_range,
    write_trace,
)

from oracle import oracle_run
from programs import control_flow_program, layout, straight_line_program

WA = SimConfig(mode=Layout.WORD_ALIGNED)
STATUS = {"end": HALT_PC_OUT, "max-steps": HALT_MAX_STEPS, "illegal": HALT_ILLEGAL}


@pytest.fixture(params=[True, False], ids=["traced", "kernel"])
def traced(request):
    return request.param


class TestGolden:
    def test_registers(self, golden_image, traced):
        res = run(golden_image, replace(WA, trace=traced))
        r = res.state.regs
        expect = {1: 5, 2: 4, 3: 12, 4: 5, 5: 5, 6: 2, 7: 9, 8: 40, 9: 0, 10: 45}
        assert {k: r[k] for k in expect} == expect
        assert res.state.dmem[0] == 5
        assert res.halt_reason == HALT_PC_OUT and res.state.pc == 48
        assert res.steps == 11
        assert res.dynamic_total_ps == 9 * 14000 + 18000 + 6000 == 150000

    def test_trace(self, golden_image):
        res = run(golden_image, WA)
        pcs = [t.pc for t in res.trace]
        assert pcs == [0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 44]
        assert [t.shift for t in res.trace] == [6, 6, 6, 6, 6, 8, 6, 6, 6, 2, 6]
        acc = 0
        for t in res.trace:
            acc += t.period_ps
            assert t.cumulative_time_ps == acc
            assert t.slack_ps == t.period_ps - t.delay_ps
        assert res.trace[5].effects.loaded_value == 5
        assert res.trace[7].effects.reg_write == (2, 4)
        assert res.min_slack_ps == 2000

    def test_packed_layout(self, golden_source, traced):
        res = run(assemble(golden_source, "packed"), SimConfig(trace=traced))
        r = res.state.regs
        # c.and advances by 2; the link and the final sum shift accordingly
        assert (r[7], r[8], r[9], r[10]) == (9, 38, 0, 43)
        assert res.steps == 11 and res.dynamic_total_ps == 150000

    def test_efficiency(self, golden_image):
        m = run(golden_image, WA).metrics
        assert (m.fixed_total_ps, m.dynamic_total_ps) == (198000, 150000)
        assert m.improvement == pytest.approx(48 / 198, abs=1e-12)
        assert round(100 * m.improvement, 2) == 24.24
        assert m.busy_ps == 9 * 12000 + 16000
        assert m.utilization_fixed == pytest.approx(124 / 198)
        assert m.utilization_dynamic == pytest.approx(124 / 150)
        assert "improvement" in m.table() and "utilization" in m.table()

    def test_golden_fast(self, golden_image):
        import time

        t0 = time.perf_counter()
        run(golden_image, WA)
        assert time.perf_counter() - t0 < 1.0


class TestEfficiencyExamples:
    def test_all_loads(self):
        m = run(assemble("lw x1, 0(x0)\n" * 5)).metrics
        assert m.improvement == 0

    def test_single_jal(self):
        m = run(assemble("jal x1, end\nend:")).metrics
        assert (m.fixed_total_ps, m.dynamic_total_ps) == (18000, 6000)
        assert m.improvement == pytest.approx(2 / 3)

    def test_empty(self):
        m = efficiency_report(run(Image()))
        assert m.improvement == 0 and m.steps == 0


class TestHalts:
    def test_empty_image(self, traced):
        res = run(Image(), SimConfig(trace=traced))
        assert res.halt_reason == HALT_PC_OUT and res.steps == 0 and res.end_time_ps == 0

    def test_max_steps(self, traced):
        res = run(assemble("l: beq x0, x0, l"), SimConfig(max_steps=25, trace=traced))
        assert res.halt_reason == HALT_MAX_STEPS and res.steps == 25
        assert res.dynamic_total_ps == 25 * 14000

    def test_illegal(self, traced):
        res = run(assemble("addi x1, x0, 3\n.word 0\naddi x2, x0, 1"), SimConfig(trace=traced))
        assert res.halt_reason == HALT_ILLEGAL and res.steps == 1 and res.state.pc == 4
        assert res.state.regs[1] == 3 and res.state.regs[2] == 0

    def test_truncated_base_instruction(self, traced):
        img = Image((0x00500093).to_bytes(4, "little")[:2])
        assert run(img, SimConfig(trace=traced)).halt_reason == HALT_ILLEGAL

    @pytest.mark.parametrize("src", ["lw x1, 2(x0)", "sw x1, 256(x0)", "addi x2, x0, -4\nlw x1, 0(x2)"])
    def test_memory_fault(self, src, traced):
        res = run(assemble(src), SimConfig(trace=traced))
        assert res.halt_reason == HALT_MEMORY_FAULT
        assert res.state.regs[1] == 0

    def test_bad_jump_target(self, traced):
        res = run(assemble("jal x1, 400"), SimConfig(trace=traced))
        assert res.halt_reason == HALT_PC_OUT and res.state.pc == 0 and res.state.regs[1] == 0

    @pytest.mark.parametrize("src, exc", [
        ("lw x1, 2(x0)", MemoryFault), (".word 0", IllegalInstruction), ("jal x1, 400", InvalidJumpTarget),
    ])
    def test_raise_policy(self, src, exc, traced):
        with pytest.raises(exc):
            run(assemble(src), SimConfig(on_fault="raise", trace=traced))

    def test_reset_cycles(self, golden_image):
        res = run(golden_image, replace(WA, reset_cycles=2))
        assert res.reset_ps == 28000 and res.end_time_ps == 178000
        assert res.trace[0].start_time_ps == 28000
        assert res.metrics.dynamic_total_ps == 150000

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SimConfig(max_steps=0)
        with pytest.raises(ValueError):
            SimConfig(on_fault="ignore")


def _check_against_oracle(img_bytes, packed, cfg, dmem_init=None):
    ref = oracle_run(img_bytes, packed=packed, max_steps=cfg.max_steps, dmem_init=dmem_init or ())
    res = run(Image(img_bytes, mode=cfg.mode), cfg, dmem_init)
    assert res.state.regs == ref.regs
    assert res.state.dmem == ref.mem
    assert res.state.pc == ref.pc
    assert res.steps == ref.steps
    assert res.halt_reason == STATUS[ref.status]
    return res


@given(straight_line_program, st.booleans(), st.booleans(),
       st.lists(st.integers(0, 2 ** 32 - 1), max_size=64))
def test_oracle_equivalence_straight_line(instrs, packed, traced, init):
    cfg = SimConfig(mode=Layout.PACKED if packed else Layout.WORD_ALIGNED, trace=traced)
    _check_against_oracle(layout(instrs, packed), packed, cfg, init)


@given(control_flow_program(), st.booleans())
def test_oracle_equivalence_control_flow(case, traced):
    src, packed = case
    mode = Layout.PACKED if packed else Layout.WORD_ALIGNED
    img = assemble(src, mode)
    _check_against_oracle(img.data, packed, SimConfig(mode=mode, max_steps=300, trace=traced))


@given(st.binary(min_size=2, max_size=48).map(lambda b: b[: len(b) & ~1]), st.booleans())
def test_oracle_equivalence_random_bytes(data, packed):
    # arbitrary bytes: illegal words and fault halts must agree too
    mode = Layout.PACKED if packed else Layout.WORD_ALIGNED
    ref = oracle_run(data, packed=packed, max_steps=100)
    for traced in (True, False):
        res = run(Image(data, mode=mode), SimConfig(mode=mode, max_steps=100, trace=traced))
        assert res.state.regs == ref.regs and res.state.dmem == ref.mem
        assert (res.state.pc, res.steps) == (ref.pc, ref.steps)
        if ref.status == "fault":
            assert res.halt_reason in (HALT_MEMORY_FAULT, HALT_PC_OUT)
        else:
            assert res.halt_reason == STATUS[ref.status]


passing_timing = st.tuples(
    st.integers(1000, 3000), st.integers(0, 4000), st.integers(0, 4000), st.integers(0, 4000),
).map(lambda t: (ClockConfig(t[0]), DelayModel(*t[1:]))).filter(lambda cd: check_timing(cd[1], cd[0]).ok)


@given(control_flow_program(), passing_timing, passing_timing)
def test_timing_semantics_separation(case, timing_a, timing_b):
    src, packed = case
    mode = Layout.PACKED if packed else Layout.WORD_ALIGNED
    img = assemble(src, mode)
    results = []
    for clock, delays in (timing_a, timing_b):
        res = run(img, SimConfig(mode=mode, clock=clock, delays=delays, max_steps=200))
        assert res.dynamic_total_ps == sum(t.period_ps for t in res.trace)
        assert res.timing_ok
        results.append(res)
    a, b = results
    assert a.state == b.state
    assert a.halt_reason == b.halt_reason and a.steps == b.steps
    assert [t.effects for t in a.trace] == [t.effects for t in b.trace]


@given(control_flow_program())
def test_kernel_path_matches_traced_path(case):
    src, packed = case
    mode = Layout.PACKED if packed else Layout.WORD_ALIGNED
    img = assemble(src, mode)
    cfg = SimConfig(mode=mode, max_steps=300)
    a = run(img, cfg)
    b = run(img, replace(cfg, trace=False))
    assert a.state == b.state and a.halt_reason == b.halt_reason and a.steps == b.steps
    assert (a.dynamic_total_ps, a.busy_ps) == (b.dynamic_total_ps, b.busy_ps)
    if a.steps:
        assert b.min_slack_ps <= a.min_slack_ps


def test_determinism(golden_image):
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        write_trace(run(golden_image, WA), buf)
        outs.append(buf.getvalue())
    assert outs[0] == outs[1]
    lines = outs[0].splitlines()
    assert len(lines) == 11
    first = json.loads(lines[0])
    assert list(first) == ["step", "pc", "raw", "mnemonic", "text", "compressed", "shift",
                           "period_ps", "cumulative_time_ps", "delay_ps", "slack_ps", "effects", "zero"]
    assert "\x1b" not in outs[0]


class TestDump:
    def test_text(self, golden_image):
        out = dump_state(run(golden_image, WA), regs=True, mem_range="0:4")
        assert "x3 = 12" in out.splitlines()
        assert "dmem[0] = 5" in out.splitlines()

    def test_json(self, golden_image):
        doc = json.loads(dump_state(run(golden_image, WA), mem_range=(0, 8), fmt="json"))
        assert doc["regs"]["x10"] == 45 and doc["dmem"] == {"0": 5, "4": 0}

    def test_negative_text_unsigned_json(self):
        res = run(assemble("addi x1, x0, -1"))
        assert "x1 = -1" in dump_state(res)
        assert json.loads(dump_state(res, fmt="json"))["regs"]["x1"] == 0xFFFFFFFF

    @pytest.mark.parametrize("sel", ["0:3", "1:4", "4:0", "0:400", "abc", "0"])
    def test_bad_ranges(self, sel):
        with pytest.raises(SelectorError):
            parse_mem_range(sel, 64)

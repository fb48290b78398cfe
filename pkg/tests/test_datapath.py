import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynclock import isa
from dynclock.control import AluOp, control_signals
from dynclock.datapath import (
    DelayModel,
    Layout,
    MachineState,
    alu_exec,
    delay_of,
    dmem_access,
    regfile_read,
    regfile_write,
    step,
)
from dynclock.errors import InvalidJumpTarget, OutOfBounds, UnalignedAccess
from dynclock.isa import Mnemonic, make

from oracle import ref_alu

u32 = st.integers(0, 2 ** 32 - 1)


class TestRegfile:
    def test_x0_reads_zero_after_write(self):
        s = MachineState()
        regfile_write(s, 0, 99, 1)
        assert regfile_read(s, 0, 0) == (0, 0)

    def test_reset_reads_zero(self):
        assert regfile_read(MachineState(), 1, 2) == (0, 0)

    def test_write_then_read(self):
        s = regfile_write(MachineState(), 1, 5, 1)
        assert regfile_read(s, 1, 0)[0] == 5

    def test_write_enable_gate(self):
        s = regfile_write(MachineState(), 4, 7, 0)
        assert s.regs[4] == 0
        assert regfile_write(s, 4, 7, 1).regs[4] == 7

    def test_write_truncates(self):
        assert regfile_write(MachineState(), 3, -1, 1).regs[3] == 0xFFFFFFFF


@given(st.integers(0, 31), u32, st.integers(0, 1))
def test_x0_invariance(a3, value, we):
    s = MachineState()
    regfile_write(s, a3, value, we)
    assert regfile_read(s, 0, 0) == (0, 0)
    assert s.regs[0] == 0


class TestAlu:
    def test_and_golden_addr28(self):
        r = alu_exec(7, 12, 0b000)
        assert (r.alu_out, r.zero) == (4, 0)

    def test_sub_zero(self):
        r = alu_exec(5, 5, 0b100)
        assert (r.alu_out, r.zero) == (0, 1)

    def test_shift_amount_masked(self):
        assert alu_exec(1, 33, 0b110).alu_out == 2

    def test_slt_unsigned(self):
        assert alu_exec(0xFFFFFFFF, 1, 0b101).alu_out == 0
        assert alu_exec(1, 0xFFFFFFFF, 0b101).alu_out == 1

    def test_zero_only_for_sub(self):
        for code in range(8):
            if code != AluOp.SUB:
                assert alu_exec(3, 3, code).zero == 0


@given(u32, u32, st.integers(0, 7))
def test_alu_matches_big_int_oracle(a, b, code):
    r = alu_exec(a, b, code)
    assert (r.alu_out, r.zero) == ref_alu(a, b, code)


def test_alu_oracle_bulk():
    rng = random.Random(20261014)
    edge = [0, 1, 2, 31, 32, 33, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFE, 0xFFFFFFFF]
    for n in range(100_000):
        a = rng.choice(edge) if n % 7 == 0 else rng.getrandbits(32)
        b = rng.choice(edge) if n % 5 == 0 else rng.getrandbits(32)
        code = n % 8
        r = alu_exec(a, b, code)
        assert (r.alu_out, r.zero) == ref_alu(a, b, code), (a, b, code)


class TestDmem:
    def test_store_then_load(self):
        s = MachineState()
        dmem_access(s, 0, 5, 1)
        assert dmem_access(s, 0)[0] == 5

    def test_unaligned(self):
        with pytest.raises(UnalignedAccess):
            dmem_access(MachineState(), 2)

    def test_out_of_bounds(self):
        s = MachineState()
        with pytest.raises(OutOfBounds):
            dmem_access(s, 4 * len(s.dmem))

    def test_read_returns_old_value_on_write(self):
        s = MachineState()
        dmem_access(s, 8, 1, 1)
        old, _ = dmem_access(s, 8, 2, 1)
        assert old == 1 and s.dmem[2] == 2


def _exec(state, instr, mode=Layout.WORD_ALIGNED, bounds=(0, 48)):
    return step(state, instr, control_signals(instr), mode, bounds)


class TestStep:
    def test_jal_golden_addr36(self):
        s = MachineState(pc=36)
        eff = _exec(s, isa.decode32((44 << 20) | (8 << 7) | 0b1101111))
        assert eff.next_pc == 44 and eff.reg_write == (8, 40)
        assert s.pc == 44 and s.regs[8] == 40

    def test_beq_imm_field_3(self):
        # S-layout field: bits[11:7]=3, bits[31:25]=0; equal operands x0, x0
        raw = (3 << 7) | 0b1100011
        instr = isa.decode32(raw)
        s = MachineState(pc=8)
        eff = _exec(s, instr, bounds=(0, 64))
        assert eff.next_pc == 8 + 12 and eff.zero_flag == 1

    def test_beq_not_taken(self):
        s = MachineState(pc=8)
        s.regs[1] = 1
        eff = _exec(s, make(Mnemonic.BEQ, rs1=1, rs2=0, imm=12))
        assert eff.next_pc == 12 and eff.zero_flag == 0

    def test_c_and_golden_addr28(self):
        s = MachineState(pc=28)
        s.regs[2], s.regs[3] = 7, 12
        eff = _exec(s, isa.decode16(0b1000110101101101))
        assert eff.reg_write == (2, 4) and eff.next_pc == 32

    def test_compressed_advance_by_layout(self):
        for mode, nxt in ((Layout.PACKED, 30), (Layout.WORD_ALIGNED, 32)):
            s = MachineState(pc=28)
            assert _exec(s, make(Mnemonic.C_AND, rd=2, rs2=3), mode).next_pc == nxt

    def test_lw_commits_loaded_word(self):
        s = MachineState()
        s.dmem[1] = 77
        eff = _exec(s, make(Mnemonic.LW, rd=5, rs1=0, imm=4))
        assert eff.loaded_value == 77 and s.regs[5] == 77

    def test_sw(self):
        s = MachineState()
        s.regs[4] = 5
        eff = _exec(s, make(Mnemonic.SW, rs1=0, rs2=4, imm=0))
        assert eff.mem_write == (0, 5) and s.dmem[0] == 5 and eff.reg_write is None

    def test_c_jal_links_x1(self):
        s = MachineState(pc=8)
        eff = _exec(s, make(Mnemonic.C_JAL, imm=-4), Layout.PACKED)
        assert eff.next_pc == 4 and eff.reg_write == (1, 10)

    def test_fault_commits_nothing(self):
        s = MachineState(pc=4)
        s.regs[1] = 9
        before = s.copy()
        with pytest.raises(UnalignedAccess):
            _exec(s, make(Mnemonic.SW, rs1=1, rs2=1, imm=0))
        with pytest.raises(InvalidJumpTarget):
            _exec(s, make(Mnemonic.JAL, rd=1, imm=2))
        with pytest.raises(InvalidJumpTarget):
            _exec(s, make(Mnemonic.JAL, rd=1, imm=100))
        assert s == before

    def test_jump_to_image_end_allowed(self):
        s = MachineState()
        assert _exec(s, make(Mnemonic.JAL, rd=0, imm=48)).next_pc == 48


class TestDelay:
    @pytest.mark.parametrize("m, ps", [
        (Mnemonic.LW, 16000), (Mnemonic.C_LW, 16000), (Mnemonic.ADD, 12000),
        (Mnemonic.SW, 12000), (Mnemonic.BEQ, 12000), (Mnemonic.ADDI, 12000),
        (Mnemonic.C_AND, 12000), (Mnemonic.JAL, 0), (Mnemonic.C_JAL, 0),
    ])
    def test_defaults(self, m, ps):
        assert delay_of(isa.canonical(m)) == ps

    def test_alu_share_derived(self):
        # ALU is what remains of the 16ns load path after register read and memory
        m = DelayModel()
        assert m.alu_ps == 16000 - m.regfile_read_ps - m.dmem_read_ps

    def test_from_ns(self):
        assert DelayModel.from_ns(1, 2.5, 3) == DelayModel(1000, 2500, 3000)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DelayModel(-1, 0, 0)

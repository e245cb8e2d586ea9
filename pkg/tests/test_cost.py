from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from isac_elm.config import SystemConfig
from isac_elm.cost import (CSV_HEADER, OpCount, cost_csv, cost_rows, elm_test_cost, input_gen_cost,
                           inv_cost, pinv_cost, total_cost)
from isac_elm.errors import InvalidArgumentError
from isac_elm.features import all_families, parse_family

# Configurations for the hand-evaluated values below:
# small: M=2, K=1, L=2 -> C1=1, P1=3, C2-C1=2, P2=2
# tiny:  M=1, K=1, L=1 -> C1=1, P1=2, C2-C1=1, P2=1
# desk:  M=4, K=2, L=8 -> C1=1, P1=6, C2-C1=8, P2=4
CFGS = {
    "small": SystemConfig(M=2, K=1, J=1, L=2),
    "tiny": SystemConfig(M=1, K=1, J=1, L=1),
    "desk": SystemConfig(M=4, K=2, J=2, L=8),
}

HAND = {
    ("S1I2-BS", "small"): (F(182), F(242)),
    ("S1I2-BS", "tiny"): (F(116, 3), F(66)),
    ("S1I2-BS", "desk"): (F(1464), F(1667)),
    ("S1I2-D1", "small"): (F(356, 3), F(155)),
    ("S1I2-D1", "tiny"): (F(58, 3), F(33)),
    ("S1I2-D1", "desk"): (F(2800, 3), F(1037)),
    ("S2I2-BS", "small"): (F(532, 3), F(330)),
    ("S2I2-BS", "tiny"): (F(68, 3), F(52)),
    ("S2I2-BS", "desk"): (F(41888, 3), F(17456)),
    ("S2I2-D1", "small"): (F(276), F(378)),
    ("S2I2-D1", "tiny"): (F(62, 3), F(40)),
    ("S2I2-D1", "desk"): (F(34480, 3), F(12552)),
}


class TestOpCount:
    def test_componentwise_sum(self):
        assert OpCount(1, 2) + OpCount(F(1, 3), 4) == OpCount(F(4, 3), 6)

    def test_negative(self):
        with pytest.raises(InvalidArgumentError):
            OpCount(-1, 0)

    def test_rounded(self):
        assert OpCount(F(10, 3), 6).rounded() == (3, 6)
        assert not OpCount(F(10, 3), 6).is_integral


class TestInverse:
    def test_three(self):
        assert inv_cost(3) == OpCount(70, 80)

    def test_one_is_rational(self):
        c = inv_cost(1)
        assert c.adds == F(10, 3) and c.mults == 6

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            inv_cost(0)

    @pytest.mark.parametrize("ab,expect", [((3, 6), (448, 512)), ((1, 4), (F(76, 3), 38)),
                                           ((2, 2), (F(212, 3), 94))])
    def test_pinv(self, ab, expect):
        assert pinv_cost(*ab) == OpCount(*expect)


class TestInputGeneration:
    @pytest.mark.parametrize("key", sorted(HAND))
    def test_hand_values(self, key):
        fam, cfg = key
        assert input_gen_cost(parse_family(fam), CFGS[cfg]) == OpCount(*HAND[key])

    def test_type_one_free(self):
        cfg = CFGS["desk"]
        for fam in all_families(cfg, (1,)):
            assert input_gen_cost(fam, cfg) == OpCount(0, 0)

    def test_downlink_users_identical(self):
        cfg = CFGS["desk"]
        assert input_gen_cost(parse_family("S2I2-D1"), cfg) == input_gen_cost(parse_family("S2I2-D2"), cfg)


class TestElm:
    def test_table_sizes(self):
        assert elm_test_cost(144, 700, 144) == OpCount(202156, 201600)

    def test_unit(self):
        assert elm_test_cost(1, 1, 1) == OpCount(2, 2)

    @given(st.integers(1, 500), st.integers(1, 500), st.integers(1, 500))
    def test_monotone(self, n_in, n_h, n_out):
        base = elm_test_cost(n_in, n_h, n_out)
        for bumped in (elm_test_cost(n_in + 1, n_h, n_out), elm_test_cost(n_in, n_h + 1, n_out),
                       elm_test_cost(n_in, n_h, n_out + 1)):
            assert bumped.adds >= base.adds and bumped.mults >= base.mults

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            elm_test_cost(0, 1, 1)


class TestTrends:
    def test_monotone_in_l(self):
        # stage-1 networks never see the IRS, so their cost is flat in L
        base = SystemConfig()
        for fam in all_families(base):
            totals = [total_cost(fam, base.rederive(L=L)).total for L in range(5, 31)]
            if fam.stage == 1:
                assert len(set(totals)) == 1, fam.name
            else:
                assert all(b > a for a, b in zip(totals, totals[1:])), fam.name

    def test_monotone_in_m(self):
        base = SystemConfig()
        for fam in all_families(base):
            totals = [total_cost(fam, base.rederive(M=M)).total for M in range(2, 9)]
            assert all(b > a for a, b in zip(totals, totals[1:])), fam.name

    def test_ls_inputs_cheaper_for_large_arrays(self):
        cfg = SystemConfig().rederive(M=12)
        s2i1, s2i2 = parse_family("S2I1-BS"), parse_family("S2I2-BS")
        assert total_cost(s2i2, cfg).total < total_cost(s2i1, cfg).total

    def test_pure(self):
        fam, cfg = parse_family("S2I2-D1"), SystemConfig()
        assert total_cost(fam, cfg) == total_cost(fam, cfg)


class TestCsv:
    def test_layout(self):
        cfg = CFGS["desk"]
        rows = cost_rows([cfg], [parse_family("S1I2-BS")], hidden=(200, 400))
        text = cost_csv(rows)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER) == "family,M,K,L,C1,C2,P1,P2,adds,mults"
        assert lines[2] == "LS-S1-BS,4,2,8,1,9,6,4,1464,1667"
        elm = elm_test_cost(48, 200, 48)
        assert lines[1].split(",")[-2:] == [str(1464 + elm.adds), str(1667 + elm.mults)]

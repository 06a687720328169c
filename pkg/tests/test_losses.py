import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from transmon_twin.losses import (
    DEFAULT_TAN_DELTA,
    InfiniteQualityError,
    LossChannel,
    PartitionRegion,
    ReadoutResonator,
    SurfaceEPR,
    channels,
    combine_hybrid,
    load_table1,
    purcell_t1,
    q_tls,
    read_energy_report,
    t1_budget,
    t1_tls,
)
from transmon_twin.xsect import InterfaceEPR

TWO_PI = 2 * math.pi
frac = st.floats(0, 1e-3)
tan = st.floats(0, 1e-2)
# zero or a loss tangent large enough that 1/(p tan) stays finite in float64
tan_phys = st.one_of(st.just(0.0), st.floats(1e-12, 1e-2))


class TestCombineHybrid:
    def test_single_full_region_is_identity(self):
        f = InterfaceEPR(1e-4, 2e-5, 3e-4)
        p = combine_hybrid([PartitionRegion("mer", 1.0, f)])
        assert (p.MA, p.MS, p.SA) == (1e-4, 2e-5, 3e-4)

    def test_two_regions_dot_product(self):
        mer = InterfaceEPR(1.2e-4, 6.0e-5, 2.0e-4)
        cpl = InterfaceEPR(3.0e-5, 1.0e-5, 9.0e-5)
        p = combine_hybrid([PartitionRegion("mer", 0.7, mer), PartitionRegion("coupler", 0.2, cpl)])
        assert p.MA == pytest.approx(0.7 * 1.2e-4 + 0.2 * 3.0e-5, rel=1e-15)
        assert p.MS == pytest.approx(0.7 * 6.0e-5 + 0.2 * 1.0e-5, rel=1e-15)
        assert p.SA == pytest.approx(0.7 * 2.0e-4 + 0.2 * 9.0e-5, rel=1e-15)

    def test_unpartitioned_remainder_added(self):
        p = combine_hybrid(
            [PartitionRegion("mer", 0.5, InterfaceEPR(1e-4, 1e-4, 1e-4))], SurfaceEPR(1e-6, 2e-6, 3e-6)
        )
        assert p.as_dict() == pytest.approx({"MA": 5.1e-5, "MS": 5.2e-5, "SA": 5.3e-5})

    def test_overlapping_regions_rejected(self):
        f = InterfaceEPR(1e-4, 1e-4, 1e-4)
        with pytest.raises(ValueError, match="sum"):
            combine_hybrid([PartitionRegion("a", 0.6, f), PartitionRegion("b", 0.5, f)])

    @given(F=st.lists(st.floats(0, 0.25), min_size=1, max_size=4), s=st.floats(0, 4))
    def test_linear_and_permutation_invariant(self, F, s):
        fs = [InterfaceEPR(1e-4 * (i + 1), 2e-5, 3e-4 / (i + 1)) for i in range(len(F))]
        regs = [PartitionRegion(str(i), Fi, f) for i, (Fi, f) in enumerate(zip(F, fs))]
        a = combine_hybrid(regs)
        b = combine_hybrid(regs[::-1])
        for k in ("MA", "MS", "SA"):
            assert a[k] == pytest.approx(b[k], rel=1e-14, abs=1e-300)
        if sum(F) * s <= 1:
            scaled = combine_hybrid([PartitionRegion(r.name, r.F * s, r.xsect) for r in regs])
            for k in ("MA", "MS", "SA"):
                assert scaled[k] == pytest.approx(s * a[k], rel=1e-12, abs=1e-300)

    def test_table1_passthrough(self):
        t = load_table1()
        assert t["3D-2D (MER-coupler)"] == SurfaceEPR(8.84e-5, 4.75e-5, 1.58e-4)
        assert t["3D-2D (MER)"] == SurfaceEPR(8.93e-5, 4.80e-5, 1.59e-4)
        assert t["3D only"] == SurfaceEPR(6.3e-6, 3.06e-7, 1.17e-4)
        col = t["3D-2D (MER-coupler)"]
        assert combine_hybrid([], col) == col


class TestQtls:
    def test_reciprocal(self):
        assert q_tls([LossChannel("MA", 1e-4, 1e-2)]) == pytest.approx(1e6, rel=1e-15)

    def test_two_equal_channels_halve_q(self):
        c = LossChannel("MA", 1e-4, 1e-2)
        assert q_tls([c, c]) == pytest.approx(q_tls([c]) / 2, rel=1e-15)

    def test_table1_direct_sum(self):
        p = load_table1()["3D-2D (MER-coupler)"]
        expected = 1 / (8.84e-5 * 6.0e-3 + 4.75e-5 * 6.0e-3 + 1.58e-4 * 2.9e-3)
        assert q_tls(channels(p)) == pytest.approx(expected, rel=1e-14)
        # the shipped tan(delta) set lands near the reference values
        assert q_tls(channels(p)) == pytest.approx(7.81e5, rel=0.02)
        assert q_tls(channels(load_table1()["3D only"])) == pytest.approx(2.62e6, rel=0.02)

    def test_zero_loss_flagged(self):
        with pytest.raises(InfiniteQualityError):
            q_tls([LossChannel("MA", 0.0, 1e-3), LossChannel("SA", 1e-4, 0.0)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            q_tls([])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            LossChannel("MA", -1e-6, 1e-3)

    @given(p=st.lists(st.floats(1e-7, 1e-3), min_size=3, max_size=3), k=st.integers(0, 2),
           bump=st.floats(1.01, 10))
    def test_monotone_in_p_and_tan_delta(self, p, k, bump):
        base = [LossChannel(n, pi, 1e-3) for n, pi in zip("abc", p)]
        q0 = q_tls(base)
        more_p = list(base)
        more_p[k] = LossChannel(base[k].kind, base[k].p * bump, 1e-3)
        more_t = list(base)
        more_t[k] = LossChannel(base[k].kind, base[k].p, 1e-3 * bump)
        assert q_tls(more_p) < q0 and q_tls(more_t) < q0

    @given(p=st.floats(1e-7, 1e-3), t=st.floats(1e-6, 1e-2))
    def test_adding_channel_never_raises_q(self, p, t):
        base = [LossChannel("MA", 1e-5, 1e-3)]
        assert q_tls(base + [LossChannel("SA", p, t)]) <= q_tls(base)

    @given(t=st.fixed_dictionaries({"MA": tan_phys, "MS": tan_phys, "SA": tan_phys}).filter(lambda d: any(d.values())))
    def test_hybrid_q_below_3d_q(self, t):
        table = load_table1()
        q3d = q_tls(channels(table["3D only"], t))
        for col in ("3D-2D (MER)", "3D-2D (MER-coupler)"):
            assert q_tls(channels(table[col], t)) < q3d


class TestT1:
    def test_hybrid_value(self):
        assert t1_tls(7.81e5, 5.766e9) == pytest.approx(21.6e-6, rel=1e-2)
        assert t1_tls(7.81e5, 5.766e9) == pytest.approx(22e-6, rel=0.1)

    def test_3d_value(self):
        assert t1_tls(2.62e6, 5.766e9) == pytest.approx(72.3e-6, rel=1e-3)
        assert t1_tls(2.62e6, 5.766e9) == pytest.approx(75e-6, rel=0.1)

    @given(q=st.floats(1e3, 1e8), f=st.floats(1e9, 1e10))
    def test_linear_in_q(self, q, f):
        assert t1_tls(2 * q, f) == pytest.approx(2 * t1_tls(q, f), rel=1e-15)


class TestPurcell:
    res0 = ReadoutResonator(7.579e9, 15.3e3, 4.28e3)

    def test_loaded_q(self):
        assert self.res0.Q_r == pytest.approx(1 / (1 / 15.3e3 + 1 / 4.28e3), rel=1e-15)
        assert self.res0.Q_r == pytest.approx(3344.5, abs=0.5)

    def test_design_detuning(self):
        # Delta from the design frequencies
        kappa = 7.579e9 / 3344.5
        pd = purcell_t1(115e6, -1.913e9, kappa)
        assert pd.t1 == pytest.approx((1.913e9 / 115e6) ** 2 / (TWO_PI * kappa), rel=1e-3)
        assert pd.t1 == pytest.approx(19.4e-6, rel=0.01)
        assert pd.dispersive

    def test_measured_detuning_near_17us(self):
        pd = purcell_t1(115e6, 5.766e9 - 7.579e9, self.res0.kappa)
        assert pd.t1 == pytest.approx(17e-6, rel=0.1)

    def test_zero_coupling_infinite(self):
        pd = purcell_t1(0.0, -1.9e9, 2e6)
        assert not pd.finite and pd.rate == 0

    def test_kappa_doubling_halves_t1(self):
        a, b = purcell_t1(1e8, -2e9, 1e6), purcell_t1(1e8, -2e9, 2e6)
        assert b.t1 == pytest.approx(a.t1 / 2, rel=1e-15)

    def test_validity_flag(self):
        assert not purcell_t1(200e6, -1.5e9, 1e6).dispersive


class TestBudget:
    def test_tls_only_equals_t1_tls(self):
        b = t1_budget(5.766e9, 7.81e5)
        assert b.T1_total == t1_tls(7.81e5, 5.766e9)
        assert b.T1_Purcell is None

    def test_qb0(self):
        b = t1_budget(5.766e9, 7.81e5, g=115e6, delta=5.6941e9 - 7.60728e9,
                      resonator=ReadoutResonator(7.57905e9, 15.3e3, 4.28e3))
        assert 9e-6 <= b.T1_total <= 13e-6

    def test_qb1(self):
        b = t1_budget(5.2483e9, 7.81e5, g=105e6, delta=5.1990e9 - 7.448263e9,
                      resonator=ReadoutResonator(7.419143e9, 7.62e3, 7.30e3))
        assert b.T1_total <= 18e-6

    @given(q=st.floats(1e4, 1e7), g=st.floats(1e6, 2e8), d=st.floats(-3e9, -5e8),
           qi=st.floats(1e3, 1e6), qc=st.floats(1e3, 1e6))
    def test_closure(self, q, g, d, qi, qc):
        b = t1_budget(5.5e9, q, g=g, delta=d, resonator=ReadoutResonator(7.5e9, qi, qc))
        assert 1 / b.T1_total == pytest.approx(sum(b.rates.values()), rel=1e-15)
        assert b.T1_total < min(b.T1_TLS, b.T1_Purcell)

    def test_partial_purcell_inputs_rejected(self):
        with pytest.raises(ValueError):
            t1_budget(5e9, 1e6, g=1e8)

    def test_report_outputs(self):
        b = t1_budget(5.766e9, 7.81e5, g=115e6, delta=-1.913e9,
                      resonator=ReadoutResonator(7.579e9, 15.3e3, 4.28e3))
        d = json.loads(b.to_json())
        assert d["Q_r"] == pytest.approx(3344.5, abs=0.5)
        assert "T1_Purcell" in b.table()


def test_energy_report_formats(tmp_path):
    (tmp_path / "e.json").write_text(json.dumps({"regions": {"mer": 0.62, "coupler": 0.05}}))
    (tmp_path / "e.csv").write_text("region,F\nmer,0.62\ncoupler,0.05\n")
    assert read_energy_report(tmp_path / "e.json") == read_energy_report(tmp_path / "e.csv")


def test_default_tan_delta_is_config():
    assert set(DEFAULT_TAN_DELTA) == {"MA", "MS", "SA"}

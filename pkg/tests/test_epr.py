import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transmon_twin.circuit import CapacitanceMatrix, JosephsonElement, read_capacitance_csv, transmon_params
from transmon_twin.data import fixture_path
from transmon_twin.epr import (
    Mode,
    ModeSystem,
    dressed_frequencies,
    epr_vs_lom_report,
    kerr_matrix,
    linear_modes,
    read_mode_csv,
    write_mode_csv,
)


def two_mode():
    return ModeSystem((Mode("qubit", 5.77e9, 0.98), Mode("readout", 7.58e9, 0.008)), 22.4e9)


class TestKerrMatrix:
    def test_single_mode_anharmonicity_is_ec(self):
        EJ, EC = 22.37e9, 193.7e6
        ms = ModeSystem((Mode("q", math.sqrt(8 * EJ * EC), 1.0),), EJ)
        km = kerr_matrix(ms)
        assert km.chi[0, 0] / 2 == pytest.approx(EC, rel=1e-14)
        assert km.alpha[0] == pytest.approx(-EC, rel=1e-14)

    def test_zero_participation_row(self):
        ms = ModeSystem((Mode("q", 5.7e9, 0.9), Mode("r", 7.6e9, 0.0)), 20e9)
        km = kerr_matrix(ms)
        assert np.all(km.chi[1] == 0) and np.all(km.chi[:, 1] == 0)

    def test_two_mode_hand_arithmetic(self):
        km = kerr_matrix(two_mode())
        chi_qq = 5.77e9 * 5.77e9 * 0.98 * 0.98 / (4 * 22.4e9)
        chi_qr = 5.77e9 * 7.58e9 * 0.98 * 0.008 / (4 * 22.4e9)
        chi_rr = 7.58e9 * 7.58e9 * 0.008 * 0.008 / (4 * 22.4e9)
        np.testing.assert_allclose(km.chi, [[chi_qq, chi_qr], [chi_qr, chi_rr]], rtol=1e-14)
        assert chi_qq / 2 == pytest.approx(178.4e6, rel=1e-3)
        assert chi_qr == pytest.approx(3.827e6, rel=1e-3)
        assert km.cross_kerr("qubit", "readout") == km.cross_kerr("readout", "qubit")

    def test_symmetry_exact(self):
        ms = ModeSystem(
            (Mode("a", 5.123456e9, 0.7), Mode("b", 7.31e9, 0.013), Mode("c", 9.87e9, 0.1)), 17.3e9
        )
        chi = kerr_matrix(ms).chi
        assert np.array_equal(chi, chi.T)

    @settings(max_examples=40, deadline=None)
    @given(
        p=st.lists(st.floats(0, 0.33), min_size=3, max_size=3),
        s=st.floats(0.1, 3.0),
        k=st.integers(0, 2),
    )
    def test_bilinearity(self, p, s, k):
        f = [5e9, 7e9, 9e9]
        ms = ModeSystem(tuple(Mode(str(i), f[i], p[i]) for i in range(3)), 20e9)
        p2 = list(p)
        p2[k] = min(1.0, p[k] * s) if p[k] * s <= 1 else p[k]
        s_eff = p2[k] / p[k] if p[k] > 0 else 1.0
        chi = kerr_matrix(ms).chi
        chi2 = kerr_matrix(
            ModeSystem(tuple(Mode(str(i), f[i], p2[i]) for i in range(3)), 20e9)
        ).chi
        expected = chi.copy()
        expected[k, :] *= s_eff
        expected[:, k] *= s_eff
        np.testing.assert_allclose(chi2, expected, rtol=1e-12, atol=1e-300)

    def test_linear_in_inverse_ej(self):
        a = kerr_matrix(ModeSystem(two_mode().modes, 20e9)).chi
        b = kerr_matrix(ModeSystem(two_mode().modes, 40e9)).chi
        np.testing.assert_allclose(b, a / 2, rtol=1e-14)

    @pytest.mark.parametrize("p", [-0.1, 1.2])
    def test_participation_bounds(self, p):
        with pytest.raises(ValueError):
            ModeSystem((Mode("q", 5e9, p),), 20e9)


class TestDressing:
    def test_zero_participation_is_linear(self):
        ms = ModeSystem((Mode("q", 5.7e9, 0.0), Mode("r", 7.6e9, 0.0)), 20e9)
        np.testing.assert_array_equal(dressed_frequencies(ms, kerr_matrix(ms)), ms.f_lin)

    def test_single_mode_shift(self):
        # chi_qq = 390 MHz -> alpha = 195 MHz
        EJ = 20e9
        f = math.sqrt(390e6 * 4 * EJ)
        ms = ModeSystem((Mode("q", f, 1.0),), EJ)
        assert kerr_matrix(ms).f_dressed[0] == pytest.approx(f - 195e6, rel=1e-14)

    def test_two_mode_readout_correction(self):
        km = kerr_matrix(two_mode())
        chi_qr = 5.77e9 * 7.58e9 * 0.98 * 0.008 / (4 * 22.4e9)
        alpha_r = 7.58e9**2 * 0.008**2 / (8 * 22.4e9)
        assert km.f_dressed[1] - 7.58e9 == pytest.approx(-alpha_r - chi_qr / 2, rel=1e-9)
        # the qubit mode is pulled down by roughly its anharmonicity
        assert 7.58e9 - km.f_dressed[1] < 0.02 * (5.77e9 - km.f_dressed[0])

    def test_lone_mode_vs_exact_transmon(self):
        EC = 200e6
        for ratio in (50, 100, 200):
            EJ = ratio * EC
            km = kerr_matrix(ModeSystem((Mode("q", math.sqrt(8 * EJ * EC), 1.0),), EJ))
            tp = transmon_params(EJ, EC)
            assert km.alpha[0] == pytest.approx(tp.alpha, rel=0.15)


class TestLinearModes:
    def test_uncoupled_participations(self):
        ms = linear_modes(np.diag([100e-15, 400e-15]), [1 / 8e-9, 1 / 1e-9], 0, ("q", "r"), 20e9)
        assert ms.modes[0].p == pytest.approx(1.0)
        assert ms.modes[1].p == pytest.approx(0.0, abs=1e-15)
        assert ms.modes[0].f_lin == pytest.approx(1 / (2 * math.pi * math.sqrt(8e-9 * 100e-15)))

    def test_weak_coupling_participation_scale(self):
        C = np.array([[100e-15, -5e-15], [-5e-15, 400e-15]])
        ms = linear_modes(C, [1 / 8e-9, 1 / 1.2e-9], 0, ("q", "r"), 20e9)
        assert 0.95 < ms.modes[0].p <= 1
        assert 0 < ms.modes[1].p < 0.05


class TestEprVsLom:
    def setup_method(self):
        self.C = read_capacitance_csv(fixture_path("qb1_capacitance.csv"))
        self.j = JosephsonElement("symmetric-squid", E_J_max=17.5e9, C_J=2e-15)

    def test_zero_coupling_identical(self):
        C0 = CapacitanceMatrix(("qubit", "coupler"), np.diag([99e-15, 40e-15]))
        rep = epr_vs_lom_report(np.linspace(0, 0.45, 7), C0, self.j, 7.448e9, transmon="asymptotic")
        for row in rep.rows:
            assert row.f_epr == pytest.approx(row.f_lom, rel=1e-13)

    def test_table2_like_agreement(self):
        rep = epr_vs_lom_report(np.linspace(0, 0.45, 19), self.C, self.j, 7.448263e9)
        assert rep.max_rel_diff < 0.02
        assert rep.as_table().shape == (19, 3)

    def test_half_flux_rejected(self):
        with pytest.raises(ValueError):
            epr_vs_lom_report([0.5], self.C, self.j, 7.448263e9)


def test_mode_csv_roundtrip(tmp_path):
    ms = two_mode()
    write_mode_csv(ms, tmp_path / "modes.csv")
    assert read_mode_csv(tmp_path / "modes.csv") == ms


def test_mode_csv_requires_ej_record(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("label,f_lin_Hz,participation\nq,5e9,0.9\n")
    with pytest.raises(ValueError, match="E_J_Hz"):
        read_mode_csv(p)

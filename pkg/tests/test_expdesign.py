import math

import pytest
import yaml
from scipy.constants import h as planck_h, hbar as hbar_si, k as boltzmann_k

from fermiline import expdesign as xd
from fermiline.errors import ConfigError


def flux_qubit(i_p=3e-7, gap_rad=2 * math.pi * 1e9, offset=0.0):
    return xd.FluxQubitParams(
        persistent_current_amp=i_p, gap_rad_per_s=gap_rad, flux_offset_wb=offset
    )


class TestDispersion:
    def test_degeneracy_point(self):
        p = flux_qubit(gap_rad=4.0e9)
        assert xd.omega_from_flux(p, 0.0) == pytest.approx(4.0e9)

    def test_three_four_five(self):
        # 2 I_p dPhi / hbar = 3, gap = 4 (arbitrary units) -> omega = 5
        p = xd.FluxQubitParams(
            persistent_current_amp=1.5 * hbar_si, gap_rad_per_s=4.0, flux_offset_wb=1.0
        )
        assert xd.omega_from_flux(p) == pytest.approx(5.0, rel=1e-14)

    def test_small_gap_linear_limit(self):
        p = xd.FluxQubitParams(
            persistent_current_amp=1.0, gap_rad_per_s=1e-6, flux_offset_wb=1e-30
        )
        eps = 2.0 * 1e-30 / hbar_si
        assert xd.omega_from_flux(p) == pytest.approx(eps, rel=1e-9)

    def test_mutual_inverses(self):
        p = flux_qubit(gap_rad=2 * math.pi * 1.1e9)
        for omega in (p.gap_rad_per_s, 1.3 * p.gap_rad_per_s, 5 * p.gap_rad_per_s):
            flux = xd.flux_from_omega(p, omega)
            assert xd.omega_from_flux(p, flux) == pytest.approx(omega, rel=1e-12)

    def test_below_gap_rejected(self):
        p = flux_qubit()
        with pytest.raises(ConfigError):
            xd.flux_from_omega(p, 0.5 * p.gap_rad_per_s)

    def test_invalid_params_rejected(self):
        with pytest.raises(ConfigError):
            xd.FluxQubitParams(persistent_current_amp=-1.0, gap_rad_per_s=1.0)
        with pytest.raises(ConfigError):
            xd.FluxQubitParams(persistent_current_amp=1.0, gap_rad_per_s=0.0)


class TestCouplingRatio:
    def test_zero_coupling(self):
        assert xd.coupling_ratio(0.0, 1.0e9) == 0.0

    def test_reference_values(self):
        # K = 0.0225 <-> g/omega = 0.10607; g/omega = 0.3162 -> K = 0.20
        assert xd.g_from_coupling_ratio(0.0225, 1.0) == pytest.approx(0.10607, rel=1e-4)
        assert xd.coupling_ratio(0.3162, 1.0) == pytest.approx(0.20, rel=1e-3)

    def test_mutual_inverses(self):
        omega = 2 * math.pi * 2e9
        for k in (1e-4, 0.0225, 0.2):
            g = xd.g_from_coupling_ratio(k, omega)
            assert xd.coupling_ratio(g, omega) == pytest.approx(k, rel=1e-12)


class TestLandauZener:
    def test_vanishing_ramp_is_adiabatic(self):
        p = flux_qubit()
        assert xd.lz_stay_probability(1e-16, p) == pytest.approx(0.0, abs=1e-12)

    def test_tiny_gap_stays(self):
        p = flux_qubit(gap_rad=1e-3)
        assert xd.lz_stay_probability(1e-6, p) == pytest.approx(1.0, rel=1e-6)

    def test_zero_exponent_limit(self):
        assert xd.lz_sweep_probability(0.0) == 1.0

    def test_half_probability_case(self):
        # exponent ln 2 gives a 50/50 sweep, closed form vs integration
        num = xd.lz_sweep_probability(math.log(2))
        assert num == pytest.approx(0.5, rel=1e-2)
        assert num == pytest.approx(0.5, rel=1e-3)

    def test_closed_form_matches_flux_parametrization(self):
        p = flux_qubit()
        alpha = 1e-6
        expected = math.exp(
            -math.pi * hbar_si * p.gap_rad_per_s**2
            / (4 * p.persistent_current_amp * alpha)
        )
        assert xd.lz_stay_probability(alpha, p) == pytest.approx(expected, rel=1e-12)

    def test_paper_criteria_self_consistency(self):
        # adiabatic alpha << pi gap^2 hbar / (4 I_p): exponent >> 1;
        # diabatic alpha >> gap^2 hbar / (2 I_p): exponent << 1
        p = flux_qubit()
        adiabatic_scale = math.pi * hbar_si * p.gap_rad_per_s**2 / (
            4 * p.persistent_current_amp
        )
        diabatic_scale = hbar_si * p.gap_rad_per_s**2 / (2 * p.persistent_current_amp)
        assert xd.lz_exponent(adiabatic_scale / 10, p) == pytest.approx(10.0)
        assert xd.lz_exponent(diabatic_scale * 10, p) == pytest.approx(math.pi / 20)


class TestThermalOccupancy:
    def test_zero_temperature(self):
        assert xd.thermal_occupancy(1.5e9, 0.0) == 0.0

    def test_log_two_identity(self):
        f = 1.0e9
        t = planck_h * f / (boltzmann_k * math.log(2))
        assert xd.thermal_occupancy(f, t) == pytest.approx(1.0, rel=1e-12)

    def test_reference_value(self):
        assert xd.thermal_occupancy(1.5e9, 0.010) == pytest.approx(7.5e-4, rel=0.01)

    def test_monotonicity(self):
        assert xd.thermal_occupancy(2.0e9, 0.02) < xd.thermal_occupancy(1.5e9, 0.02)
        assert xd.thermal_occupancy(1.5e9, 0.02) < xd.thermal_occupancy(1.5e9, 0.03)


class TestPreparationFidelity:
    def test_ideal_limits(self):
        qa = flux_qubit()
        qb = flux_qubit()
        fid = xd.preparation_fidelity(qa, qb, alpha_a_wb_per_s=1.0,
                                      alpha_b_wb_per_s=1e-16,
                                      initial_photon_probability=0.0)
        assert fid.fidelity == pytest.approx(1.0, abs=1e-7)

    def test_components_reported(self):
        qa = flux_qubit()
        qb = flux_qubit()
        fid = xd.preparation_fidelity(qa, qb, 1e-5, 2e-10, 0.004)
        assert 0 < fid.stay_a < 1
        assert 0 < fid.transfer_b <= 1
        assert fid.photon_free == pytest.approx(0.996)
        assert fid.fidelity == pytest.approx(
            fid.stay_a * fid.transfer_b * fid.photon_free
        )


class TestFeasibilityReport:
    def sample_design(self):
        with open("configs/design_flux_qubits.yaml", "r", encoding="utf-8") as fh:
            return yaml.safe_load(fh)["design"]

    def test_sample_design_passes(self):
        report = xd.feasibility_report(self.sample_design())
        assert report.passed
        names = [c.name for c in report.checks]
        assert "strategy_k_a_over_k_b" in names
        assert report.k_a > report.k_b

    def test_fig2c_style_couplings_pass_strategy_check(self):
        design = self.sample_design()
        # K_A = 0.20, K_B = 0.04 at the operating frequency
        omega = xd.omega_from_flux(
            xd.FluxQubitParams(
                persistent_current_amp=float(design["qubit_a"]["persistent_current_amp"]),
                gap_rad_per_s=2 * math.pi * float(design["qubit_a"]["gap_hz"]),
                flux_offset_wb=float(design["qubit_a"]["flux_offset_wb"]),
            )
        )
        design["qubit_a"]["g_hz"] = xd.g_from_coupling_ratio(0.20, omega) / (2 * math.pi)
        design["qubit_b"]["g_hz"] = xd.g_from_coupling_ratio(0.04, omega) / (2 * math.pi)
        report = xd.feasibility_report(design)
        strategy = {c.name: c for c in report.checks}["strategy_k_a_over_k_b"]
        assert strategy.passed
        # g/omega = 0.316 exceeds the 0.15 initialization threshold
        init_a = {c.name: c for c in report.checks}["initialization_g_over_omega_a"]
        assert not init_a.passed
        assert init_a.value == pytest.approx(math.sqrt(0.10), rel=1e-3)

    def test_failing_threshold_reports_margin(self):
        design = self.sample_design()
        design["qubit_a"]["g_hz"] = 0.2 * xd.omega_from_flux(
            xd.FluxQubitParams(
                persistent_current_amp=float(design["qubit_a"]["persistent_current_amp"]),
                gap_rad_per_s=2 * math.pi * float(design["qubit_a"]["gap_hz"]),
                flux_offset_wb=float(design["qubit_a"]["flux_offset_wb"]),
            )
        ) / (2 * math.pi)
        report = xd.feasibility_report(design)
        init_a = {c.name: c for c in report.checks}["initialization_g_over_omega_a"]
        assert not init_a.passed and init_a.margin < 1.0

    def test_missing_fields_listed_completely(self):
        with pytest.raises(ConfigError) as err:
            xd.feasibility_report({"qubit_a": {"gap_hz": 1e9}})
        message = str(err.value)
        assert "qubit_b" in message
        assert "qubit_a.persistent_current_amp" in message
        assert "qubit_a.g_hz" in message

    def test_report_determinism(self):
        design = self.sample_design()
        a = "\n".join(xd.report_lines(xd.feasibility_report(design)))
        b = "\n".join(xd.report_lines(xd.feasibility_report(design)))
        assert a == b

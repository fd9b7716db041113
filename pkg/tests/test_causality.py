import math
from dataclasses import replace

import numpy as np
import pytest

from fermiline import causality as ca
from fermiline.dynamics import TimeGrid
from fermiline.errors import ConfigError, FrontUnresolvedError
from fermiline.hilbert import enumerate_basis
from fermiline.model import Discretization, validate

from conftest import make_cfg


def quick_cfg(k_a=0.0225, k_b=0.0225, separation=math.pi, modes=160,
              omega_max=12.0, t_max=1.6 * math.pi):
    return make_cfg(k_a=k_a, k_b=k_b, separation=separation, modes=modes,
                    omega_max=omega_max, t_max=t_max,
                    box_length=2.0 * (separation + t_max) * 1.02)


class TestFrontStatistics:
    def test_synthetic_step_signal(self):
        t = np.linspace(0, 10, 501)
        signal = np.where(t > 4.0, (1 - np.exp(-(t - 4.0))) * 1e-3, 1e-8)
        residual, peak, front, rise, threshold = ca.front_statistics(
            t, signal, v=1.0, r=4.0
        )
        assert residual == pytest.approx(1e-8)
        assert front == pytest.approx(4.0, abs=t[1] - t[0] + 1e-12)
        assert rise is not None and rise > 0

    def test_no_front_in_flat_signal(self):
        t = np.linspace(0, 10, 101)
        signal = np.full_like(t, 1e-9)
        _, _, front, rise, _ = ca.front_statistics(t, signal, v=1.0, r=4.0)
        assert front is None and rise is None


class TestRunDifferential:
    def test_decoupled_a_gives_identically_zero(self):
        cfg = quick_cfg(k_a=0.0)
        grid = TimeGrid(cfg.disc.t_max, 120)
        report = ca.run_differential(cfg, grid)
        np.testing.assert_allclose(report.delta_p, 0.0, atol=1e-12)
        assert any("d_A = 0" in note for note in report.notes)

    def test_requires_two_photon_truncation(self):
        cfg = make_cfg(n_max=1, modes=32, t_max=2.0, box_length=12.0)
        with pytest.raises(ConfigError, match="n_max"):
            ca.run_differential(cfg, TimeGrid(2.0, 60))

    def test_coarse_grid_rejected(self):
        cfg = quick_cfg(modes=64)
        with pytest.raises(FrontUnresolvedError, match="front unresolved"):
            ca.run_differential(cfg, TimeGrid(cfg.disc.t_max, 20))

    def test_grid_must_fit_discretization_horizon(self):
        cfg = quick_cfg()
        with pytest.raises(ConfigError, match="t_max"):
            ca.run_differential(cfg, TimeGrid(cfg.disc.t_max * 2, 600))

    def test_front_near_light_cone(self):
        cfg = quick_cfg()
        grid = TimeGrid(cfg.disc.t_max, 160)
        report = ca.run_differential(cfg, grid)
        assert report.front_time is not None
        # coarse grid and modest cutoff: the front sits near r/v
        assert abs(report.front_time - math.pi) < 0.6
        assert report.postfront_peak > report.prefront_residual

    def test_front_time_invariant_under_coupling_rescale(self):
        # K_A x4 moves amplitudes, not the front position
        grid_steps = 160
        cfg1 = quick_cfg(k_a=0.005)
        cfg2 = quick_cfg(k_a=0.02)
        r1 = ca.run_differential(cfg1, TimeGrid(cfg1.disc.t_max, grid_steps))
        r2 = ca.run_differential(cfg2, TimeGrid(cfg2.disc.t_max, grid_steps))
        dt = cfg1.disc.t_max / grid_steps
        assert abs(r1.front_time - r2.front_time) <= 3 * dt

    def test_prefront_bound_for_arbitrary_a_states(self):
        # nothing about A leaks before the front, whether A starts ground,
        # excited, or in a superposition; residuals are compared against the
        # excited-run peak, the natural common scale (the ground-initial
        # signal is itself nearly zero at all times)
        cfg = quick_cfg(k_a=0.01, k_b=0.01)
        grid = TimeGrid(cfg.disc.t_max, 160)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        plus = np.zeros(basis.dim, dtype=complex)
        plus[basis.rank((1, 0, ()))] = 1 / math.sqrt(2)
        plus[basis.rank((0, 0, ()))] = 1 / math.sqrt(2)
        reference = ca.run_differential(cfg, grid)
        scale = reference.postfront_peak
        assert reference.prefront_residual <= 0.1 * scale
        for initial in ("ga_gb_vacuum", plus):
            report = ca.run_differential(cfg, grid, initial=initial)
            assert report.prefront_residual <= 0.1 * scale


class TestConvergenceScan:
    def test_identical_rung_ratio_one(self):
        cfg = quick_cfg()
        grid = TimeGrid(cfg.disc.t_max, 120)
        rows = ca.convergence_scan(cfg, grid, [cfg.disc, cfg.disc])
        assert rows[0].ratio_to_previous is None
        assert rows[1].ratio_to_previous == pytest.approx(1.0)

    def test_free_theory_all_zero(self):
        cfg = quick_cfg(k_a=0.0)
        grid = TimeGrid(cfg.disc.t_max, 120)
        ladder = [cfg.disc, replace(cfg.disc, modes=cfg.disc.modes * 2)]
        rows = ca.convergence_scan(cfg, grid, ladder)
        assert all(r.prefront_residual == 0.0 for r in rows)


class TestComparePerturbative:
    def test_decoupled_a_both_routes_zero(self):
        cfg = quick_cfg(k_a=0.0)
        grid = TimeGrid(cfg.disc.t_max, 120)
        overlay = ca.compare_perturbative(cfg, grid)
        np.testing.assert_allclose(overlay.delta_p, 0.0, atol=1e-12)
        np.testing.assert_allclose(overlay.perturbative_total, 0.0, atol=1e-20)
        assert overlay.rel_l2_distance == 0.0

    def test_notes_outside_perturbative_regime(self):
        cfg = quick_cfg(k_a=0.05, k_b=0.05)
        grid = TimeGrid(cfg.disc.t_max, 120)
        overlay = ca.compare_perturbative(cfg, grid)
        assert any("heuristic" in n for n in overlay.notes)

    def test_small_coupling_agreement(self):
        cfg = quick_cfg(k_a=0.0025, k_b=0.0025)
        grid = TimeGrid(cfg.disc.t_max, 160)
        overlay = ca.compare_perturbative(cfg, grid)
        assert not overlay.notes
        assert overlay.rel_l2_distance < 0.15

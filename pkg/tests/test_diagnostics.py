"""Conserved quantities, residual certificates, bound reports, and variations."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings

from chordflow.diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    bounds_report,
    conservation_report,
    first_variation_check,
    lemma41_check,
    ma_residual,
    monotonicity_report,
    variation_ratio_survey,
)
from chordflow.errors import (
    ConvexityViolation,
    DegenerateDenominator,
    InvalidShape,
)
from chordflow.flow_engine import FlowConfig, ProblemSpec, run, theta
from chordflow.gaussian_chord import ChordParams, v_tilde_field
from chordflow.support_geometry import disk, fourier_body

from conftest import (
    DISK1_BOUNDARY_V,
    DISK1_VOLUME,
    body_margins,
    body_weights,
    build_safe_body,
)

DISK_SCALING_DERIVATIVE = 2.0 * DISK1_VOLUME * 2.0 * math.pi * math.exp(-0.5)


def record(step=0, I=1.0, Phi=1.0, **kw):
    base = dict(
        step=step, t=0.0, dt=1e-3, theta=1.0, I_gamma_q=I, Phi=Phi,
        residual_sup=0.0, h_min=1.0, h_max=1.0, rho_min=1.0, rho_max=1.0,
        K_min=1.0, K_max=1.0, grad_max=0.0,
    )
    base.update(kw)
    return DiagnosticsRecord(**base)


class TestCsvColumns:
    def test_exact_names_and_order(self):
        assert tuple(CSV_COLUMNS) == (
            "step", "t", "dt", "theta", "I_gamma_q", "Phi",
            "residual_sup", "h_min", "h_max", "K_min", "K_max",
        )


class TestConservationReport:
    def test_constant_series_is_exactly_zero(self):
        series = [record(step=i, I=6.112) for i in range(4)]
        assert conservation_report(series) == 0.0

    def test_two_point_drift(self):
        series = [record(step=0, I=6.112), record(step=1, I=6.115)]
        expected = (6.115 - 6.112) / 6.112
        assert conservation_report(series) == pytest.approx(expected, rel=1e-12)

    def test_short_series_reports_zero(self):
        assert conservation_report([record()]) == 0.0
        assert conservation_report([]) == 0.0

    def test_zero_baseline_degenerates(self):
        series = [record(step=0, I=0.0), record(step=1, I=1.0)]
        with pytest.raises(DegenerateDenominator):
            conservation_report(series)

    def test_tail_order_is_irrelevant(self):
        vals = [2.0, 2.2, 1.9, 2.05]
        a = [record(step=i, I=v) for i, v in enumerate(vals)]
        b = [a[0], a[3], a[2], a[1]]
        assert conservation_report(a) == conservation_report(b)


class TestMonotonicityReport:
    def test_decreasing_series_is_zero(self):
        series = [record(step=i, Phi=v) for i, v in enumerate([3.0, 2.0, 1.5])]
        assert monotonicity_report(series) == 0.0

    def test_flat_pair_is_zero(self):
        series = [record(step=0, Phi=6.2832), record(step=1, Phi=6.2832)]
        assert monotonicity_report(series) == 0.0

    def test_reports_worst_increase(self):
        series = [record(step=i, Phi=v) for i, v in enumerate([3.0, 1.0, 1.2, 0.4])]
        assert monotonicity_report(series) == pytest.approx(0.2, rel=1e-12)

    def test_short_series_is_zero(self):
        assert monotonicity_report([record()]) == 0.0


class TestMaResidual:
    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_stationary_disk_certifies(self, grid, unit_disk, p):
        spec = ProblemSpec(p=p, q=3.0, f=np.ones(grid.n))
        vfield = v_tilde_field(unit_disk, ChordParams(q=3.0))
        tau = 1.0 / theta(spec, unit_disk, vfield)
        r, sup = ma_residual(spec, unit_disk, tau, vfield=vfield)
        assert sup < 1e-6
        assert r.shape == (grid.n,)

    def test_doubled_tau_shifts_residual_to_one(self, grid, unit_disk):
        spec = ProblemSpec(p=1.0, q=3.0, f=np.ones(grid.n))
        vfield = v_tilde_field(unit_disk, ChordParams(q=3.0))
        tau = 1.0 / theta(spec, unit_disk, vfield)
        _, sup = ma_residual(spec, unit_disk, 2.0 * tau, vfield=vfield)
        assert abs(sup - 1.0) < 1e-6

    def test_residual_is_affine_in_tau_bitwise(self, grid, unit_disk, fourier01):
        # With tau * A in the binade-safe band, r(2 tau) + 1 == 2 (r(tau) + 1)
        # holds exactly in IEEE arithmetic, not just approximately.
        spec = ProblemSpec(p=1.0, q=3.0, f=np.ones(grid.n))
        for sf in (unit_disk, fourier01):
            vfield = v_tilde_field(sf, ChordParams(q=3.0))
            tau = 1.0 / theta(spec, sf, vfield)
            r1, _ = ma_residual(spec, sf, tau, vfield=vfield)
            r2, _ = ma_residual(spec, sf, 2.0 * tau, vfield=vfield)
            assert np.array_equal(r2 + 1.0, 2.0 * (r1 + 1.0))

    def test_default_field_matches_explicit(self, grid64):
        sf = disk(1.0, grid64)
        spec = ProblemSpec(p=1.0, q=3.0, f=np.ones(grid64.n))
        params = ChordParams(q=3.0)
        vfield = v_tilde_field(sf, params)
        r_default, sup_default = ma_residual(spec, sf, 0.4)
        r_explicit, sup_explicit = ma_residual(spec, sf, 0.4, vfield=vfield)
        assert np.array_equal(r_default, r_explicit)
        assert sup_default == sup_explicit


class TestLemma41:
    def test_disk_attains_equalities_to_machine_precision(self, grid):
        rep = lemma41_check(disk(2.0, grid))
        assert rep.h_max == 2.0
        assert rep.h_min == 2.0
        assert rep.max_gap <= 1e-12
        assert rep.min_gap <= 1e-12
        assert rep.support_slack <= 1e-12
        assert rep.radial_slack <= 1e-12

    @pytest.mark.parametrize("body", ["ellipse21", "fourier01"])
    def test_named_bodies_satisfy_all_four_bounds(self, body, request):
        rep = lemma41_check(request.getfixturevalue(body))
        assert rep.max_gap <= 1e-3
        assert rep.min_gap <= 1e-3
        assert rep.support_slack <= 1e-9
        assert rep.radial_slack <= 1e-9

    def test_extrema_are_consistent(self, ellipse21):
        rep = lemma41_check(ellipse21)
        assert rep.h_max == pytest.approx(2.0, abs=1e-12)
        assert rep.h_min == pytest.approx(1.0, abs=1e-12)
        assert rep.rho_max <= rep.h_max + 1e-12
        assert rep.rho_min >= rep.h_min - 1e-3

    @given(weights=body_weights, margin=body_margins)
    @settings(max_examples=40, deadline=None)
    def test_random_bodies_stay_within_slack(self, weights, margin, grid):
        rep = lemma41_check(build_safe_body(grid, weights, margin))
        assert rep.max_gap <= 1e-3
        assert rep.min_gap <= 1e-3
        assert rep.support_slack <= 1e-3
        assert rep.radial_slack <= 1e-9


class TestBoundsReport:
    def test_aggregates_extremes(self):
        series = [
            record(step=0, h_min=0.9, h_max=1.4, K_min=0.5, K_max=2.0, theta=3.0),
            record(step=1, h_min=0.8, h_max=1.5, K_min=0.6, K_max=2.5, theta=2.0),
        ]
        rep = bounds_report(series)
        assert rep.h_min == 0.8
        assert rep.h_max == 1.5
        assert rep.K_min == 0.5
        assert rep.K_max == 2.5
        assert rep.theta_min == 2.0
        assert rep.theta_max == 3.0

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            bounds_report([])

    def test_stationary_disk_run_brackets(self, grid, unit_disk):
        spec = ProblemSpec(p=1.0, q=3.0, f=np.ones(grid.n))
        _, series = run(spec, FlowConfig(), unit_disk)
        rep = bounds_report(series)
        assert rep.h_min == 1.0
        assert rep.h_max == 1.0
        assert rep.K_min == 1.0
        assert rep.K_max == 1.0
        assert abs(rep.theta_min - DISK1_BOUNDARY_V) / DISK1_BOUNDARY_V < 1e-12
        assert rep.grad_max == 0.0


class TestFirstVariation:
    def test_disk_scaling_matches_closed_form(self, unit_disk):
        res = first_variation_check(unit_disk, unit_disk.h, 1.0, 3.0)
        ref = DISK_SCALING_DERIVATIVE
        assert abs(res.fd_derivative - ref) / ref < 1e-3
        assert abs(res.ratio - 1.0) < 1e-3

    def test_log_scaling_at_p_zero(self, unit_disk):
        res = first_variation_check(unit_disk, np.ones(unit_disk.grid.n), 0.0, 3.0)
        ref = DISK_SCALING_DERIVATIVE
        assert abs(res.fd_derivative - ref) / ref < 1e-3

    def test_halving_step_converges_second_order(self, unit_disk):
        f1 = first_variation_check(unit_disk, unit_disk.h, 1.0, 3.0, t_step=2e-4).fd_derivative
        f2 = first_variation_check(unit_disk, unit_disk.h, 1.0, 3.0, t_step=1e-4).fd_derivative
        f3 = first_variation_check(unit_disk, unit_disk.h, 1.0, 3.0, t_step=5e-5).fd_derivative
        limit = (4.0 * f3 - f2) / 3.0
        assert abs(f1 - limit) >= 3.0 * abs(f2 - limit)

    def test_null_perturbation_gives_zero(self, unit_disk):
        res = first_variation_check(unit_disk, np.zeros(unit_disk.grid.n), 1.0, 3.0)
        assert res.fd_derivative == 0.0
        assert res.measure_integral == 0.0
        assert math.isnan(res.ratio)

    def test_rejects_bad_inputs(self, unit_disk):
        n = unit_disk.grid.n
        with pytest.raises(InvalidShape):
            first_variation_check(unit_disk, -np.ones(n), 1.0, 3.0)
        with pytest.raises(InvalidShape):
            first_variation_check(unit_disk, np.ones(n // 2), 1.0, 3.0)
        with pytest.raises(ValueError):
            first_variation_check(unit_disk, np.ones(n), -1.0, 3.0)
        with pytest.raises(ValueError):
            first_variation_check(unit_disk, np.ones(n), 1.0, 3.0, t_step=0.0)

    def test_nonconvex_perturbation_reports_step(self, unit_disk):
        g = 1.0 + 0.9 * np.cos(16.0 * unit_disk.grid.theta)
        with pytest.raises(ConvexityViolation) as exc:
            first_variation_check(unit_disk, g, 1.0, 3.0, t_step=0.9)
        assert abs(exc.value.t) == pytest.approx(0.9, rel=1e-12)


class TestVariationSurvey:
    def test_disk_family_ratio_is_scale_free(self, grid):
        bodies = [(f"disk_{r}", disk(r, grid)) for r in (0.5, 1.0, 2.0)]
        rows = variation_ratio_survey(bodies, 1.0, 3.0)
        ratios = [row.ratio for row in rows]
        mid = sum(ratios) / len(ratios)
        assert (max(ratios) - min(ratios)) / mid < 1e-3
        assert [row.body for row in rows] == ["disk_0.5", "disk_1.0", "disk_2.0"]

    def test_ratio_is_body_independent(self, grid, ellipse21, fourier01):
        bodies = [
            ("disk", disk(1.0, grid)),
            ("ellipse", ellipse21),
            ("fourier", fourier01),
        ]
        rows = variation_ratio_survey(bodies, 1.0, 3.0)
        ratios = [row.ratio for row in rows]
        mid = sum(ratios) / len(ratios)
        assert (max(ratios) - min(ratios)) / mid < 1e-2

    def test_ratio_scales_as_reciprocal_p(self, grid, unit_disk):
        row_p1 = variation_ratio_survey([("d", unit_disk)], 1.0, 3.0)[0]
        row_p2 = variation_ratio_survey([("d", unit_disk)], 2.0, 3.0)[0]
        assert abs(row_p2.ratio / row_p1.ratio - 0.5) < 1e-3
        assert row_p2.p == 2.0
        assert row_p2.q == 3.0

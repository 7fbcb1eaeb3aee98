import math

import numpy as np
import pytest

from tendonfinger.energy import (
    balance_residuals,
    equilibrium_report,
    find_equilibrium,
    potential_gradient,
    random_tip_load_cases,
    total_potential,
)
from tendonfinger.errors import BoundaryMinimum, RangeExceeded
from tendonfinger.model import ExternalLoad, TendonGroup, coupling_angles
from tendonfinger.statics import coupling_rest_lengths, solve_static

from conftest import STEEL_AREA, STEEL_E, make_specs


class TestTotalPotential:
    def test_zero_at_nominal_unloaded(self, geom_massless):
        q = 0.004
        theta = coupling_angles(q, geom_massless).theta
        sample = total_potential(theta, geom_massless, make_specs(),
                                 ExternalLoad(), q)
        assert sample.elastic_pe == 0.0
        assert sample.gravity_pe == 0.0
        assert sample.total == 0.0

    def test_component_sum(self, geom_cal):
        load = ExternalLoad(force=(1.0, -15.0), moment=0.02)
        sample = total_potential((-0.1, -0.05, -0.02), geom_cal, make_specs(),
                                 load, 0.0)
        assert sample.total == pytest.approx(
            sample.gravity_pe + sample.elastic_pe + sample.load_pe, rel=1e-12
        )

    def test_distal_perturbation_quadratic(self, geom_massless):
        # Moving only joint 3 stretches only that coupling tendon, giving
        # the quadratic 0.5 * (E A / L_T3) * (R3 d)^2.
        q, d = 0.002, 1.5e-3
        theta = list(coupling_angles(q, geom_massless).theta)
        theta[2] += d
        sample = total_potential(theta, geom_massless, make_specs(),
                                 ExternalLoad(), q)
        _, lt3 = coupling_rest_lengths(geom_massless)
        k3 = STEEL_E * STEEL_AREA / lt3
        expect = 0.5 * k3 * (geom_massless.guide_radii[2] * d) ** 2
        assert sample.elastic_pe == pytest.approx(expect, rel=1e-9)

    def test_range_exceeded(self, geom_cal):
        with pytest.raises(RangeExceeded):
            total_potential((1.8, 0.0, 0.0), geom_cal, make_specs(),
                            ExternalLoad(), 0.0)


class TestGradient:
    def test_matches_finite_differences(self, geom_cal):
        specs = make_specs()
        load = ExternalLoad(force=(0.4, -20.0), moment=-0.01)
        rng = np.random.default_rng(23)
        h = 1e-7
        for _ in range(50):
            # Sample strictly on the flexion-taut side so the clamp is
            # differentiable at the evaluation point.
            theta = tuple(-float(v) for v in rng.uniform(0.01, 0.12, 3))
            grad = potential_gradient(theta, geom_cal, specs, load, 0.0)
            fd = np.zeros(3)
            for k in range(3):
                tp, tm = list(theta), list(theta)
                tp[k] += h
                tm[k] -= h
                fd[k] = (
                    total_potential(tp, geom_cal, specs, load, 0.0).total
                    - total_potential(tm, geom_cal, specs, load, 0.0).total
                ) / (2 * h)
            rel = np.max(np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-9))
            assert rel < 1e-4

    def test_matches_finite_differences_with_attached_point(self, geom_cal):
        # Force applied at a fixed point that rides with the distal link.
        specs = make_specs()
        load = ExternalLoad(force=(0.0, -10.0), moment=0.0,
                            application_point=(0.15, 0.0))
        theta = (-0.05, -0.09, -0.15)
        grad = potential_gradient(theta, geom_cal, specs, load, 0.0)
        h = 1e-7
        fd = np.zeros(3)
        for k in range(3):
            tp, tm = list(theta), list(theta)
            tp[k] += h
            tm[k] -= h
            fd[k] = (
                total_potential(tp, geom_cal, specs, load, 0.0).total
                - total_potential(tm, geom_cal, specs, load, 0.0).total
            ) / (2 * h)
        assert np.max(np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-9)) < 1e-4


class TestFindEquilibrium:
    def test_unloaded_minimum_at_nominal(self, geom_massless):
        q = 0.003
        eq = find_equilibrium(geom_massless, make_specs(), ExternalLoad(), q)
        nominal = coupling_angles(q, geom_massless).theta
        for a, b in zip(eq.theta, nominal):
            assert a == pytest.approx(b, abs=1e-4)
        assert eq.energy <= 0.0 + 1e-15

    def test_grid_validation(self, geom_massless):
        with pytest.raises(ValueError):
            find_equilibrium(geom_massless, make_specs(), ExternalLoad(), 0.0,
                             grid=5)

    def test_minimum_below_nominal_and_local_probes(self, geom_cal):
        specs = make_specs()
        load = ExternalLoad.tip_payload(1.0, geom_cal.gravity_accel)
        eq = find_equilibrium(geom_cal, specs, load, 0.0)
        nominal = total_potential(coupling_angles(0.0, geom_cal).theta,
                                  geom_cal, specs, load, 0.0)
        assert eq.energy <= nominal.total
        rng = np.random.default_rng(4)
        cell = 1.0 / 4 ** 6 / 20  # final refinement spacing
        # A smooth landscape can dip below the best sample between grid
        # nodes by ~0.5 * curvature * cell^2, here under 1e-7 J.
        for _ in range(100):
            probe = tuple(
                t + float(d) for t, d in zip(eq.theta, rng.uniform(-cell, cell, 3))
            )
            assert eq.energy <= total_potential(
                probe, geom_cal, specs, load, 0.0
            ).total + 1e-7

    def test_refinement_never_worse_than_coarse(self, geom_cal):
        specs = make_specs()
        load = ExternalLoad.tip_payload(2.0, geom_cal.gravity_accel)
        coarse = find_equilibrium(geom_cal, specs, load, 0.0, refine_rounds=0)
        refined = find_equilibrium(geom_cal, specs, load, 0.0, refine_rounds=6)
        assert refined.energy <= coarse.energy

    def test_rigid_limit_near_nominal(self, geom_cal):
        # At E = 1e15 the steel-case equilibrium angles scale down by
        # 2e11 / 1e15; that puts every joint within ~5e-5 rad of nominal,
        # plus grid quantization.
        specs = make_specs(youngs_modulus=1e15)
        load = ExternalLoad.tip_payload(3.0, geom_cal.gravity_accel)
        eq = find_equilibrium(geom_cal, specs, load, 0.0)
        assert max(abs(t) for t in eq.theta) < 1e-4

    def test_boundary_minimum_detected(self, geom_cal):
        load = ExternalLoad.tip_payload(60.0, geom_cal.gravity_accel)
        with pytest.raises(BoundaryMinimum):
            find_equilibrium(geom_cal, make_specs(), load, 0.0)


class TestBalanceResiduals:
    def test_stationarity_matches_tangent_cascade(self, geom_cal):
        # The analytic gradient is the negative of the tangent-model
        # balance residuals when tensions come from the pose's stretches.
        specs = make_specs()
        load = ExternalLoad.tip_payload(1.5, geom_cal.gravity_accel)
        # R1 d1 < R2 d2 < R3 d3 keeps all three flexion tendons taut and
        # the whole extension group slack.
        theta = (-0.08, -0.12, -0.20)
        res = balance_residuals(theta, geom_cal, specs, load, 0.0,
                                TendonGroup.FLEXION)
        grad = potential_gradient(theta, geom_cal, specs, load, 0.0)
        assert np.allclose(res["tangent_nm"], -grad, atol=1e-9)

    def test_small_residual_at_energy_minimum(self, geom_cal):
        specs = make_specs()
        load = ExternalLoad.tip_payload(2.0, geom_cal.gravity_accel)
        eq = find_equilibrium(geom_cal, specs, load, 0.0)
        res = balance_residuals(eq.theta, geom_cal, specs, load, 0.0,
                                TendonGroup.FLEXION)
        assert max(abs(r) for r in res["tangent_nm"]) < 0.01


class TestEquilibriumReport:
    def test_documented_discrepancy(self, calibrated):
        # The solver follows the per-joint stretch update while the
        # energy landscape uses the coupled tendon paths; their
        # equilibria differ well beyond 1% of finger length and the
        # report records the gap plus the literal wrap-moment probe.
        geom, specs = calibrated.geometry, calibrated.tendons
        cases = random_tip_load_cases(3, 7, geom)
        report = equilibrium_report(geom, specs, 0.0, cases)
        assert len(report["cases"]) == 3
        for entry in report["cases"]:
            assert "fingertip_delta_mm" in entry
            assert "balance_residuals_at_energy_pose" in entry
        assert report["summary"]["within_tolerance"] is False
        probe = report["wrap_integral_probe"]
        assert probe["status"] in ("RangeExceeded", "NoConvergence",
                                   "TensionInfeasible")

    def test_rigid_limit_agreement(self, geom_cal):
        # With near-rigid tendons both routes collapse onto the nominal
        # pose and must agree to well under 0.1% of finger length.
        specs = make_specs(youngs_modulus=1e15)
        load = ExternalLoad.tip_payload(3.0, geom_cal.gravity_accel)
        sol = solve_static(0.0, geom_cal, specs, load)
        eq = find_equilibrium(geom_cal, specs, load, 0.0)
        gap = math.hypot(sol.fingertip.position[0] - eq.fingertip[0],
                         sol.fingertip.position[1] - eq.fingertip[1])
        assert gap / geom_cal.total_length < 1e-3

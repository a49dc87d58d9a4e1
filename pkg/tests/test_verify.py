import json
import math

import numpy as np
import pytest

import stablesim as ss
from stablesim.verify import (
    VerificationReport,
    check_kernel_identity,
    check_scaling_maps,
    check_self_similar,
    check_stationary_increments,
    default_probes,
    lamperti_identity_fixture,
    mc_distribution_check,
    rotating_identity_fixture,
    run_suite,
    UnsupportedFamilyError,
)


class TestStationaryIncrements:
    def test_linear_motion_exact(self):
        k = ss.build(ss.LinearMotion(1.5))
        rep = check_stationary_increments(k, combos=[ss.combo((1.0, 1.0))])
        assert rep.passed
        assert rep.max_residual < 1e-12

    def test_lfsm_within_tolerance_and_decreasing(self):
        k = ss.build(ss.Lfsm(1.5, 0.7))
        rep = check_stationary_increments(k)
        assert rep.passed
        assert rep.details["fine_max"] <= max(rep.details["coarse_max"], 1e-12)

    def test_chentsov(self):
        k = ss.build(ss.Chentsov(1.25, 0.5))
        rep = check_stationary_increments(k)
        assert rep.passed

    def test_report_serializes(self):
        k = ss.build(ss.LinearMotion(1.5))
        rep = check_stationary_increments(k, combos=[ss.combo((1.0, 1.0))])
        json.dumps(rep.to_dict())


class TestSelfSimilar:
    def test_linear_motion_exact_doubling(self):
        # alpha H = 1: doubling the scale doubles sigma^alpha exactly
        k = ss.build(ss.LinearMotion(1.5))
        c = ss.combo((1.0, 1.0))
        v1 = ss.cf_exponent(k, c.scaled_times(1.0), level=1).expect()
        v2 = ss.cf_exponent(k, c.scaled_times(2.0), level=1).expect()
        assert v2 == pytest.approx(2.0 * v1, rel=1e-12)

    def test_fitted_exponents(self):
        for spec, hurst in [(ss.Lfsm(1.5, 0.7), 0.7),
                            (ss.TruncatedFractional(1.5, 0.5, 0.5), 5.0 / 6.0),
                            (ss.Chentsov(1.25, 0.5), 0.4)]:
            rep = check_self_similar(ss.build(spec))
            assert rep.passed, (spec, rep.residuals)
            assert rep.details["target_hurst"] == pytest.approx(hurst)

    def test_chentsov_hurst_above_one(self):
        rep = check_self_similar(ss.build(ss.Chentsov(0.5, 0.6)))
        assert rep.passed
        assert np.mean(rep.details["fitted_hurst"]) == pytest.approx(1.2, rel=0.01)

    def test_negative_control_perturbed_b(self):
        # kernel from b=0.6 has H = 23/30, not 5/6; the slope check against
        # the unperturbed target must fail
        k = ss.build(ss.TruncatedFractional(1.5, 0.5, 0.6))
        rep = check_self_similar(k, combos=default_probes()[:3], target_hurst=5.0 / 6.0)
        assert not rep.passed


class TestScalingMaps:
    def test_mixed_lfsm_exponents(self):
        rep = check_scaling_maps(ss.MixedLfsm(1.5, 0.7, (((1.0, 0.0), 1.0), ((0.0, 1.0), 0.5))))
        assert rep.passed
        assert rep.details["beta1"] == pytest.approx(0.7 - 1.0 / 1.5)
        assert rep.details["beta2"] == 0.0

    def test_truncated_exponents(self):
        rep = check_scaling_maps(ss.TruncatedFractional(1.5, 0.5, 0.5))
        assert rep.passed
        assert rep.details["beta1_hat"] == pytest.approx(0.5, abs=1e-9)
        assert rep.details["beta2_hat"] == pytest.approx(-0.5, abs=1e-9)

    def test_chentsov_exponents(self):
        rep = check_scaling_maps(ss.Chentsov(1.25, 0.5))
        assert rep.passed
        assert rep.details["beta1_hat"] == pytest.approx(0.0, abs=1e-12)
        assert rep.details["beta2_hat"] == pytest.approx(0.5 - 1.0, abs=1e-9)

    def test_hurst_reconciliation(self):
        for spec in (ss.MixedLfsm(1.5, 0.7, (((1.0, 0.0), 1.0),)),
                     ss.TruncatedFractional(1.5, 0.5, 0.5), ss.Chentsov(1.25, 0.5)):
            rep = check_scaling_maps(spec)
            assert rep.details["hurst_from_maps"] == pytest.approx(ss.hurst_of(spec), rel=1e-9)

    def test_unsupported_family(self):
        with pytest.raises(UnsupportedFamilyError):
            check_scaling_maps(ss.LogFractional(1.5))


class TestKernelIdentity:
    def test_rotating_form_residual_zero(self):
        g = ss.FourierSeries(((1, 1.0, 0.0), (3, 0.4, -0.2)))
        rep = check_kernel_identity(rotating_identity_fixture(g))
        assert rep.passed
        assert rep.max_residual < 1e-10

    def test_rotating_at_t_zero_both_sides_vanish(self):
        g = ss.FourierSeries(((1, 1.0, 0.0),))
        fix = rotating_identity_fixture(g)
        assert np.max(np.abs(fix.lhs(0.0, fix.points))) == 0.0
        assert np.max(np.abs(fix.rhs(0.0, fix.points))) == 0.0

    def test_lamperti_form_residual(self):
        rep = check_kernel_identity(lamperti_identity_fixture(ss.Lfsm(1.5, 0.7, 1.0, 0.5)))
        assert rep.passed
        assert rep.max_residual < 1e-10


class TestMcCheck:
    def test_linear_motion_agrees(self):
        k = ss.build(ss.LinearMotion(1.5))
        times = sorted({t for c in default_probes() for t in c.times})
        ens = ss.simulate(k, times, 4000, seed=3)
        rep = mc_distribution_check(ens, k)
        assert rep.passed

    def test_zero_theta_probe_residual_zero(self):
        k = ss.build(ss.LinearMotion(1.5))
        ens = ss.simulate(k, [1.0], 100, seed=1)
        rep = mc_distribution_check(ens, k, combos=[ss.combo((0.0, 1.0))])
        assert rep.residuals[0] == 0.0

    def test_mismatched_kernel_fails(self):
        k = ss.build(ss.LinearMotion(1.5))
        wrong = ss.build(ss.Lfsm(1.5, 0.3))
        times = sorted({t for c in default_probes() for t in c.times})
        ens = ss.simulate(k, times, 4000, seed=3)
        rep = mc_distribution_check(ens, wrong)
        assert not rep.passed


class TestRunSuite:
    def test_si_ss_suite(self):
        reports = run_suite(ss.Lfsm(1.5, 0.7), ("si", "ss"))
        assert [r.name for r in reports] == ["stationary_increments", "self_similarity"]
        assert all(r.passed for r in reports)

    def test_scaling_skipped_for_undeclared_family(self):
        reports = run_suite(ss.LogFractional(1.5), ("scaling",))
        assert reports[0].passed and "skipped" in reports[0].details

    def test_unknown_check_rejected(self):
        with pytest.raises(ValueError):
            run_suite(ss.Lfsm(1.5, 0.7), ("nope",))

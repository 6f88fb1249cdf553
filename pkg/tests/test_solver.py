"""Solver: slope fixed points, bisection to a target level, sweeps, and the
four-route equivalence."""

import math

import numpy as np
import pytest

from irdf import (
    BecModel,
    BscModel,
    DistortionMatrix,
    DomainError,
    FTransform,
    JointSource,
    SolverConfig,
    ba_fixed_slope,
    binary_entropy,
    bsc_irdf,
    build_amended,
    characterize,
    distortion_at_rate,
    domain_bounds,
    f_domain_bounds,
    solve_at_distortion,
    sweep_curve,
)
from irdf import kernels
from irdf.kernels import _ba_fixed_slope_numpy

LN2 = math.log(2.0)


def bsc_problem(beta, f=None):
    m = BscModel(beta, f or FTransform.identity())
    return m, m.source(), m.distortion()


def bec_problem(delta, f=None):
    m = BecModel(delta, f or FTransform.identity())
    return m, m.source(), m.distortion()


class TestDomainBounds:
    def test_bsc_identity(self):
        _, src, d = bsc_problem(0.15)
        am = build_amended(src, d, FTransform.identity())
        assert f_domain_bounds(am, src.z_marginal) == pytest.approx((0.15, 0.5), abs=1e-15)

    def test_erasure_identity(self):
        _, src, d = bec_problem(0.4)
        am = build_amended(src, d, FTransform.identity())
        assert f_domain_bounds(am, src.z_marginal) == pytest.approx((0.2, 0.5), abs=1e-15)

    def test_bsc_general_f(self):
        f = FTransform.exponential(9.2)
        _, src, d = bsc_problem(0.01, f)
        am = build_amended(src, d, f)
        lo, hi = f_domain_bounds(am, src.z_marginal)
        f0, f1 = f.apply(0.0), f.apply(1.0)
        assert lo == pytest.approx(0.99 * f0 + 0.01 * f1, rel=1e-14)
        assert hi == pytest.approx(0.5 * (f0 + f1), rel=1e-14)


class TestFixedSlope:
    def test_zero_slope_is_zero_rate_end(self):
        _, src, d = bsc_problem(0.15)
        am = build_amended(src, d, FTransform.identity())
        pt = ba_fixed_slope(am, src.z_marginal, 0.0)
        assert pt.rate == 0.0
        assert pt.f_distortion == pytest.approx(0.5, abs=1e-15)
        # conditional independent of the observation
        np.testing.assert_allclose(pt.q_cond, np.tile(pt.q_out, (2, 1)), atol=0)

    def test_steep_slope_saturates(self):
        _, src, d = bsc_problem(0.15)
        am = build_amended(src, d, FTransform.identity())
        pt = ba_fixed_slope(am, src.z_marginal, -1e4)
        assert pt.f_distortion == pytest.approx(0.15, abs=1e-12)
        assert pt.rate == pytest.approx(LN2, abs=1e-12)

    def test_positive_slope_rejected(self):
        _, src, d = bsc_problem(0.15)
        am = build_amended(src, d, FTransform.identity())
        with pytest.raises(ValueError):
            ba_fixed_slope(am, src.z_marginal, 0.5)

    def test_distortion_monotone_in_slope(self):
        rng = np.random.default_rng(3)
        joint = rng.random((3, 3))
        src = JointSource.from_joint(joint / joint.sum())
        d = DistortionMatrix(rng.random((3, 4)))
        am = build_amended(src, d, FTransform.identity())
        slopes = -np.geomspace(1e-2, 1e3, 25)
        dists = [ba_fixed_slope(am, src.z_marginal, s).f_distortion for s in slopes]
        assert np.all(np.diff(dists) <= 1e-9)

    def test_rate_forms_agree_and_marginal_consistent(self):
        for f in (FTransform.identity(), FTransform.exponential(9.2)):
            _, src, d = bsc_problem(0.15, f)
            am = build_amended(src, d, f)
            for s_scale in (0.1, 1.0, 10.0):
                span = np.ptp(am.expected_f)
                pt = ba_fixed_slope(am, src.z_marginal, -s_scale / span)
                if pt.rate > 0:
                    assert pt.rate == pytest.approx(pt.rate_parametric, abs=1e-8)
                np.testing.assert_allclose(pt.q_cond.sum(axis=1), 1.0, atol=1e-10)
                np.testing.assert_allclose(
                    pt.q_out, src.z_marginal @ pt.q_cond, atol=1e-10
                )


class TestSolveAtDistortion:
    def test_bsc_interior_matches_oracle(self):
        # closed form: ln 2 - h_b((0.3 - 0.15)/0.7) nats
        _, src, d = bsc_problem(0.15)
        pt = solve_at_distortion(src, d, FTransform.identity(), 0.3)
        oracle = LN2 - binary_entropy((0.3 - 0.15) / 0.7)
        assert pt.rate == pytest.approx(oracle, abs=1e-7)
        assert pt.converged

    def test_left_endpoint_gives_full_bit(self):
        _, src, d = bsc_problem(0.25)
        pt = solve_at_distortion(src, d, FTransform.identity(), 0.25)
        assert pt.rate == pytest.approx(LN2, abs=1e-7)

    def test_classical_rdf_at_beta_zero(self):
        _, src, d = bsc_problem(0.0)
        pt = solve_at_distortion(src, d, FTransform.identity(), 0.25)
        assert pt.rate == pytest.approx(LN2 - binary_entropy(0.25), abs=1e-7)

    def test_erasure_zero_rate_at_dmax(self):
        _, src, d = bec_problem(0.4)
        pt = solve_at_distortion(src, d, FTransform.identity(), 0.5)
        assert pt.rate == 0.0

    def test_below_domain_raises(self):
        _, src, d = bsc_problem(0.15)
        with pytest.raises(DomainError):
            solve_at_distortion(src, d, FTransform.identity(), 0.05)

    def test_above_domain_clamps_to_zero(self):
        _, src, d = bsc_problem(0.15)
        pt = solve_at_distortion(src, d, FTransform.identity(), 0.75)
        assert pt.rate == 0.0
        assert pt.clamped


class TestSweep:
    def test_identity_bsc_matches_closed_form(self):
        m, src, d = bsc_problem(0.15)
        curve = sweep_curve(src, d, m.f, 40)
        for pt in curve.points:
            assert pt.rate == pytest.approx(bsc_irdf(m, pt.distortion), abs=1e-6)

    def test_curve_shape_invariants(self):
        m, src, d = bsc_problem(0.1)
        curve = sweep_curve(src, d, m.f, 30)
        ds, rs = curve.distortions, curve.rates
        assert np.all(np.diff(ds) > 0)
        assert np.all(np.diff(rs) <= 1e-9)
        assert rs[-1] == pytest.approx(0.0, abs=1e-9)
        assert curve.d_min == pytest.approx(0.1, abs=1e-12)
        assert curve.d_max == pytest.approx(0.5, abs=1e-12)

    def test_exponential_domain(self):
        rho, beta = 9.2, 0.01
        f = FTransform.exponential(rho)
        m, src, d = bsc_problem(beta, f)
        curve = sweep_curve(src, d, f, 20)
        assert curve.d_min == pytest.approx(math.log(1 - beta + beta * math.exp(rho)) / rho, rel=1e-12)
        assert curve.d_max == pytest.approx(math.log((1 + math.exp(rho)) / 2) / rho, rel=1e-12)
        assert curve.distortions[0] > curve.d_min

    def test_quadratic_domain(self):
        f = FTransform.power(2.0)
        m, src, d = bsc_problem(0.001, f)
        curve = sweep_curve(src, d, f, 10)
        assert curve.d_min == pytest.approx(math.sqrt(0.001), rel=1e-12)
        assert curve.d_max == pytest.approx(math.sqrt(0.5), rel=1e-12)

    def test_slope_grid_mode(self):
        m, src, d = bsc_problem(0.15)
        cfg = SolverConfig(slope_grid=tuple(-np.geomspace(0.1, 50, 12)))
        curve = sweep_curve(src, d, m.f, 12, cfg)
        assert len(curve.points) == 12
        assert np.all(np.diff(curve.distortions) > 0)

    def test_raw_axis_not_convex_for_exponential(self):
        f = FTransform.exponential(9.2)
        m, src, d = bsc_problem(0.01, f)
        curve = sweep_curve(src, d, f, 41)
        rs = curve.rates
        assert np.all(np.diff(rs) <= 1e-9)
        worst = 0.0
        n = len(rs)
        for step in range(1, n // 2):
            for j in range(step, n - step):
                worst = max(worst, rs[j] - 0.5 * (rs[j - step] + rs[j + step]))
        assert worst >= 1e-3

    def test_transform_axis_still_convex_for_exponential(self):
        f = FTransform.exponential(9.2)
        m, src, d = bsc_problem(0.01, f)
        lo_d, hi_d = domain_bounds(m)
        fgrid = np.linspace(f.apply(lo_d), f.apply(hi_d), 41)
        rates = np.array([bsc_irdf(m, float(f.invert(v))) for v in fgrid])
        chords = 0.5 * (rates[:-2] + rates[2:])
        assert np.all(rates[1:-1] <= chords + 1e-9)


class TestCharacterize:
    def test_routes_match_closed_form(self):
        m, src, d = bsc_problem(0.15)
        rep = characterize(src, d, m.f, 0.3)
        oracle = bsc_irdf(m, 0.3)
        for rate in rep.rates():
            assert rate == pytest.approx(oracle, abs=1e-7)
        assert rep.max_spread <= 1e-8

    def test_noiseless_channel_all_routes(self):
        src = JointSource.from_prior_and_channel((0.5, 0.5), np.eye(2))
        d = DistortionMatrix.hamming(2)
        f = FTransform.power(2.0)
        rep = characterize(src, d, f, 0.4)
        assert rep.max_spread <= 1e-8

    def test_random_source(self):
        rng = np.random.default_rng(17)
        joint = rng.random((3, 4))
        src = JointSource.from_joint(joint / joint.sum())
        d = DistortionMatrix(rng.random((3, 3)))
        f = FTransform.shifted_cubic(0.3)
        am = build_amended(src, d, f)
        lo, hi = f_domain_bounds(am, src.z_marginal)
        D = float(f.invert(lo + 0.6 * (hi - lo)))
        rep = characterize(src, d, f, D)
        assert rep.max_spread <= 1e-8


class TestDistortionAtRate:
    def test_inverts_the_curve(self):
        m, src, d = bsc_problem(0.15)
        D = distortion_at_rate(src, d, m.f, 0.5 * LN2)
        assert bsc_irdf(m, D) == pytest.approx(0.5 * LN2, abs=1e-8)

    def test_zero_rate_gives_dmax(self):
        m, src, d = bsc_problem(0.15)
        assert distortion_at_rate(src, d, m.f, 0.0) == pytest.approx(0.5, abs=1e-12)


class TestParallelSweep:
    def test_thread_pool_matches_serial(self, monkeypatch):
        m, src, d = bsc_problem(0.15)
        serial = sweep_curve(src, d, m.f, 12)
        monkeypatch.setenv("IRDF_THREADS", "4")
        threaded = sweep_curve(src, d, m.f, 12)
        np.testing.assert_array_equal(serial.distortions, threaded.distortions)
        np.testing.assert_array_equal(serial.rates, threaded.rates)


class TestBackends:
    def test_numpy_twin_matches_selected_backend(self):
        _, src, d = bsc_problem(0.15, FTransform.exponential(9.2))
        f = FTransform.exponential(9.2)
        am = build_amended(src, d, f)
        e = np.ascontiguousarray(am.expected_f[am.used_z])
        pz = np.ascontiguousarray(src.z_marginal[am.used_z] / src.z_marginal[am.used_z].sum())
        for s in (-1e-4, -1e-3, -1e-2):
            a = kernels.ba_fixed_slope_loop(e, pz, s, 20000, 1e-12, 1e-12, 1e-300)
            b = _ba_fixed_slope_numpy(e, pz, s, 20000, 1e-12, 1e-12, 1e-300)
            assert a[2] == pytest.approx(b[2], rel=1e-9)  # distortion
            assert a[3] == pytest.approx(b[3], abs=1e-9)  # rate
            assert a[6] == b[6]  # converged flag

"""Unit tests for drift oracles, mean variation, localisation and decompositions."""

import unittest

import numpy as np
from scipy import integrate as quadrature
from scipy import linalg, stats

from grid_paths import (
    BoundedTruncation,
    BrownianMotion,
    DeterministicFunction,
    DomainError,
    FractionalBrownianMotion,
    InvariantViolation,
    OrnsteinUhlenbeck,
    PathEnsemble,
    SquaredBrownian,
    StoppingTimeVector,
    StructuralError,
    abs_at_least,
    at_least,
    fgn_autocovariance,
    first_passage,
    make_grid,
    rho_plus,
    simulate,
    stop,
)
from integrands import LAG_ZERO, integrate
from variation import (
    ConditionalDriftOracle,
    GaussianPredictor,
    OracleKind,
    bounded_variation_stopping,
    conditional_drift,
    doob_decompose,
    drift_matrix,
    durbin_levinson,
    martingale_certificate,
    mean_variation,
    mean_variation_report,
    mean_variation_stopped,
    rao_decompose,
    sign_integrand,
    submartingale_certificates,
    telescope_paste,
)
from variation.mean_variation import path_variation
from variation.oracles import clipped_gaussian_mean, clipped_poisson_mean

ANALYTIC = ConditionalDriftOracle(OracleKind.ANALYTIC)
GAUSSIAN_LINEAR = ConditionalDriftOracle(OracleKind.GAUSSIAN_LINEAR)


class TestPrediction(unittest.TestCase):
    """Test cases for the Gaussian linear predictor."""

    def setUp(self):
        self.hurst = 0.7
        self.n_steps = 16
        self.gamma = fgn_autocovariance(self.hurst, np.arange(self.n_steps + 1))
        self.covariance = linalg.toeplitz(self.gamma[:self.n_steps])

    def test_durbin_levinson_matches_direct_solve(self):
        coefficients, variances = durbin_levinson(self.gamma)
        self.assertAlmostEqual(variances[0], self.gamma[0])
        for k in range(1, self.n_steps):
            past = self.covariance[:k, :k]
            cross = self.gamma[k:0:-1]
            direct = np.linalg.solve(past, cross)
            np.testing.assert_allclose(coefficients[k], direct, rtol=1e-8, atol=1e-12)
            self.assertAlmostEqual(variances[k], self.gamma[0] - cross @ direct, places=10)

    def test_block_drift_matches_conditioning(self):
        predictor = GaussianPredictor(lambda k: fgn_autocovariance(self.hurst, k), self.n_steps)
        rng = np.random.default_rng(5)
        increments = rng.standard_normal((3, self.n_steps))
        stride = 4
        drifts = predictor.block_drift(increments, stride)
        for block in range(1, self.n_steps // stride):
            start = block * stride
            past = self.covariance[:start, :start]
            cross = self.covariance[start:start + stride, :start].sum(axis=0)
            expected = increments[:, :start] @ np.linalg.solve(past, cross)
            np.testing.assert_allclose(drifts[:, block], expected, rtol=1e-8, atol=1e-10)
        np.testing.assert_array_equal(drifts[:, 0], 0.0)

    def test_block_variance_matches_conditioning(self):
        predictor = GaussianPredictor(lambda k: fgn_autocovariance(self.hurst, k), self.n_steps)
        stride = 4
        variances = predictor.block_variance(stride)
        ones = np.ones(stride)
        for block in range(self.n_steps // stride):
            start = block * stride
            inside = self.covariance[start:start + stride, start:start + stride]
            if start == 0:
                expected = ones @ inside @ ones
            else:
                cross = self.covariance[start:start + stride, :start]
                conditional = inside - cross @ np.linalg.solve(self.covariance[:start, :start], cross.T)
                expected = ones @ conditional @ ones
            self.assertAlmostEqual(variances[block], expected, places=8)

    def test_block_drift_rejects_uneven_blocks(self):
        predictor = GaussianPredictor(lambda k: fgn_autocovariance(self.hurst, k), self.n_steps)
        with self.assertRaises(StructuralError):
            predictor.block_drift(np.zeros((2, self.n_steps)), 3)


class TestOracles(unittest.TestCase):
    """Test cases for ConditionalDriftOracle and the drift formulas."""

    def test_auto_selection(self):
        self.assertIs(ConditionalDriftOracle.for_model(BrownianMotion()).kind, OracleKind.ANALYTIC)
        self.assertIs(
            ConditionalDriftOracle.for_model(FractionalBrownianMotion(0.7)).kind, OracleKind.GAUSSIAN_LINEAR
        )
        truncated = BoundedTruncation(FractionalBrownianMotion(0.3), 1.0)
        self.assertIs(ConditionalDriftOracle.for_model(truncated).kind, OracleKind.GAUSSIAN_LINEAR)
        self.assertTrue(ConditionalDriftOracle.for_model(BrownianMotion()).exact)

    def test_kernel_regression_needs_markov_model(self):
        with self.assertRaises(DomainError):
            ConditionalDriftOracle.for_model(FractionalBrownianMotion(0.7), "kernel-regression")
        with self.assertRaises(DomainError):
            ConditionalDriftOracle.for_model(FractionalBrownianMotion(0.7), "analytic")
        with self.assertRaises(DomainError):
            ConditionalDriftOracle.for_model(BrownianMotion(), "kernel-regression", bandwidth=0.0)
        oracle = ConditionalDriftOracle.for_model(BrownianMotion(), "kernel-regression")
        self.assertFalse(oracle.exact)

    def test_ornstein_uhlenbeck_drift(self):
        model = OrnsteinUhlenbeck(2.0, initial_value=1.0)
        ensemble = simulate(model, make_grid(5), 50, seed=3, workers=1)
        factor, _ = model.step_moments(ensemble.grid.dt)
        drift = conditional_drift(ensemble, ANALYTIC, 7)
        np.testing.assert_allclose(drift, (factor - 1.0) * ensemble.values[:, 7])

    def test_kernel_matches_analytic_for_deterministic_path(self):
        ensemble = simulate(DeterministicFunction.named("sine", 6), make_grid(6), 10, seed=0)
        kernel = ConditionalDriftOracle(OracleKind.KERNEL_REGRESSION)
        for level in (2, 4, 6):
            exact = mean_variation(ensemble, ANALYTIC, make_grid(level))
            estimated = mean_variation(ensemble, kernel, make_grid(level))
            self.assertAlmostEqual(exact.estimate, estimated.estimate, places=12)

    def test_kernel_error_shrinks_with_sample_size(self):
        model = BrownianMotion(drift=1.0)
        kernel = ConditionalDriftOracle.for_model(model, "kernel-regression", 0.2)
        coarse = make_grid(6)
        step_drift = 1.0 / 64
        errors = {}
        for n_paths in (1000, 4000):
            ensemble = simulate(model, coarse, n_paths, seed=37, workers=1)
            drifts = drift_matrix(ensemble, kernel, coarse)
            errors[n_paths] = float(np.sqrt(np.mean((drifts - step_drift) ** 2)))
        ratio = errors[1000] / errors[4000]
        self.assertGreaterEqual(ratio, 1.4)
        self.assertLessEqual(ratio, 2.6)
        self.assertLess(abs(float(np.mean(drifts)) - step_drift), 0.1 * step_drift)

    def test_gaussian_drift_uses_only_the_past(self):
        grid = make_grid(5)
        base = simulate(FractionalBrownianMotion(0.75), grid, 20, seed=41, workers=1).values
        for split in (1, 7, 16, 24):
            values = np.array(base)
            values[:, : split + 1] = base[0, : split + 1]
            values[:, split:] = base[0, split] + (base[:, split:] - base[:, split : split + 1])
            ensemble = PathEnsemble(grid, values, FractionalBrownianMotion(0.75), seed=0)
            drifts = drift_matrix(ensemble, GAUSSIAN_LINEAR)
            np.testing.assert_allclose(drifts[:, : split + 1], np.repeat(drifts[:1, : split + 1], 20, axis=0),
                                       rtol=0, atol=1e-12)
            self.assertFalse(np.allclose(drifts[:, -1], drifts[0, -1]))

    def test_clipped_gaussian_mean(self):
        for mean, std in ((0.3, 1.0), (-2.5, 0.5), (0.0, 3.0)):
            expected, _ = quadrature.quad(
                lambda x: np.clip(x, -1.0, 1.0) * stats.norm.pdf(x, mean, std), mean - 12 * std, mean + 12 * std,
                points=[-1.0, 1.0], limit=200,
            )
            result = clipped_gaussian_mean(np.array([mean]), np.array([std]), 1.0)
            self.assertAlmostEqual(float(result[0]), expected, places=7)
        np.testing.assert_array_equal(clipped_gaussian_mean(np.array([3.0]), np.array([0.0]), 1.0), [1.0])

    def test_clipped_poisson_mean(self):
        start = np.array([-1.5, 0.0, 1.2])
        rate = 0.8
        counts = np.arange(200)
        expected = [
            np.sum(np.clip(x + counts - rate, -2.0, 2.0) * stats.poisson.pmf(counts, rate)) for x in start
        ]
        np.testing.assert_allclose(clipped_poisson_mean(start, rate, 2.0), expected, atol=1e-12)


class TestMeanVariation(unittest.TestCase):
    """Test cases for Var(S, D_n)."""

    def test_martingale_has_zero_mean_variation(self):
        ensemble = simulate(BrownianMotion(), make_grid(8), 200, seed=1, workers=1)
        report = mean_variation_report(ensemble, ANALYTIC, [2, 4, 6, 8])
        np.testing.assert_array_equal(report.estimates, 0.0)
        self.assertEqual(report.extrapolation, "settled")

    def test_identity_function_has_unit_variation(self):
        ensemble = simulate(DeterministicFunction.named("identity", 8), make_grid(8), 20, seed=0)
        report = mean_variation_report(ensemble, ANALYTIC, range(0, 9))
        np.testing.assert_allclose(report.estimates, 1.0, rtol=1e-12)
        self.assertTrue(all(entry.stderr == 0.0 for entry in report.entries))

    def test_squared_brownian_has_unit_variation(self):
        ensemble = simulate(SquaredBrownian(), make_grid(7), 300, seed=2, workers=1)
        report = mean_variation_report(ensemble, ANALYTIC, [1, 3, 5, 7])
        np.testing.assert_allclose(report.estimates, 1.0, rtol=1e-12)
        self.assertEqual(report.extrapolation, "settled")

    def test_brownian_drift(self):
        ensemble = simulate(BrownianMotion(drift=-0.4), make_grid(6), 50, seed=4, workers=1)
        entry = mean_variation(ensemble, ANALYTIC, make_grid(4))
        self.assertAlmostEqual(entry.estimate, 0.4, places=12)
        self.assertEqual(entry.oracle, "analytic")
        self.assertFalse(entry.stopped)

    def test_fbm_variation_grows_with_level(self):
        ensemble = simulate(FractionalBrownianMotion(0.75), make_grid(6), 400, seed=8, workers=1)
        report = mean_variation_report(ensemble, GAUSSIAN_LINEAR, [2, 4, 6])
        self.assertTrue(report.is_monotone())
        self.assertLess(report.estimates[0], report.estimates[-1])
        self.assertTrue(np.all(report.estimates > 0))

    def test_stopped_variation_equals_variation_of_rho_plus(self):
        model = OrnsteinUhlenbeck(1.5, initial_value=0.5)
        ensemble = simulate(model, make_grid(7), 300, seed=6, workers=1)
        rho = first_passage(ensemble, abs_at_least(0.8))
        for level in (3, 5, 7):
            coarse = make_grid(level)
            gated = mean_variation_stopped(ensemble, ANALYTIC, rho, coarse)
            direct = mean_variation(stop(ensemble, rho_plus(rho, coarse)), ANALYTIC, coarse)
            self.assertAlmostEqual(gated.estimate, direct.estimate, places=12)
            self.assertTrue(gated.stopped)
            self.assertAlmostEqual(gated.fraction_unstopped, rho.fraction_infinite)

    def test_stopped_report_upper_bound_only_off_grid(self):
        ensemble = simulate(BoundedTruncation(BrownianMotion(), 1.0), make_grid(6), 200, seed=9, workers=1)
        on_grid = StoppingTimeVector.constant(ensemble.grid, 200, 32)
        off_grid = StoppingTimeVector.constant(ensemble.grid, 200, 33)
        coarse = make_grid(2)
        self.assertIsNone(mean_variation_stopped(ensemble, ANALYTIC, on_grid, coarse).upper_bound)
        bounded = mean_variation_stopped(ensemble, ANALYTIC, off_grid, coarse)
        self.assertAlmostEqual(bounded.upper_bound, bounded.estimate + 2.0)

    def test_gated_variation_stays_within_twice_the_sup(self):
        sine = simulate(DeterministicFunction.named("sine", 8), make_grid(8), 3, seed=0)
        rho = first_passage(sine, at_least(0.9))
        np.testing.assert_array_equal(rho.indices, 46)
        coarse = make_grid(3)
        gated = mean_variation_stopped(sine, ANALYTIC, rho, coarse)
        stopped = mean_variation(stop(sine, rho), ANALYTIC, coarse)
        self.assertAlmostEqual(gated.estimate, 1.0, places=12)
        self.assertAlmostEqual(stopped.estimate, np.sin(2 * np.pi * 46 / 256), places=12)
        self.assertLessEqual(abs(gated.estimate - stopped.estimate), 2.0 * np.max(np.abs(sine.values)))
        self.assertIsNotNone(gated.upper_bound)
        self.assertLessEqual(stopped.estimate, gated.upper_bound)

    def test_non_monotone_flag(self):
        ensemble = simulate(DeterministicFunction.named("identity", 4), make_grid(4), 5, seed=0)
        report = mean_variation_report(ensemble, ANALYTIC, [2, 4])
        report.entries[1].estimate = 0.5
        self.assertFalse(report.is_monotone())
        self.assertEqual(report.to_dict()["extrapolation"], "non-monotone")


class TestLocalization(unittest.TestCase):
    """Test cases for the sign integrand and its stopping time."""

    def setUp(self):
        self.ensemble = simulate(BoundedTruncation(BrownianMotion(), 1.0), make_grid(7), 2000, seed=12, workers=1)

    def test_sign_integrand(self):
        integrand = sign_integrand(self.ensemble, ANALYTIC, 5)
        self.assertEqual(integrand.lag, LAG_ZERO)
        self.assertTrue(np.all(np.isin(integrand.coefficients, [-1.0, 0.0, 1.0])))
        self.assertEqual(integrand.coefficients.shape, (2000, 32))

    def test_sign_integrand_realises_mean_variation(self):
        level = 4
        integrand = sign_integrand(self.ensemble, ANALYTIC, level)
        gap = integrate(self.ensemble, integrand) - path_variation(self.ensemble, ANALYTIC, make_grid(level))
        stderr = np.std(gap, ddof=1) / np.sqrt(gap.size)
        self.assertLess(abs(np.mean(gap)), 4 * stderr)

    def test_stopped_values_lie_below_bound(self):
        integrand = sign_integrand(self.ensemble, ANALYTIC, 6)
        bound = 2.5
        rho = bounded_variation_stopping(self.ensemble, integrand, bound, 1.0)
        process = integrate(stop(self.ensemble, rho), integrand)
        finite = ~rho.is_infinite
        self.assertTrue(finite.any())
        self.assertTrue(np.all(process[finite] >= bound - 2.0 - 1e-12))
        self.assertTrue(np.all(process[finite] <= bound + 1e-12))
        self.assertTrue(np.all(rho.indices[finite] % 2 == 0))

    def test_martingale_is_never_stopped(self):
        ensemble = simulate(BrownianMotion(), make_grid(5), 100, seed=0, workers=1)
        integrand = sign_integrand(ensemble, ANALYTIC, 5)
        np.testing.assert_array_equal(integrand.coefficients, 0.0)
        rho = bounded_variation_stopping(ensemble, integrand, 5.0, 1.0, declared=False)
        self.assertEqual(rho.fraction_infinite, 1.0)

    def test_overshoot_with_declared_bound_is_violation(self):
        ensemble = simulate(DeterministicFunction.named("identity", 4), make_grid(4), 3, seed=0)
        integrand = sign_integrand(ensemble, ANALYTIC, 2)
        # steps of 0.25 jump from below 0.27 straight past C = 0.47
        with self.assertRaises(InvariantViolation):
            bounded_variation_stopping(ensemble, integrand, 0.47, 0.1)


class TestDecompositions(unittest.TestCase):
    """Test cases for Doob and Rao decompositions."""

    def test_doob_reconstruction_and_certificate(self):
        ensemble = simulate(OrnsteinUhlenbeck(1.0, initial_value=2.0), make_grid(7), 200, seed=21, workers=1)
        doob = doob_decompose(ensemble, ANALYTIC, make_grid(4))
        self.assertLess(doob.reconstruction_error(), 1e-12)
        np.testing.assert_array_equal(doob.compensator.values[:, 0], 0.0)
        self.assertLess(float(np.max(martingale_certificate(doob))), 1e-12)
        # predictable: constant between points of D_4
        steps = np.diff(doob.compensator.values, axis=1)
        off_grid = np.arange(1, ensemble.grid.n_points) % 8 != 0
        np.testing.assert_array_equal(steps[:, off_grid], 0.0)

    def test_rao_decomposition(self):
        ensemble = simulate(OrnsteinUhlenbeck(1.0), make_grid(6), 200, seed=22, workers=1)
        rao = rao_decompose(ensemble, ANALYTIC)
        self.assertLess(rao.reconstruction_error(), 1e-12)
        upper, lower = submartingale_certificates(rao)
        self.assertGreaterEqual(float(np.min(upper)), -1e-12)
        self.assertGreaterEqual(float(np.min(lower)), 0.0)
        self.assertEqual(rao.upper.label, "Y")
        self.assertEqual(rao.lower.label, "Z")

    def test_submartingale_has_no_lower_part(self):
        ensemble = simulate(SquaredBrownian(), make_grid(6), 100, seed=23, workers=1)
        rao = rao_decompose(ensemble, ANALYTIC, make_grid(3))
        np.testing.assert_array_equal(rao.lower.values, 0.0)
        np.testing.assert_allclose(rao.doob.compensator.values[:, -1], 1.0, rtol=1e-12)

    def test_fbm_decomposition(self):
        ensemble = simulate(FractionalBrownianMotion(0.3), make_grid(5), 100, seed=24, workers=1)
        doob = doob_decompose(ensemble, GAUSSIAN_LINEAR, make_grid(3))
        self.assertLess(doob.reconstruction_error(), 1e-12)
        self.assertLess(float(np.max(martingale_certificate(doob))), 1e-12)

    def test_telescope_paste(self):
        ensemble = simulate(BrownianMotion(drift=1.0), make_grid(6), 200, seed=25, workers=1)
        first = first_passage(ensemble, abs_at_least(0.5))
        second = first_passage(ensemble, abs_at_least(1.0))
        pieces = [
            (first, doob_decompose(stop(ensemble, first), ANALYTIC)),
            (second, doob_decompose(stop(ensemble, second), ANALYTIC)),
        ]
        pasted = telescope_paste(pieces)
        direct = doob_decompose(stop(ensemble, second), ANALYTIC)
        np.testing.assert_allclose(pasted.martingale.values, direct.martingale.values, atol=1e-12)
        np.testing.assert_allclose(pasted.compensator.values, direct.compensator.values, atol=1e-12)
        self.assertLess(pasted.reconstruction_error(), 1e-12)

    def test_telescope_paste_validation(self):
        ensemble = simulate(BrownianMotion(), make_grid(4), 10, seed=0, workers=1)
        with self.assertRaises(StructuralError):
            telescope_paste([])
        late = StoppingTimeVector.constant(ensemble.grid, 10, 12)
        early = StoppingTimeVector.constant(ensemble.grid, 10, 4)
        doob = doob_decompose(ensemble, ANALYTIC)
        with self.assertRaises(StructuralError):
            telescope_paste([(late, doob), (early, doob)])


if __name__ == "__main__":
    unittest.main()

"""Unit tests for grids, process models, ensembles and stopping times."""

import unittest

import numpy as np

from grid_paths import (
    BoundedTruncation,
    BrownianMotion,
    CompensatedPoisson,
    DeterministicFunction,
    DomainError,
    FbmSynthesizer,
    FractionalBrownianMotion,
    GridResourceError,
    OrnsteinUhlenbeck,
    PathEnsemble,
    SquaredBrownian,
    StoppingTimeVector,
    StructuralError,
    abs_at_least,
    at_index,
    fbm_covariance,
    fgn_autocovariance,
    first_passage,
    localize_bounded,
    make_grid,
    minimum,
    model_from_dict,
    never,
    rho_plus,
    simulate,
    split_large_jumps,
    stop,
)


def hand_ensemble(rows, model=None):
    values = np.asarray(rows, dtype=np.float64)
    level = int(np.log2(values.shape[1] - 1))
    return PathEnsemble(make_grid(level), values, model or BrownianMotion(), seed=0)


class TestDyadicGrid(unittest.TestCase):
    """Test cases for DyadicGrid."""

    def test_points(self):
        grid = make_grid(3)
        self.assertEqual(grid.n_steps, 8)
        self.assertEqual(grid.n_points, 9)
        self.assertEqual(grid.infinity, 9)
        self.assertEqual(grid.times[-1], 1.0)
        self.assertEqual(grid.dt, 0.125)

    def test_cap(self):
        with self.assertRaises(GridResourceError):
            make_grid(21)
        with self.assertRaises(GridResourceError):
            make_grid(-1)
        self.assertEqual(make_grid(12, cap=12).level, 12)

    def test_stride(self):
        fine, coarse = make_grid(5), make_grid(2)
        self.assertEqual(fine.stride(coarse), 8)
        np.testing.assert_array_equal(fine.coarse_indices(coarse), [0, 8, 16, 24, 32])
        with self.assertRaises(StructuralError):
            coarse.stride(fine)


class TestFractionalBrownianMotion(unittest.TestCase):
    """Test cases for the fBm covariance and synthesis."""

    def test_brownian_noise_is_white(self):
        np.testing.assert_allclose(fgn_autocovariance(0.5, [0, 1, 2, 5]), [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_covariance_diagonal(self):
        t = np.array([0.25, 0.5, 1.0])
        np.testing.assert_allclose(fbm_covariance(0.7, t, t), t ** 1.4)

    def test_hurst_domain(self):
        with self.assertRaises(DomainError):
            FractionalBrownianMotion(1.0)
        with self.assertRaises(DomainError):
            FractionalBrownianMotion(0.0)

    def test_method_selection(self):
        self.assertEqual(FbmSynthesizer(0.75, 256).method, "circulant")
        self.assertEqual(FbmSynthesizer(0.75, 4).method, "cholesky")
        self.assertEqual(FbmSynthesizer(0.3, 64, method="cholesky").method, "cholesky")
        with self.assertRaises(DomainError):
            FbmSynthesizer(0.3, 64, method="hosking")

    def test_marginal_and_increment_statistics(self):
        hurst = 0.75
        ensemble = simulate(FractionalBrownianMotion(hurst), make_grid(6), 4000, seed=11, workers=1)
        self.assertEqual(ensemble.synthesis_method, "circulant")
        np.testing.assert_array_equal(ensemble.initial, 0.0)
        self.assertAlmostEqual(float(np.var(ensemble.terminal)), 1.0, delta=0.1)

        noise = ensemble.increments * 2 ** (6 * hurst)
        lag_one = float(np.mean(noise[:, :-1] * noise[:, 1:]))
        self.assertAlmostEqual(lag_one, fgn_autocovariance(hurst, 1), delta=0.05)

    def test_cholesky_matches_circulant_in_law(self):
        grid = make_grid(5)
        circulant = simulate(FractionalBrownianMotion(0.3, "circulant"), grid, 3000, seed=2, workers=1)
        cholesky = simulate(FractionalBrownianMotion(0.3, "cholesky"), grid, 3000, seed=2, workers=1)
        self.assertEqual(cholesky.synthesis_method, "cholesky")
        self.assertAlmostEqual(float(np.var(circulant.values[:, 16])), 0.5 ** 0.6, delta=0.08)
        self.assertAlmostEqual(float(np.var(cholesky.values[:, 16])), 0.5 ** 0.6, delta=0.08)


class TestModels(unittest.TestCase):
    """Test cases for model descriptions and construction errors."""

    def test_describe_round_trip(self):
        models = [
            BrownianMotion(drift=0.5, volatility=2.0, initial_value=1.0),
            FractionalBrownianMotion(0.25),
            CompensatedPoisson(3.0),
            SquaredBrownian(),
            OrnsteinUhlenbeck(2.0, 0.5, 1.0),
            DeterministicFunction.named("sine", 6),
            DeterministicFunction([0.0, 1.0, 0.5]),
            BoundedTruncation(BrownianMotion(), 2.0),
        ]
        for model in models:
            self.assertEqual(model_from_dict(model.describe()), model)

    def test_invalid_parameters(self):
        with self.assertRaises(DomainError):
            BrownianMotion(volatility=-1.0)
        with self.assertRaises(DomainError):
            CompensatedPoisson(-0.1)
        with self.assertRaises(DomainError):
            DeterministicFunction([0.0, 1.0, 2.0, 3.0])
        with self.assertRaises(DomainError):
            BoundedTruncation(SquaredBrownian(), 1.0)
        with self.assertRaises(DomainError):
            BoundedTruncation(BrownianMotion(), 0.0)
        with self.assertRaises(DomainError):
            DeterministicFunction.named("cubic", 4)

    def test_facts(self):
        self.assertFalse(FractionalBrownianMotion(0.75).is_markov)
        self.assertEqual(FractionalBrownianMotion(0.75).exact_oracle, "gaussian-linear")
        self.assertEqual(BoundedTruncation(CompensatedPoisson(1.0), 1.5).known_sup_bound, 1.5)
        self.assertEqual(DeterministicFunction.named("square", 4).known_sup_bound, 1.0)
        self.assertIsNone(BrownianMotion().known_sup_bound)


class TestSimulation(unittest.TestCase):
    """Test cases for simulate and PathEnsemble."""

    def test_reproducible_across_workers(self):
        model, grid = OrnsteinUhlenbeck(1.0), make_grid(4)
        single = simulate(model, grid, 2500, seed=7, workers=1)
        threaded = simulate(model, grid, 2500, seed=7, workers=4)
        np.testing.assert_array_equal(single.values, threaded.values)
        other = simulate(model, grid, 2500, seed=8, workers=1)
        self.assertFalse(np.array_equal(single.values, other.values))

    def test_paths_do_not_depend_on_ensemble_size(self):
        model, grid = FractionalBrownianMotion(0.6), make_grid(5)
        small = simulate(model, grid, 300, seed=3, workers=1)
        large = simulate(model, grid, 1500, seed=3, workers=2)
        np.testing.assert_array_equal(small.values, large.values[:300])

    def test_brownian_moments(self):
        ensemble = simulate(BrownianMotion(drift=1.0), make_grid(5), 5000, seed=1, workers=1)
        terminal = ensemble.terminal
        stderr = np.std(terminal) / np.sqrt(terminal.size)
        self.assertLess(abs(np.mean(terminal) - 1.0), 3 * stderr)
        self.assertAlmostEqual(float(np.var(terminal)), 1.0, delta=0.1)

    def test_deterministic_rows_are_constant(self):
        model = DeterministicFunction.named("square", 6)
        ensemble = simulate(model, make_grid(4), 10, seed=0)
        np.testing.assert_array_equal(ensemble.values, np.tile(make_grid(4).times ** 2, (10, 1)))
        with self.assertRaises(DomainError):
            simulate(model, make_grid(7), 10, seed=0)

    def test_squared_brownian_history(self):
        ensemble = simulate(SquaredBrownian(), make_grid(4), 50, seed=5, workers=1)
        np.testing.assert_array_equal(ensemble.values, ensemble.history ** 2)

    def test_truncation_keeps_inner_history(self):
        ensemble = simulate(BoundedTruncation(BrownianMotion(), 0.5), make_grid(5), 400, seed=4, workers=1)
        self.assertLessEqual(ensemble.empirical_sup(), 0.5)
        np.testing.assert_array_equal(ensemble.values, np.clip(ensemble.history, -0.5, 0.5))
        self.assertGreater(float(np.max(np.abs(ensemble.history))), 0.5)
        self.assertEqual(ensemble.sup_bound(), (0.5, True))

    def test_ensemble_validation(self):
        grid = make_grid(2)
        with self.assertRaises(StructuralError):
            PathEnsemble(grid, np.zeros((3, 4)), BrownianMotion(), seed=0)
        with self.assertRaises(DomainError):
            PathEnsemble(grid, np.full((3, 5), np.nan), BrownianMotion(), seed=0)
        ensemble = PathEnsemble(grid, np.zeros((3, 5)), BrownianMotion(), seed=0)
        with self.assertRaises(ValueError):
            ensemble.values[0, 0] = 1.0
        with self.assertRaises(DomainError):
            simulate(BrownianMotion(), grid, 10, seed=-1)
        with self.assertRaises(DomainError):
            simulate(BrownianMotion(), grid, 0, seed=1)

    def test_metadata(self):
        ensemble = simulate(CompensatedPoisson(2.0), make_grid(3), 20, seed=9)
        self.assertEqual(
            ensemble.metadata(),
            {"model": {"kind": "compensated_poisson", "rate": 2.0}, "seed": 9, "grid_level": 3,
             "n_paths": 20, "synthesis_method": "direct"},
        )

    def assert_split(self, ensemble, threshold):
        jumps, residual = split_large_jumps(ensemble, threshold)
        scale = np.maximum.reduce([np.abs(ensemble.values), np.abs(jumps.values), np.abs(residual.values)])
        gap = np.abs(jumps.values + residual.values - ensemble.values)
        self.assertTrue(np.all(gap <= 4 * np.spacing(scale)))
        steps = np.diff(jumps.values, axis=1)
        self.assertTrue(np.all((steps == 0) | (np.abs(steps) >= threshold)))
        self.assertTrue(np.all(np.abs(np.diff(residual.values, axis=1)) < threshold))
        return jumps, residual

    def test_split_large_jumps(self):
        ensemble = simulate(CompensatedPoisson(5.0), make_grid(6), 200, seed=12, workers=1)
        jumps, _ = self.assert_split(ensemble, 0.5)
        self.assertEqual(jumps.label, "J")
        with self.assertRaises(DomainError):
            split_large_jumps(ensemble, 0.0)

    def test_split_continuous_paths(self):
        ensemble = simulate(BrownianMotion(volatility=3.0), make_grid(10), 2000, seed=14, workers=1)
        jumps, _ = self.assert_split(ensemble, 0.2)
        self.assertGreater(np.count_nonzero(np.diff(jumps.values, axis=1)), 0)


class TestStoppingTimes(unittest.TestCase):
    """Test cases for first passage times and stopping."""

    def setUp(self):
        self.ensemble = hand_ensemble([
            [0.0, 1.0, 2.0, 3.0, 4.0],
            [0.0, -1.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
        ])

    def test_first_passage(self):
        rho = first_passage(self.ensemble, abs_at_least(2.0))
        np.testing.assert_array_equal(rho.indices, [2, 5, 5])
        self.assertEqual(rho.to_list(), [2, "inf", "inf"])
        self.assertAlmostEqual(rho.fraction_infinite, 2 / 3)

    def test_prefix_predicate_agrees_with_pointwise(self):
        generic = first_passage(self.ensemble, lambda prefix, i: np.abs(prefix[:, -1]) >= 1.0)
        vectorised = first_passage(self.ensemble, abs_at_least(1.0))
        self.assertEqual(generic, vectorised)
        running_drop = first_passage(self.ensemble, lambda prefix, i: prefix.min(axis=1) <= -1.0)
        np.testing.assert_array_equal(running_drop.indices, [5, 1, 5])

    def test_decisions_depend_only_on_the_past(self):
        rng = np.random.default_rng(19)
        base = simulate(BrownianMotion(), make_grid(5), 12, seed=21, workers=1).values

        def running_range(prefix, i):
            return prefix.max(axis=1) - prefix.min(axis=1) >= 1.0

        for split in (0, 3, 10, 20, 32):
            values = base.copy()
            values[:, : split + 1] = base[0, : split + 1]
            values[:, split + 1:] = base[0, split] + np.cumsum(rng.normal(scale=0.3, size=(12, 32 - split)), axis=1)
            ensemble = hand_ensemble(values)
            for predicate in (abs_at_least(0.5), running_range):
                rho = first_passage(ensemble, predicate)
                for j in range(split + 1):
                    occurred = rho.indices <= j
                    self.assertTrue(np.all(occurred == occurred[0]), (split, j))

    def test_first_passage_on_coarse_grid(self):
        rho = first_passage(self.ensemble, abs_at_least(1.0), on=make_grid(1))
        np.testing.assert_array_equal(rho.indices, [2, 5, 5])

    def test_constant_times(self):
        np.testing.assert_array_equal(first_passage(self.ensemble, at_index(3)).indices, [3, 3, 3])
        self.assertTrue(np.all(first_passage(self.ensemble, never()).is_infinite))
        self.assertEqual(StoppingTimeVector.constant(make_grid(2), 3, None), first_passage(self.ensemble, never()))

    def test_invalid_indices(self):
        with self.assertRaises(StructuralError):
            StoppingTimeVector(make_grid(2), [0, 6])
        with self.assertRaises(StructuralError):
            StoppingTimeVector(make_grid(2), [-1])

    def test_list_round_trip(self):
        rho = StoppingTimeVector(make_grid(2), [0, 5, 3])
        self.assertEqual(StoppingTimeVector.from_list(make_grid(2), rho.to_list()), rho)
        np.testing.assert_array_equal(rho.times, [0.0, np.inf, 0.75])

    def test_stop(self):
        rho = StoppingTimeVector(make_grid(2), [2, 1, 5])
        stopped = stop(self.ensemble, rho)
        np.testing.assert_array_equal(stopped.values[0], [0, 1, 2, 2, 2])
        np.testing.assert_array_equal(stopped.values[1], [0, -1, -1, -1, -1])
        np.testing.assert_array_equal(stopped.values[2], self.ensemble.values[2])
        np.testing.assert_array_equal(stopped.stopping, [2, 1, 5])
        twice = stop(stopped, rho)
        np.testing.assert_array_equal(twice.values, stopped.values)
        earlier = stop(stopped, StoppingTimeVector(make_grid(2), [1, 5, 5]))
        np.testing.assert_array_equal(earlier.stopping, [1, 1, 5])

    def test_stop_checks_shapes(self):
        with self.assertRaises(StructuralError):
            stop(self.ensemble, StoppingTimeVector(make_grid(3), [0, 0, 0]))
        with self.assertRaises(StructuralError):
            stop(self.ensemble, StoppingTimeVector(make_grid(2), [0, 0]))

    def test_stop_is_idempotent_on_random_paths(self):
        ensemble = simulate(BrownianMotion(), make_grid(6), 300, seed=21, workers=1)
        for level in (0.5, 1.0, 1.5):
            rho = first_passage(ensemble, abs_at_least(level))
            once = stop(ensemble, rho)
            np.testing.assert_array_equal(stop(once, rho).values, once.values)

    def test_rho_plus(self):
        rho = StoppingTimeVector(make_grid(3), [0, 1, 3, 8, 9])
        np.testing.assert_array_equal(rho_plus(rho, make_grid(1)).indices, [0, 4, 4, 8, 9])
        np.testing.assert_array_equal(rho_plus(rho, make_grid(3)).indices, rho.indices)

    def test_minimum(self):
        grid = make_grid(2)
        rho = minimum(StoppingTimeVector(grid, [1, 5, 3]), StoppingTimeVector(grid, [2, 4, 5]))
        np.testing.assert_array_equal(rho.indices, [1, 4, 3])
        with self.assertRaises(StructuralError):
            minimum()

    def test_localize_bounded(self):
        ensemble = simulate(BrownianMotion(), make_grid(7), 500, seed=6, workers=1)
        rho, stopped = localize_bounded(ensemble, 1.0)
        largest_step = float(np.max(np.abs(ensemble.increments)))
        self.assertLessEqual(stopped.empirical_sup(), 1.0 + largest_step)
        hit = ~rho.is_infinite
        self.assertTrue(np.all(np.abs(ensemble.values[hit, rho.indices[hit]]) >= 1.0))
        self.assertTrue(np.all(np.abs(ensemble.values[~hit]) < 1.0))


if __name__ == "__main__":
    unittest.main()

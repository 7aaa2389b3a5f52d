import itertools
import math
import sys
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from core_linalg import DesignMatrix, ModelIndicator, least_squares_fit, saturated_representative
from priors_penalties import HyperParams, PriorSpec, linear_penalty_schedule, penalty_schedule
from selector_exhaustive import (
    BudgetExceededError,
    ModelSizeError,
    criterion,
    enumeration_count,
    log_posterior,
    map_select,
    select_with_schedule,
)


def _all_models(p: int, r: int):
    for k in range(r + 1):
        for idx in itertools.combinations(range(p), k):
            yield ModelIndicator(idx)


class LogPosteriorTests(unittest.TestCase):
    def test_empty_model_is_log_prior(self):
        X = DesignMatrix.from_array(np.random.default_rng(0).standard_normal((8, 3)))
        prior = PriorSpec.geometric(0.4)
        hp = HyperParams(gamma=2.0, sigma_sq=1.0)
        sched = penalty_schedule(3, 3, prior, hp)
        value = log_posterior(X, np.ones(8), ModelIndicator(), prior, hp)
        self.assertAlmostEqual(value, float(sched.log_prior[0]), places=12)

    def test_single_column_odds(self):
        X = DesignMatrix.from_array(np.array([[1.0], [0.0]]))
        y = np.array([2.0, 0.0])
        prior = PriorSpec.uniform()
        hp = HyperParams(gamma=3.0, sigma_sq=1.0)
        ratio = math.exp(
            log_posterior(X, y, ModelIndicator((0,)), prior, hp) - log_posterior(X, y, ModelIndicator(), prior, hp)
        )
        self.assertAlmostEqual(ratio, 0.5 * math.exp(1.5), places=10)
        self.assertAlmostEqual(ratio, 2.2408, places=4)

    def test_log_posterior_is_negated_criterion(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n, p = 12, 5
            X = DesignMatrix.from_array(rng.standard_normal((n, p)))
            y = rng.standard_normal(n) * 3.0
            prior = PriorSpec.geometric(float(rng.uniform(0.1, 0.9)))
            hp = HyperParams(gamma=float(rng.uniform(0.5, 20.0)), sigma_sq=float(rng.uniform(0.2, 3.0)))
            sched = penalty_schedule(p, X.r, prior, hp)
            a = ModelIndicator.of(rng.choice(p, size=2, replace=False).tolist())
            b = ModelIndicator.of(rng.choice(p, size=4, replace=False).tolist())
            diff_post = log_posterior(X, y, a, prior, hp) - log_posterior(X, y, b, prior, hp)
            diff_crit = criterion(X, y, a, sched) - criterion(X, y, b, sched)
            expected = -diff_crit * hp.gamma / (2.0 * hp.sigma_sq * (hp.gamma + 1.0))
            self.assertAlmostEqual(diff_post, expected, delta=1e-9 * max(1.0, abs(expected)))

    def test_oversized_model_rejected(self):
        X = DesignMatrix.from_array(np.random.default_rng(2).standard_normal((3, 5)))
        with self.assertRaises(ModelSizeError):
            log_posterior(X, np.ones(3), ModelIndicator((0, 1, 2, 3)), PriorSpec.uniform(), HyperParams(1.0, 1.0))


class MapSelectTests(unittest.TestCase):
    def test_zero_response_selects_empty(self):
        X = DesignMatrix.from_array(np.random.default_rng(3).standard_normal((10, 5)))
        result = map_select(X, np.zeros(10), PriorSpec.geometric(0.5), HyperParams(3.0, 1.0))
        self.assertEqual(result.model.indices, ())
        self.assertAlmostEqual(result.criterion, result.penalty)

    def test_orthonormal_design_is_hard_thresholding(self):
        rng = np.random.default_rng(4)
        Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        X = DesignMatrix.from_array(Q)
        gamma, sigma_sq, xi = 3.0, 1.0, 0.2
        hp = HyperParams(gamma, sigma_sq)
        threshold = hp.scale * math.log(math.sqrt(1.0 + gamma) * (1.0 - xi) / xi)
        for _ in range(500):
            y = rng.standard_normal(6) * 2.5
            z_sq = (Q.T @ y) ** 2
            result = map_select(X, y, PriorSpec.binomial(xi), hp)
            expected = tuple(int(j) for j in np.flatnonzero(z_sq > threshold))
            self.assertEqual(result.model.indices, expected)
            self.assertEqual(result.method, "orthogonal")

    def test_matches_posterior_enumeration(self):
        rng = np.random.default_rng(5)
        X = DesignMatrix.from_array(rng.standard_normal((20, 8)))
        beta = np.array([2.0, 0.0, -1.5, 0.0, 0.0, 0.8, 0.0, 0.0])
        y = X.entries @ beta + rng.standard_normal(20)
        prior = PriorSpec.geometric(0.5)
        hp = HyperParams(gamma=8.0, sigma_sq=1.0)
        sched = penalty_schedule(8, X.r, prior, hp)
        best = max(
            _all_models(8, X.r),
            key=lambda M: (log_posterior(X, y, M, prior, hp, schedule=sched), -M.size),
        )
        result = map_select(X, y, prior, hp)
        self.assertEqual(result.model, best)
        self.assertEqual(result.method, "enumeration")

    def test_maximises_log_posterior_across_priors(self):
        rng = np.random.default_rng(11)
        priors = [PriorSpec.geometric(0.5), PriorSpec.binomial(0.3), PriorSpec.uniform()]
        nonempty = 0
        for case in range(200):
            n = int(rng.integers(3, 16))
            p = int(rng.integers(2, 9))
            if case % 10 == 0 and n >= p:
                entries, _ = np.linalg.qr(rng.standard_normal((n, p)))
            else:
                entries = rng.standard_normal((n, p))
            X = DesignMatrix.from_array(entries)
            beta = np.zeros(p)
            beta[rng.choice(p, size=min(2, p), replace=False)] = 3.0
            y = X.entries @ beta + rng.standard_normal(n)
            prior = priors[case % 3]
            hp = HyperParams(gamma=[0.5, 3.0, float(p)][(case // 3) % 3], sigma_sq=1.0)
            sched = penalty_schedule(p, X.r, prior, hp)
            best = max(log_posterior(X, y, M, prior, hp, schedule=sched) for M in _all_models(p, X.r))
            result = map_select(X, y, prior, hp)
            got = log_posterior(X, y, result.model, prior, hp, schedule=sched)
            self.assertGreaterEqual(got, best - 1e-8 * (1.0 + abs(best)), msg=f"case {case}")
            nonempty += result.model.size > 0
        self.assertGreater(nonempty, 100)

    def test_orthonormal_columns_keep_large_coordinates(self):
        X = DesignMatrix.from_array(np.eye(10)[:, :5])
        y = np.zeros(10)
        y[:3] = [8.0, 7.0, 6.0]
        result = map_select(X, y, PriorSpec.geometric(0.5), HyperParams(5.0, 1.0))
        self.assertEqual(result.method, "orthogonal")
        self.assertEqual(result.model.indices, (0, 1, 2))
        self.assertEqual([k for k, _, _ in result.best_by_size], list(range(6)))

    def test_enumeration_beats_empty_model_on_planted_signal(self):
        rng = np.random.default_rng(13)
        X = DesignMatrix.from_array(rng.standard_normal((15, 4)))
        y = X.entries @ np.array([2.0, 0.0, 1.0, 0.0]) + rng.standard_normal(15)
        prior = PriorSpec.geometric(0.5)
        hp = HyperParams(4.0, 1.0)
        sched = penalty_schedule(4, X.r, prior, hp)
        result = map_select(X, y, prior, hp)
        self.assertIn(0, result.model)
        self.assertLess(result.criterion, criterion(X, y, ModelIndicator(), sched))
        self.assertEqual([k for k, _, _ in result.best_by_size][-1], X.r)
        self.assertGreaterEqual(len(result.best_by_size), 2)

    def test_criterion_bookkeeping(self):
        rng = np.random.default_rng(6)
        X = DesignMatrix.from_array(rng.standard_normal((15, 5)))
        y = X.entries[:, 1] * 4.0 + rng.standard_normal(15)
        result = map_select(X, y, PriorSpec.geometric(0.5), HyperParams(5.0, 1.0))
        self.assertAlmostEqual(result.criterion, result.fit.rss + result.penalty, places=10)
        self.assertIn(1, result.model)
        payload = result.to_dict(X)
        self.assertEqual(payload["model"], list(result.model.indices))
        self.assertEqual(payload["selected"], [X.name_of(j) for j in result.model.indices])

    def test_saturated_models_share_fitted_values(self):
        rng = np.random.default_rng(7)
        X = DesignMatrix.from_array(rng.standard_normal((4, 6)))
        y = rng.standard_normal(4)
        self.assertEqual(X.r, 4)
        fits = [least_squares_fit(X, y, ModelIndicator(idx)).fitted for idx in itertools.combinations(range(6), 4)]
        for other in fits[1:]:
            self.assertLessEqual(float(np.linalg.norm(other - fits[0])), 1e-8)

    def test_saturated_representative_reported(self):
        rng = np.random.default_rng(8)
        X = DesignMatrix.from_array(rng.standard_normal((4, 6)))
        y = rng.standard_normal(4) * 10.0
        prior = PriorSpec.table([1e-12, 1e-12, 1e-12, 1e-12, 1.0])
        result = map_select(X, y, prior, HyperParams(100.0, 0.01))
        self.assertTrue(result.saturated)
        self.assertEqual(result.model, saturated_representative(X))
        self.assertEqual(result.models_evaluated, enumeration_count(6, 4))

    def test_linear_schedule_ties_prefer_smaller_model(self):
        x = np.array([1.0, 2.0, 0.0, 1.0])
        A = np.column_stack([x, x, [0.0, 0.0, 1.0, 0.0]])
        X = DesignMatrix.from_array(A)
        y = 3.0 * x
        result = select_with_schedule(X, y, linear_penalty_schedule(3, X.r, 0.01, HyperParams(1.0, 1.0)))
        self.assertEqual(result.model.indices, (0,))

    def test_budget_exceeded_carries_count(self):
        X = DesignMatrix.from_array(np.random.default_rng(9).standard_normal((30, 20)))
        with self.assertRaises(BudgetExceededError) as ctx:
            map_select(X, np.ones(30), PriorSpec.geometric(0.5), HyperParams(1.0, 1.0), budget=100)
        self.assertEqual(ctx.exception.needed, enumeration_count(20, 20))
        self.assertEqual(ctx.exception.budget, 100)

    def test_result_independent_of_workers(self):
        rng = np.random.default_rng(10)
        X = DesignMatrix.from_array(rng.standard_normal((25, 9)))
        y = X.entries[:, [2, 6]] @ np.array([3.0, -3.0]) + rng.standard_normal(25)
        prior = PriorSpec.geometric(0.5)
        hp = HyperParams(9.0, 1.0)
        serial = map_select(X, y, prior, hp, workers=1)
        threaded = map_select(X, y, prior, hp, workers=4)
        self.assertEqual(serial.model, threaded.model)
        self.assertEqual(serial.models_evaluated, threaded.models_evaluated)
        self.assertEqual(serial.criterion, threaded.criterion)

    def test_enumeration_count(self):
        self.assertEqual(enumeration_count(4, 4), 16)
        self.assertEqual(enumeration_count(6, 4), 1 + 6 + 15 + 20 + 1)


if __name__ == "__main__":
    unittest.main()

import itertools
import math
import sys
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from core_linalg import DesignMatrix, ModelIndicator
from priors_penalties import PriorSpec
from risk_simulator import (
    EstimatorSpec,
    ReplicationError,
    RiskReport,
    ScenarioError,
    ScenarioSpec,
    adaptivity_grid,
    bias_sq,
    compare_estimators,
    empirical_risk,
    oracle_risk,
    oracle_search,
    prepare_scenario,
    scenario_beta,
)
from selector_exhaustive import BudgetExceededError


RIC = EstimatorSpec(kind="map", name="RIC", prior_criterion="RIC")
AIC = EstimatorSpec(kind="map", name="AIC", prior_criterion="AIC")
GEOMETRIC = EstimatorSpec(kind="map", name="geometric", prior=PriorSpec.geometric(0.5), gamma=3.0)


def _orthonormal_scenario(p0: int, magnitude: float, replications: int = 200, n: int = 60, **kw) -> ScenarioSpec:
    return ScenarioSpec(
        n=n,
        p=n,
        design_kind="orthonormal",
        p0=p0,
        beta_magnitude=magnitude,
        sigma_sq=1.0,
        replications=replications,
        seed=20240601,
        estimators=kw.pop("estimators", (RIC, AIC, GEOMETRIC)),
        **kw,
    )


class ScenarioTests(unittest.TestCase):
    def test_alternating_beta(self):
        spec = ScenarioSpec(n=10, p=6, design_kind="orthonormal", p0=3, beta_magnitude=2.0, sigma_sq=4.0,
                            replications=2, seed=0)
        np.testing.assert_allclose(scenario_beta(spec), [4.0, -4.0, 4.0, 0.0, 0.0, 0.0])

    def test_validation(self):
        with self.assertRaises(ScenarioError):
            ScenarioSpec(n=5, p=5, design_kind="orthonormal", p0=6, beta_magnitude=1.0, sigma_sq=1.0,
                         replications=5, seed=0)
        with self.assertRaises(ScenarioError):
            ScenarioSpec(n=5, p=5, design_kind="orthonormal", p0=1, beta_magnitude=1.0, sigma_sq=1.0,
                         replications=1, seed=0)
        with self.assertRaises(ScenarioError):
            EstimatorSpec(kind="lasso")
        with self.assertRaises(ScenarioError):
            EstimatorSpec(kind="map")
        with self.assertRaises(ScenarioError):
            EstimatorSpec(kind="lambda", lam=-1.0)
        with self.assertRaises(ScenarioError):
            EstimatorSpec(kind="map", prior_criterion="RIC", lam=math.inf)

    def test_default_names(self):
        self.assertEqual(EstimatorSpec(kind="map", prior=PriorSpec.geometric(0.5)).name, "map:geometric(q=0.5)")
        self.assertEqual(EstimatorSpec(kind="map", prior_criterion="RIC").name, "map:binomial(RIC)")
        self.assertEqual(EstimatorSpec(kind="lambda", criterion="BIC").name, "lambda:BIC")
        self.assertEqual(EstimatorSpec(kind="fixed_model", model=(2, 0)).name, "fixed:{0,2}")

    def test_dict_round_trip(self):
        spec = _orthonormal_scenario(2, 6.0, name="sparse")
        self.assertEqual(ScenarioSpec.from_dict(spec.to_dict()), spec)

    def test_gamma_defaults_to_p(self):
        sched = RIC.schedule(p=40, n=40, r=40, sigma_sq=1.0)
        self.assertEqual(sched.hp.gamma, 40.0)
        self.assertAlmostEqual(sched.pen[3] - sched.pen[2], 2.0 * math.log(40.0), places=9)


class OracleTests(unittest.TestCase):
    def test_zero_beta(self):
        self.assertEqual(oracle_risk(DesignMatrix.from_array(np.eye(4)), np.zeros(4), 1.0), 0.0)

    def test_orthonormal_coordinatewise(self):
        X = DesignMatrix.from_array(np.eye(6))
        beta = np.array([2.0, 0.5, -3.0, 0.0, 0.9, 0.0])
        result = oracle_search(X, beta, 1.0)
        self.assertAlmostEqual(result.risk, 1.0 + 0.25 + 1.0 + 0.81)
        self.assertEqual(result.model.indices, (0, 2))
        self.assertTrue(result.exact)

    def test_small_coefficient_is_excluded(self):
        X = DesignMatrix.from_array(np.eye(3))
        self.assertAlmostEqual(oracle_risk(X, np.array([0.5, 0.0, 0.0]), 1.0), 0.25)

    def test_enumeration_matches_brute_force(self):
        rng = np.random.default_rng(0)
        X = DesignMatrix.from_array(rng.standard_normal((12, 6)))
        beta = np.array([1.2, -0.3, 0.0, 0.8, 0.0, 0.1])
        mu = X.entries @ beta
        brute = min(
            bias_sq(X, mu, ModelIndicator(idx)) + 0.5 * len(idx)
            for k in range(7)
            for idx in itertools.combinations(range(6), k)
        )
        result = oracle_search(X, beta, 0.5)
        self.assertEqual(result.method, "enumeration")
        self.assertAlmostEqual(result.risk, brute, places=10)

    def test_support_restricted_fallback(self):
        rng = np.random.default_rng(1)
        X = DesignMatrix.from_array(rng.standard_normal((18, 22)))
        beta = np.zeros(22)
        beta[[3, 11]] = [2.0, -2.0]
        result = oracle_search(X, beta, 1.0, budget=100)
        self.assertFalse(result.exact)
        self.assertEqual(result.method, "support_restricted")
        support_value = bias_sq(X, X.entries @ beta, ModelIndicator((3, 11))) + 2.0
        self.assertLessEqual(result.risk, support_value + 1e-9)
        with self.assertRaises(BudgetExceededError):
            oracle_search(X, beta, 1.0, budget=100, allow_fallback=False)


class EmpiricalRiskTests(unittest.TestCase):
    def test_fixed_model_risk_identity(self):
        spec = _orthonormal_scenario(3, 2.0, replications=400, n=20)
        prep = prepare_scenario(spec)
        model = ModelIndicator((0, 1))
        risk = empirical_risk(spec, EstimatorSpec(kind="fixed_model", model=model.indices), prep)
        expected = bias_sq(prep.X, prep.mu, model) + spec.sigma_sq * model.size
        self.assertAlmostEqual(expected, 6.0, places=10)
        self.assertLessEqual(abs(risk.mean - expected), 3.0 * risk.stderr)
        self.assertEqual(risk.size_histogram, {2: 400})

    def test_null_estimator_on_null_signal(self):
        spec = _orthonormal_scenario(0, 0.0, replications=10, n=8)
        risk = empirical_risk(spec, EstimatorSpec(kind="null"))
        self.assertEqual(risk.mean, 0.0)
        self.assertEqual(risk.stderr, 0.0)

    def test_ric_recovers_sparse_support(self):
        spec = _orthonormal_scenario(2, 6.0, replications=200, n=40)
        risk = empirical_risk(spec, RIC)
        self.assertGreaterEqual(risk.support_contained, 0.95)

    def test_reproducible_and_partition_free(self):
        spec = _orthonormal_scenario(5, 3.0, replications=40, n=20)
        serial = empirical_risk(spec, GEOMETRIC, workers=1)
        threaded = empirical_risk(spec, GEOMETRIC, workers=4)
        self.assertEqual(serial.losses, threaded.losses)
        again = empirical_risk(spec, GEOMETRIC, workers=1)
        self.assertEqual(serial.losses, again.losses)
        self.assertEqual(serial.size_histogram, again.size_histogram)

    def test_failures_carry_replication_index(self):
        spec = ScenarioSpec(n=20, p=12, design_kind="iid_gaussian", p0=2, beta_magnitude=3.0, sigma_sq=1.0,
                            replications=3, seed=4)
        with self.assertRaises(ReplicationError) as ctx:
            empirical_risk(spec, EstimatorSpec(kind="lambda", criterion="BIC"), budget=10)
        self.assertEqual(ctx.exception.replication, 0)
        self.assertIsInstance(ctx.exception.cause, BudgetExceededError)


class CompareTests(unittest.TestCase):
    def test_sparse_case_favours_ric(self):
        report = compare_estimators(_orthonormal_scenario(2, 6.0))
        ric, aic, geo = report.by_name("RIC"), report.by_name("AIC"), report.by_name("geometric")
        self.assertLess(ric.ci95()[1], aic.ci95()[0])
        self.assertLessEqual(geo.mean, 2.0 * min(ric.mean, aic.mean))
        for item in report.estimators:
            self.assertGreaterEqual(item.mean, report.oracle_risk - 3.0 * item.stderr)
            self.assertTrue(math.isfinite(item.oracle_ratio))
        self.assertLessEqual(geo.oracle_ratio, 50.0)
        self.assertEqual(report.rate_upper, 2.0 * (math.log(30.0) + 1.0))

    def test_dense_case_favours_aic(self):
        report = compare_estimators(_orthonormal_scenario(40, 3.0))
        ric, aic, geo = report.by_name("RIC"), report.by_name("AIC"), report.by_name("geometric")
        self.assertLess(aic.ci95()[1], ric.ci95()[0])
        self.assertLessEqual(geo.mean, 2.0 * min(ric.mean, aic.mean))

    def test_identical_seeds_identical_reports(self):
        spec = _orthonormal_scenario(3, 4.0, replications=30, n=20)
        self.assertEqual(compare_estimators(spec).to_dict(), compare_estimators(spec).to_dict())

    def test_report_round_trip_and_rows(self):
        spec = _orthonormal_scenario(3, 4.0, replications=20, n=20, name="small")
        report = compare_estimators(spec)
        payload = report.to_dict()
        self.assertEqual(RiskReport.from_dict(payload).to_dict(), payload)
        rows = report.to_rows()
        self.assertEqual([r["estimator"] for r in rows], ["RIC", "AIC", "geometric"])
        self.assertEqual(rows[0]["scenario"], "small")

    def test_needs_two_named_estimators(self):
        with self.assertRaises(ScenarioError):
            compare_estimators(_orthonormal_scenario(2, 6.0, estimators=(RIC,)))
        with self.assertRaises(ScenarioError):
            compare_estimators(_orthonormal_scenario(2, 6.0, estimators=(RIC, RIC)))

    def test_correlated_design_with_oracle_model(self):
        spec = ScenarioSpec(
            n=40,
            p=10,
            design_kind="equicorrelated",
            rho=0.5,
            p0=3,
            beta_magnitude=4.0,
            sigma_sq=1.0,
            replications=30,
            seed=11,
            estimators=(
                EstimatorSpec(kind="map", name="geometric", prior=PriorSpec.geometric(0.5)),
                EstimatorSpec(kind="lambda", name="BIC", criterion="BIC"),
                EstimatorSpec(kind="oracle_model", name="oracle"),
            ),
        )
        report = compare_estimators(spec)
        self.assertTrue(report.oracle_exact)
        self.assertIsNotNone(report.rate_lower)
        oracle = report.by_name("oracle")
        self.assertEqual(set(oracle.size_histogram), {report.oracle_model.size})


class AdaptivityTests(unittest.TestCase):
    def test_grid_ratios(self):
        base = _orthonormal_scenario(2, 3.0, replications=40, n=20)
        grid = adaptivity_grid(base, [1, 10])
        self.assertEqual(grid.p0_values, (1, 10))
        self.assertEqual(len(grid.reports), 2)
        for p0 in (1, 10):
            self.assertAlmostEqual(min(grid.ratios[p0].values()), 1.0)
            self.assertEqual(set(grid.ratios[p0]), {"RIC", "AIC", "geometric"})
        self.assertEqual(grid.reports[1].scenario["p0"], 10)
        with self.assertRaises(ScenarioError):
            adaptivity_grid(base, [])

    def test_geometric_prior_within_twice_the_better_fixed_criterion(self):
        geometric = EstimatorSpec(kind="map", name="geometric", prior=PriorSpec.geometric(0.5))
        base = _orthonormal_scenario(2, 6.0, replications=100, n=24, estimators=(RIC, AIC, geometric))
        r = 24
        p0_values = [2, r // 4, r // 2, 2 * r // 3]
        grid = adaptivity_grid(base, p0_values)
        for p0, report in zip(p0_values, grid.reports):
            geo = report.by_name("geometric").mean
            ric, aic = report.by_name("RIC").mean, report.by_name("AIC").mean
            self.assertLessEqual(geo, 2.0 * min(ric, aic), msg=f"p0={p0}")
            self.assertLessEqual(grid.ratios[p0]["geometric"], 2.0)


if __name__ == "__main__":
    unittest.main()

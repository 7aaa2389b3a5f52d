import itertools
import math
import sys
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from core_linalg import DesignMatrix, DimensionError, ModelIndicator
from data_io import build_design
from design_diagnostics import (
    SingularGramError,
    SpectrumCache,
    UndefinedFunctionalError,
    check_assumption_B,
    check_assumption_D,
    classify_design,
    diagnose_report,
    k_prime,
    k_prime_from_tau,
    lambda_matrix,
    rate_bounds,
    sparse_eigs,
    tau_curve,
    tilde_phi,
)


def _equicorrelated(p: int, rho: float, n: int = 0) -> DesignMatrix:
    return DesignMatrix.from_array(build_design("equicorrelated", n or p, p, rho=rho, seed=1))


def _duplicated_pairs(inner: float = 0.999) -> DesignMatrix:
    s = math.sqrt(1.0 - inner * inner)
    A = np.array(
        [
            [1.0, inner, 0.0, 0.0],
            [0.0, s, 0.0, 0.0],
            [0.0, 0.0, 1.0, inner],
            [0.0, 0.0, 0.0, s],
        ]
    )
    return DesignMatrix.from_array(A)


def _brute_tilde(gram: np.ndarray, k: int, inner: int) -> float:
    best = math.inf
    for idx in itertools.combinations(range(gram.shape[0]), k):
        inv = np.linalg.inv(gram[np.ix_(idx, idx)])
        worst = -math.inf
        for kept in itertools.combinations(range(k), k - inner):
            worst = max(worst, float(np.linalg.eigvalsh(inv[np.ix_(kept, kept)])[0]))
        best = min(best, worst)
    return best


class SparseEigsTests(unittest.TestCase):
    def test_identity(self):
        X = DesignMatrix.from_array(np.eye(6))
        for k in range(1, 7):
            spec = sparse_eigs(X, k)
            self.assertEqual((spec.phi_min, spec.phi_max, spec.tau), (1.0, 1.0, 1.0))
            self.assertTrue(spec.exact)

    def test_equicorrelated_closed_form(self):
        rho = 0.5
        X = _equicorrelated(8, rho, n=10)
        for k in (1, 2, 4, 6):
            spec = sparse_eigs(X, k)
            self.assertTrue(spec.exact)
            self.assertEqual(spec.subsets_evaluated, math.comb(8, k))
            self.assertAlmostEqual(spec.phi_max, 1.0 + (k - 1) * rho, places=8)
            if k > 1:
                self.assertAlmostEqual(spec.phi_min, 1.0 - rho, places=8)
        self.assertAlmostEqual(sparse_eigs(X, 4).tau, 0.2, places=8)

    def test_duplicated_pair(self):
        x = np.array([1.0, 2.0, -1.0])
        X = DesignMatrix.from_array(np.column_stack([x, x, [0.0, 1.0, 2.0]]))
        spec = sparse_eigs(X, 2)
        self.assertEqual(spec.phi_min, 0.0)
        self.assertEqual(spec.tau, 0.0)

    def test_k_out_of_range(self):
        with self.assertRaises(DimensionError):
            sparse_eigs(DesignMatrix.from_array(np.eye(3)), 4)

    def test_budgeted_search_is_direction_sound(self):
        rng = np.random.default_rng(3)
        X = DesignMatrix.from_array(rng.standard_normal((15, 10)))
        exact = sparse_eigs(X, 4)
        approx = sparse_eigs(X, 4, budget=60, seed=9)
        self.assertFalse(approx.exact)
        self.assertGreaterEqual(approx.phi_min, exact.phi_min - 1e-12)
        self.assertLessEqual(approx.phi_max, exact.phi_max + 1e-12)
        again = sparse_eigs(X, 4, budget=60, seed=9)
        self.assertEqual(approx, again)

    def test_exact_monotonicity(self):
        rng = np.random.default_rng(4)
        X = DesignMatrix.from_array(rng.standard_normal((12, 8)))
        curve = tau_curve(X, 8)
        for a, b in zip(curve, curve[1:]):
            self.assertLessEqual(b.tau, a.tau + 1e-12)
            self.assertLessEqual(b.phi_min, a.phi_min + 1e-12)
            self.assertGreaterEqual(b.phi_max, a.phi_max - 1e-12)


class TauCurveTests(unittest.TestCase):
    def test_orthonormal_curve_is_one(self):
        curve = tau_curve(DesignMatrix.from_array(np.eye(5)), 5)
        self.assertEqual([s.tau for s in curve], [1.0] * 5)

    def test_sizes_above_rank_repeat(self):
        rng = np.random.default_rng(5)
        X = DesignMatrix.from_array(rng.standard_normal((3, 5)))
        curve = tau_curve(X, 5)
        self.assertEqual([s.k for s in curve], [1, 2, 3, 4, 5])
        self.assertEqual(curve[3].tau, curve[2].tau)
        self.assertEqual(curve[4].phi_min, curve[2].phi_min)

    def test_cache_reuses_spectra(self):
        X = _equicorrelated(6, 0.3)
        cache = SpectrumCache(X)
        self.assertIs(cache.get(3), cache.get(3))


class KPrimeTests(unittest.TestCase):
    def test_ceiling_rule(self):
        self.assertEqual(k_prime_from_tau(1.0, 7), 7)
        self.assertEqual(k_prime_from_tau(0.3, 10), 3)
        self.assertEqual(k_prime_from_tau(0.01, 10), 1)
        self.assertEqual(k_prime_from_tau(0.0, 4), 1)

    def test_needs_room_for_2k(self):
        with self.assertRaises(DimensionError):
            k_prime(DesignMatrix.from_array(np.eye(5)), 3)

    def test_from_design(self):
        X = _equicorrelated(8, 0.5)
        self.assertEqual(k_prime(X, 4), math.ceil((0.5 / 4.5) * 4))


class LambdaMatrixTests(unittest.TestCase):
    def test_orthonormal_identity(self):
        X = DesignMatrix.from_array(np.eye(5))
        lam = lambda_matrix(X, ModelIndicator((0, 2, 4)), ModelIndicator((2,)))
        np.testing.assert_allclose(lam.matrix, np.eye(2))
        self.assertAlmostEqual(lam.min_eig, 1.0)
        self.assertEqual(lam.local_indices, (0, 2))

    def test_two_columns(self):
        rho = 0.6
        A = np.array([[1.0, rho], [0.0, math.sqrt(1 - rho * rho)]])
        lam = lambda_matrix(DesignMatrix.from_array(A), ModelIndicator((0, 1)), ModelIndicator((0,)))
        self.assertEqual(lam.local_indices, (1,))
        self.assertAlmostEqual(lam.min_eig, 1.0 / (1.0 - rho * rho), places=10)

    def test_matches_coefficient_covariance(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((20, 5))
        X = DesignMatrix.from_array(A)
        M = ModelIndicator((0, 1, 3, 4))
        lam = lambda_matrix(X, M, ModelIndicator((1,)))
        sigma_sq = 2.0
        sub = A[:, list(M.indices)]
        noise = rng.standard_normal((20, 10_000)) * math.sqrt(sigma_sq)
        coefs = np.linalg.pinv(sub) @ noise
        rest = coefs[list(lam.local_indices), :]
        empirical = float(np.linalg.eigvalsh(np.cov(rest))[0])
        self.assertLess(abs(empirical - sigma_sq * lam.min_eig) / (sigma_sq * lam.min_eig), 0.05)

    def test_errors(self):
        x = np.array([1.0, 0.0, 1.0])
        X = DesignMatrix.from_array(np.column_stack([x, x, [0.0, 1.0, 0.0]]))
        with self.assertRaises(SingularGramError):
            lambda_matrix(X, ModelIndicator((0, 1)), ModelIndicator((0,)))
        with self.assertRaises(DimensionError):
            lambda_matrix(X, ModelIndicator((0, 2)), ModelIndicator((1,)))
        with self.assertRaises(UndefinedFunctionalError):
            lambda_matrix(X, ModelIndicator((0, 2)), ModelIndicator((0, 2)))


class TildePhiTests(unittest.TestCase):
    def test_orthonormal_is_one(self):
        prof = tilde_phi(DesignMatrix.from_array(np.eye(8)), 3, inner_size=1)
        self.assertEqual(prof.tilde_phi, 1.0)
        self.assertTrue(prof.exact)

    def test_orthonormal_default_is_undefined(self):
        with self.assertRaises(UndefinedFunctionalError) as ctx:
            tilde_phi(DesignMatrix.from_array(np.eye(8)), 3)
        self.assertEqual(ctx.exception.k_prime, 3)

    def test_duplicated_pairs_match_enumeration(self):
        X = _duplicated_pairs()
        prof = tilde_phi(X, 2)
        self.assertEqual(prof.k_prime, 1)
        self.assertTrue(prof.exact)
        expected = _brute_tilde(np.asarray(X.gram), 2, 1)
        self.assertAlmostEqual(prof.tilde_phi, expected, places=8)
        self.assertLessEqual(sparse_eigs(X, 4).phi_min * prof.tilde_phi, 1.0 + 1e-9)

    def test_product_bound_on_random_designs(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            X = DesignMatrix.from_array(rng.standard_normal((12, 8)))
            for k in (2, 3, 4):
                try:
                    prof = tilde_phi(X, k)
                except UndefinedFunctionalError:
                    continue
                self.assertTrue(prof.exact)
                self.assertLessEqual(sparse_eigs(X, 2 * k).phi_min * prof.tilde_phi, 1.0 + 1e-9)


class AssumptionDTests(unittest.TestCase):
    def test_orthonormal_fails_upper_bound(self):
        report = check_assumption_D(DesignMatrix.from_array(np.eye(8)), 1, 2, 0.5, 1.0, 0.5)
        self.assertFalse(report.holds)
        d1 = [c for c in report.conditions if c["condition"] == "D.1"]
        self.assertTrue(all(not c["holds"] for c in d1))
        self.assertTrue(report.notes)

    def test_equicorrelated_holds(self):
        X = _equicorrelated(12, 0.9)
        report = check_assumption_D(X, 2, 2, c1=0.05, c2=2.0, c3=0.5)
        self.assertTrue(report.exact)
        self.assertTrue(report.holds, report.conditions)
        d1 = [c for c in report.conditions if c["condition"] == "D.1"][0]
        self.assertAlmostEqual(d1["value"], 2 * 0.1 / 3.7, places=8)

    def test_deterministic(self):
        X = _equicorrelated(10, 0.7)
        a = check_assumption_D(X, 1, 2, 0.1, 1.0, 0.2).to_dict()
        b = check_assumption_D(X, 1, 2, 0.1, 1.0, 0.2).to_dict()
        self.assertEqual(a, b)

    def test_argument_checks(self):
        X = DesignMatrix.from_array(np.eye(6))
        with self.assertRaises(ValueError):
            check_assumption_D(X, 1, 2, 0.1, 1.0, 1.5)
        with self.assertRaises(DimensionError):
            check_assumption_D(X, 1, 4, 0.1, 1.0, 0.5)


class AssumptionBTests(unittest.TestCase):
    def test_orthonormal_right_side(self):
        X = DesignMatrix.from_array(np.eye(10))
        beta = np.zeros(10)
        beta[3] = 1.0
        report = check_assumption_B(X, beta, c4=1.0)
        row = report.conditions[0]
        self.assertAlmostEqual(row["rhs"], math.log(10.0) + 1.0, places=10)
        self.assertEqual(row["lhs"], 1.0)
        self.assertTrue(report.holds)

    def test_tiny_coefficient_holds(self):
        X = _equicorrelated(8, 0.5)
        beta = np.zeros(8)
        beta[0] = 1e-9
        self.assertTrue(check_assumption_B(X, beta, c4=1e-3).holds)

    def test_large_coefficient_on_collinear_design_fails(self):
        X = _equicorrelated(20, 0.99)
        beta = np.zeros(20)
        beta[0] = 1e3
        beta[1] = -1.0
        report = check_assumption_B(X, beta, c4=1.0)
        self.assertFalse(report.holds)
        self.assertAlmostEqual(report.conditions[0]["rhs"], 0.418, delta=0.01)

    def test_zero_beta(self):
        with self.assertRaises(ValueError):
            check_assumption_B(DesignMatrix.from_array(np.eye(4)), np.zeros(4), 1.0)


class RateAndClassTests(unittest.TestCase):
    def test_sparse_lower_rate(self):
        bounds = rate_bounds(1000, 10, 100, 0.5, None, 1.0)
        self.assertEqual(bounds.branch, "sparse")
        self.assertAlmostEqual(bounds.lower, 0.5 * 10 * (math.log(100) + 1.0), places=10)
        self.assertAlmostEqual(bounds.lower, 28.03, places=2)

    def test_dense_full_rank(self):
        bounds = rate_bounds(5, 5, 5, None, 1.0, 2.0)
        self.assertEqual(bounds.branch, "dense")
        self.assertAlmostEqual(bounds.upper, 10.0)
        self.assertAlmostEqual(bounds.lower, 10.0)

    def test_ratio_bounded_by_tau(self):
        c = 0.4
        for p0 in range(1, 26):
            bounds = rate_bounds(200, p0, 50, c, c, 1.0)
            self.assertGreaterEqual(bounds.lower / bounds.upper, c - 1e-12)

    def test_rate_argument_errors(self):
        with self.assertRaises(ValueError):
            rate_bounds(10, 6, 5, 0.5, 0.5, 1.0)
        with self.assertRaises(ValueError):
            rate_bounds(100, 2, 10, None, 0.5, 1.0)

    def test_classification(self):
        self.assertEqual(classify_design(DesignMatrix.from_array(np.eye(6)), 0.5).label, "nearly-orthogonal")
        x = np.array([1.0, 2.0, 3.0])
        dup = DesignMatrix.from_array(np.column_stack([x, x, [0.0, 1.0, 0.0]]))
        self.assertEqual(dup.r, 2)
        self.assertEqual(classify_design(dup, 0.5).tau_r, 0.0)
        self.assertEqual(classify_design(dup, 0.5).label, "multicollinear")
        cls = classify_design(_equicorrelated(8, 0.5), 0.25)
        self.assertAlmostEqual(cls.tau_r, 0.5 / 4.5, places=8)
        self.assertEqual(cls.label, "multicollinear")
        with self.assertRaises(ValueError):
            classify_design(dup, 0.0)

    def test_report_bundle(self):
        beta = np.zeros(6)
        beta[0] = 2.0
        report = diagnose_report(
            DesignMatrix.from_array(np.eye(6)),
            beta=beta,
            assumption_d={"kappa1": 1, "kappa2": 2, "c1": 0.5, "c2": 1.0, "c3": 0.5},
        )
        self.assertEqual(report["tau_curve"], [1.0] * 6)
        self.assertEqual(report["classification"]["label"], "nearly-orthogonal")
        self.assertIn("assumption_B", report)
        self.assertIn("assumption_D", report)
        self.assertEqual(report["rate_bounds"]["branch"], "sparse")


if __name__ == "__main__":
    unittest.main()

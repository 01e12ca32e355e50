# Copyright (c) 2026, rdv_swarm and Contributors
# See license.txt

import math

import numpy as np

from rdv_swarm.evaluation.metrics.metrics import compute_metrics, position_error
from rdv_swarm.exceptions import DegenerateStatisticsError, DimensionError, ValidationError
from rdv_swarm.tests.utils import RdvSwarmTestCase


def oracle_metrics(y, p):
	n = len(y)
	sq, sq_obs, abs_err, abs_obs, pct = 0.0, 0.0, 0.0, 0.0, 0.0
	for yi, pi in zip(y, p, strict=True):
		sq += (pi - yi) ** 2
		sq_obs += yi**2
		abs_err += abs(pi - yi)
		abs_obs += abs(yi)
		pct += abs(pi - yi) / abs(yi)
	mean = sum(y) / n
	ss_tot = sum((yi - mean) ** 2 for yi in y)
	return {
		"nrmse": math.sqrt(sq / sq_obs),
		"mae": abs_err / n,
		"mape": pct / n,
		"wape": abs_err / abs_obs,
		"r2": 1.0 - sq / ss_tot,
	}


def oracle_distance(a, b):
	total = 0.0
	for ai, bi in zip(a, b, strict=True):
		total += (bi - ai) ** 2
	return math.sqrt(total)


class TestComputeMetrics(RdvSwarmTestCase):
	def test_perfect_predictions(self):
		y = [3.0, 1.0, 4.0, 1.5, 9.0]
		report = compute_metrics(y, y)
		self.assertEqual(
			(report.nrmse, report.mae, report.mape, report.wape, report.r_squared), (0.0, 0.0, 0.0, 0.0, 1.0)
		)
		self.assertEqual(report.n, 5)

	def test_hand_example(self):
		report = compute_metrics([1, 2, 3], [2, 2, 5])
		self.assertAlmostEqual(report.mae, 1.0, places=15)
		self.assertAlmostEqual(report.wape, 0.5, places=15)
		self.assertAlmostEqual(report.mape, (1.0 + 0.0 + 2.0 / 3.0) / 3.0, places=15)
		self.assertAlmostEqual(report.mape, 0.55556, places=5)
		self.assertAlmostEqual(report.nrmse, math.sqrt(5.0 / 14.0), places=15)
		self.assertAlmostEqual(report.nrmse, 0.59761, places=5)
		self.assertAlmostEqual(report.r_squared, -1.5, places=15)
		self.assertAlmostEqual(report.nmse, 5.0 / 14.0, places=15)

	def test_mean_prediction_has_zero_r2(self):
		y = np.array([2.0, 5.0, 11.0, 4.0])
		report = compute_metrics(y, np.full(4, y.mean()))
		self.assertAlmostEqual(report.r_squared, 0.0, places=14)

	def test_zero_observation_makes_mape_undefined(self):
		report = compute_metrics([0.0, 2.0, 3.0], [1.0, 2.0, 3.0])
		self.assertIsNone(report.mape)
		self.assertIn("index 0", report.mape_note)
		self.assertAlmostEqual(report.mae, 1.0 / 3.0, places=15)
		self.assertIsNone(report.as_dict()["mape"])

	def test_errors(self):
		with self.assertRaises(DimensionError):
			compute_metrics([1.0, 2.0], [1.0])
		with self.assertRaises(DegenerateStatisticsError):
			compute_metrics([4.0, 4.0, 4.0], [1.0, 2.0, 3.0])
		with self.assertRaises(ValidationError):
			compute_metrics([1.0], [1.0])

	def test_matches_direct_summation_oracle(self):
		rng = self.rng(21)
		for _ in range(1000):
			n = int(rng.integers(2, 501))
			y = rng.uniform(1.0, 100.0, n) * rng.choice([-1.0, 1.0], n)
			p = y + rng.normal(0.0, 10.0, n)
			report = compute_metrics(y, p)
			expected = oracle_metrics(y, p)
			for key, value in expected.items():
				self.assertAllClose(report.metric(key), value, rtol=1e-12, atol=1e-12)
			self.assertAllClose(position_error(y, p), oracle_distance(y, p), rtol=1e-12)

	def test_wape_identity(self):
		rng = self.rng(22)
		for _ in range(100):
			y = rng.uniform(0.5, 50.0, 30)
			p = rng.uniform(0.5, 50.0, 30)
			report = compute_metrics(y, p)
			self.assertAllClose(report.wape, report.mae * report.n / np.sum(np.abs(y)), rtol=1e-12)

	def test_scale_behaviour(self):
		rng = self.rng(23)
		y = rng.uniform(1.0, 10.0, 40)
		p = y + rng.normal(size=40)
		base = compute_metrics(y, p)
		scaled = compute_metrics(3.5 * y, 3.5 * p)
		self.assertAllClose(scaled.mae, 3.5 * base.mae, rtol=1e-12)
		for key in ("mape", "wape", "nrmse", "r2"):
			self.assertAllClose(scaled.metric(key), base.metric(key), rtol=1e-12, atol=1e-14)
		self.assertAllClose(position_error(3.5 * y, 3.5 * p), 3.5 * position_error(y, p), rtol=1e-12)

	def test_r2_never_exceeds_one(self):
		rng = self.rng(24)
		for _ in range(200):
			y = rng.normal(size=10)
			self.assertLessEqual(compute_metrics(y, rng.normal(size=10) * 5).r_squared, 1.0)

	def test_report_keys(self):
		doc = compute_metrics([1.0, 2.0, 3.0], [1.1, 2.2, 2.9]).as_dict(include_nmse=True)
		self.assertEqual(set(doc), {"nrmse", "mae", "mape", "wape", "r2", "n", "nmse"})


class TestPositionError(RdvSwarmTestCase):
	def test_three_four_five(self):
		self.assertEqual(position_error([0, 0, 0], [3, 4, 0]), 5.0)

	def test_identity(self):
		self.assertEqual(position_error([1.5, -2.0], [1.5, -2.0]), 0.0)

	def test_oracle(self):
		rng = self.rng(25)
		for _ in range(100):
			n = int(rng.integers(1, 20))
			a, b = rng.normal(size=n), rng.normal(size=n)
			self.assertAllClose(position_error(a, b), oracle_distance(a, b), rtol=1e-12)

	def test_metric_axioms(self):
		rng = self.rng(26)
		for _ in range(200):
			a, b, c = rng.normal(size=(3, 4))
			self.assertAllClose(position_error(a, b), position_error(b, a), rtol=1e-15)
			self.assertLessEqual(position_error(a, c), position_error(a, b) + position_error(b, c) + 1e-12)

	def test_literal_form(self):
		self.assertAlmostEqual(position_error([0, 0, 0], [3, 4, 0], literal=True), math.sqrt(7.0), places=15)
		with self.assertRaises(ValidationError):
			position_error([3, 4, 0], [0, 0, 0], literal=True)

	def test_length_mismatch(self):
		with self.assertRaises(DimensionError):
			position_error([1.0, 2.0], [1.0])

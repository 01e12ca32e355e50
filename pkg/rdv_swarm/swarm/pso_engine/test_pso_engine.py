# Copyright (c) 2026, rdv_swarm and Contributors
# See license.txt

import math
import os
import tempfile

import numpy as np
import pandas as pd

from rdv_swarm.exceptions import ObjectiveError, ValidationError
from rdv_swarm.forecasting.nar_net.nar_net import NarNetwork
from rdv_swarm.forecasting.series_io.series_io import LagDataset, Scaler, make_lag_dataset
from rdv_swarm.swarm.inertia_rdv.inertia_rdv import ConstantInertia, LinearDecreasingInertia, RdvInertia
from rdv_swarm.swarm.pso_engine.pso_engine import (
	PsoConfig,
	forecast_fitness,
	run_pso,
	update_position,
	update_velocity,
)
from rdv_swarm.tests.utils import RdvSwarmTestCase


def sphere(x):
	return float(np.sum(np.asarray(x) ** 2))


def reference_pso_without_inertia(config, dim, objective):
	"""Plain velocity rule v + c1 r1 (p - x) + c2 r2 (g - x), same RNG consumption"""
	rng = np.random.default_rng(config.seed)
	x = rng.uniform(*config.init_position_range, size=(config.swarm_size, dim))
	v = rng.uniform(*config.init_velocity_range, size=(config.swarm_size, dim))
	fit = np.array([objective(p) for p in x])
	pbest, pfit = x.copy(), fit.copy()
	g = int(np.argmin(pfit))
	gbest, gfit = pbest[g].copy(), float(pfit[g])
	history = []
	for _t in range(config.max_iterations):
		draws = rng.random((config.swarm_size, 1 + 2 * dim))
		for i in range(config.swarm_size):
			r1, r2 = draws[i, 1 : 1 + dim], draws[i, 1 + dim :]
			v[i] = v[i] + config.c1 * r1 * (pbest[i] - x[i]) + config.c2 * r2 * (gbest - x[i])
			x[i] = np.clip(x[i] + v[i], -config.position_limit, config.position_limit)
			f = objective(x[i])
			if f < pfit[i]:
				pfit[i], pbest[i] = f, x[i]
				if f < gfit:
					gfit, gbest = f, x[i].copy()
		history.append((x.copy(), v.copy(), gfit))
	return gbest, gfit, history


class TestUpdateRules(RdvSwarmTestCase):
	def test_velocity_momentum_only(self):
		self.assertEqual(update_velocity(2.5, 1.0, 3.0, -4.0, 1.0, 0.0, 0.0, 0.3, 0.9), 2.5)

	def test_velocity_no_attraction(self):
		self.assertEqual(update_velocity(2.0, 1.5, 1.5, 1.5, 0.7, 2.0, 2.0, 0.4, 0.8), 0.7 * 2.0)

	def test_velocity_arithmetic(self):
		self.assertEqual(update_velocity(2.0, 0.0, 1.0, 3.0, 0.5, 2.0, 2.0, 0.5, 0.5), 5.0)

	def test_position(self):
		self.assertEqual(update_position(1.0, 2.0, 10.0), 3.0)
		self.assertEqual(update_position(9.0, 5.0, 10.0), 10.0)
		self.assertEqual(update_position(-9.0, -5.0, 10.0), -10.0)


class TestPsoConfig(RdvSwarmTestCase):
	def test_defaults(self):
		cfg = PsoConfig()
		self.assertEqual((cfg.swarm_size, cfg.c1, cfg.c2, cfg.max_iterations, cfg.position_limit), (30, 2.0, 2.0, 100, 10.0))
		self.assertEqual(cfg.init_position_range, (-1.0, 1.0))
		self.assertEqual(cfg.init_velocity_range, (-0.1, 0.1))

	def test_invalid(self):
		for bad in (
			PsoConfig(swarm_size=0),
			PsoConfig(init_position_range=(1.0, -1.0)),
			PsoConfig(position_limit=0.5),
			PsoConfig(c1=-1.0),
			PsoConfig(inertia_scope="epoch"),
		):
			with self.assertRaises(ValidationError):
				bad.validate()


class TestRunPso(RdvSwarmTestCase):
	def test_single_drift_step(self):
		cfg = PsoConfig(swarm_size=8, max_iterations=1, c1=0.0, c2=0.0, seed=3)
		result = run_pso(cfg, 3, sphere, ConstantInertia(1.0))
		rng = np.random.default_rng(3)
		x = rng.uniform(-1.0, 1.0, size=(8, 3))
		v = rng.uniform(-0.1, 0.1, size=(8, 3))
		candidates = [sphere(p) for p in x] + [sphere(np.clip(p + q, -10, 10)) for p, q in zip(x, v, strict=True)]
		self.assertEqual(result.gbest_fitness, min(candidates))
		self.assertEqual(result.iterations_run, 1)
		self.assertEqual(len(result.trace), 1)

	def test_determinism(self):
		cfg = PsoConfig(swarm_size=12, max_iterations=40, seed=99)
		first = run_pso(cfg, 4, sphere, RdvInertia(0.4, 0.9))
		second = run_pso(cfg, 4, sphere, RdvInertia(0.4, 0.9))
		self.assertArrayEqual(first.gbest_position, second.gbest_position)
		self.assertEqual(first.gbest_fitness, second.gbest_fitness)
		self.assertEqual(first.trace.best_fitness, second.trace.best_fitness)
		self.assertEqual(first.trace.mean_abs_velocity, second.trace.mean_abs_velocity)
		self.assertEqual(first.trace.inertia_weight, second.trace.inertia_weight)

	def test_sphere_converges(self):
		cfg = PsoConfig(swarm_size=30, max_iterations=200, seed=42)
		result = run_pso(cfg, 2, sphere, RdvInertia(0.4, 0.9))
		self.assertLess(result.gbest_fitness, 1e-3)

	def test_invariants(self):
		cfg = PsoConfig(swarm_size=15, max_iterations=60, seed=7, position_limit=2.0)
		seen = []

		def check(t, swarm):
			self.assertTrue(np.all(np.abs(swarm.positions) <= 2.0))
			self.assertTrue(np.all(swarm.pbest_fitness <= swarm.fitness))
			for i, particle in enumerate(swarm.particles()):
				self.assertEqual(particle.pbest_fitness, sphere(particle.pbest_position))
				self.assertEqual(particle.fitness, sphere(swarm.positions[i]))
			seen.append(t)

		# w = 1 drives velocities up so the clamp is exercised
		result = run_pso(cfg, 6, sphere, ConstantInertia(1.0), callback=check)
		self.assertEqual(seen, list(range(1, 61)))
		best = result.trace.best_fitness
		self.assertTrue(all(b <= a for a, b in zip(best, best[1:], strict=False)))
		self.assertEqual(result.gbest_fitness, min(best))
		self.assertEqual(result.gbest_fitness, best[-1])
		self.assertEqual(result.gbest_fitness, sphere(result.gbest_position))

	def test_constant_one_matches_plain_velocity_rule(self):
		for seed in range(50):
			cfg = PsoConfig(swarm_size=10, max_iterations=25, seed=seed)
			expected_history = []

			def capture(t, swarm):
				expected_history.append((swarm.positions.copy(), swarm.velocities.copy()))

			result = run_pso(cfg, 5, sphere, ConstantInertia(1.0), callback=capture)
			gbest, gfit, history = reference_pso_without_inertia(cfg, 5, sphere)
			self.assertArrayEqual(result.gbest_position, gbest)
			self.assertEqual(result.gbest_fitness, gfit)
			for (x, v), (ref_x, ref_v, ref_g) in zip(expected_history, history, strict=True):
				self.assertArrayEqual(x, ref_x)
				self.assertArrayEqual(v, ref_v)

	def test_per_iteration_scope(self):
		cfg = PsoConfig(swarm_size=10, max_iterations=50, seed=1, inertia_scope="iteration")
		result = run_pso(cfg, 3, sphere, RdvInertia(0.4, 0.9))
		self.assertLessEqual(result.damping_events, 50)
		weights = result.trace.inertia_weight
		self.assertTrue(all(b <= a for a, b in zip(weights, weights[1:], strict=False)))

	def test_linear_trace_weights(self):
		cfg = PsoConfig(swarm_size=5, max_iterations=10, seed=1)
		result = run_pso(cfg, 2, sphere, LinearDecreasingInertia(0.9, 0.4))
		self.assertAlmostEqual(result.trace.inertia_weight[-1], 0.4, places=15)

	def test_non_finite_objective_aborts(self):
		cfg = PsoConfig(swarm_size=20, max_iterations=5, seed=0)

		def broken(x):
			return math.nan if x[0] > 0.0 else sphere(x)

		with self.assertRaisesRegex(ObjectiveError, "particle"):
			run_pso(cfg, 2, broken, ConstantInertia(1.0))
		result = run_pso(cfg, 2, broken, ConstantInertia(1.0), objective_total=False)
		self.assertTrue(math.isfinite(result.gbest_fitness))

	def test_trace_csv(self):
		cfg = PsoConfig(swarm_size=5, max_iterations=7, seed=2)
		result = run_pso(cfg, 2, sphere, RdvInertia())
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "trace.csv")
			result.trace.to_csv(path)
			frame = pd.read_csv(path, float_precision="round_trip")
		self.assertEqual(list(frame.columns), ["iteration", "best_fitness", "mean_abs_velocity", "inertia_weight"])
		self.assertEqual(list(frame["iteration"]), list(range(1, 8)))
		self.assertEqual(list(frame["best_fitness"]), result.trace.best_fitness)


class TestForecastFitness(RdvSwarmTestCase):
	def test_perfect_fit(self):
		values = np.arange(10.0)
		scaler = Scaler(0.0, 9.0)
		net = NarNetwork(1, (), "identity", "identity")
		fitness = forecast_fitness(net, scaler, make_lag_dataset(values, 1))
		self.assertAlmostEqual(fitness(np.array([1.0, -1.0 / 9.0])), 0.0, places=12)

	def test_three_four_five(self):
		dataset = LagDataset(np.array([[1.0], [2.0]]), np.array([3.0, 4.0]), 1)
		fitness = forecast_fitness(NarNetwork(1, (), "identity", "identity"), Scaler(0.0, 1.0), dataset)
		self.assertEqual(fitness(np.zeros(2)), 5.0)

	def test_norm_oracle(self):
		rng = self.rng(31)
		for _ in range(100):
			n = int(rng.integers(1, 40))
			targets = rng.normal(size=n)
			dataset = LagDataset(rng.normal(size=(n, 2)), targets, 2)
			fitness = forecast_fitness(NarNetwork(2, (), "identity", "identity"), Scaler(0.0, 1.0), dataset)
			expected = math.sqrt(sum(t * t for t in targets))
			self.assertAllClose(fitness(np.zeros(3)), expected, rtol=1e-12)

	def test_overflow_is_worst(self):
		dataset = LagDataset(np.array([[1e300], [2e300]]), np.array([1.0, 2.0]), 1)
		fitness = forecast_fitness(NarNetwork(1, (), "identity", "identity"), Scaler(0.0, 1.0), dataset)
		self.assertEqual(fitness(np.array([1e10, 0.0])), math.inf)

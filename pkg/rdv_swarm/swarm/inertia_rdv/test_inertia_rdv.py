# Copyright (c) 2026, rdv_swarm and Contributors
# See license.txt

import math

import numpy as np

from rdv_swarm.exceptions import ValidationError
from rdv_swarm.swarm.inertia_rdv.inertia_rdv import (
	ConstantInertia,
	LinearDecreasingInertia,
	RandomInertia,
	RdvInertia,
	RdvState,
	baseline_weight,
	build_strategy,
	delta_at,
	rdv_weight,
	strategy_from_dict,
)
from rdv_swarm.tests.utils import RdvSwarmTestCase


class TestDelta(RdvSwarmTestCase):
	def test_starts_at_one(self):
		self.assertEqual(delta_at(0, 100), 1.0)

	def test_end_value(self):
		self.assertAlmostEqual(delta_at(100, 100), math.exp(-1.0), places=15)
		self.assertAlmostEqual(delta_at(100, 100), 0.367879, places=6)

	def test_strictly_decreasing(self):
		values = [delta_at(t, 50) for t in range(51)]
		self.assertTrue(all(b < a for a, b in zip(values, values[1:], strict=False)))

	def test_sharpness(self):
		self.assertAlmostEqual(delta_at(100, 100, sharpness=5.0), math.exp(-5.0), places=15)


class TestRdvWeight(RdvSwarmTestCase):
	def test_damped(self):
		# delta(t) = 0.2 needs t = -T ln 0.2
		state = RdvState(0.4, 0.9, 1000)
		t = -1000 * math.log(0.2)
		w, new_state = rdv_weight(state, t, 0.7)
		self.assertAlmostEqual(w, 0.36, places=15)
		self.assertAlmostEqual(new_state.alpha, 0.36, places=15)
		self.assertEqual(state.alpha, 0.4)

	def test_not_damped(self):
		state = RdvState(0.4, 0.9, 1000)
		t = -1000 * math.log(0.9)
		w, new_state = rdv_weight(state, t, 0.5)
		self.assertEqual(w, 0.4)
		self.assertEqual(new_state.alpha, 0.4)

	def test_geometric_product(self):
		state = RdvState(0.4, 0.9, 10)
		for _ in range(3):
			_w, state = rdv_weight(state, 10, 0.99)
		self.assertAlmostEqual(state.alpha, 0.2916, places=12)

	def test_alpha_sequence_non_increasing_and_positive(self):
		rng = self.rng(11)
		schedule = RdvInertia(0.4, 0.9).schedule(100)
		alphas = []
		for t in range(1, 101):
			for _ in range(30):
				alphas.append(schedule.next_weight(t, rng.random()))
		self.assertTrue(all(b <= a for a, b in zip(alphas, alphas[1:], strict=False)))
		self.assertTrue(all(a > 0.0 for a in alphas))
		self.assertLessEqual(schedule.damping_events, schedule.queries)
		self.assertAlmostEqual(schedule.alpha, 0.4 * 0.9**schedule.damping_events, delta=1e-12)

	def test_late_iterations_damp_more(self):
		early, late = 0, 0
		for seed in range(1000):
			rng = np.random.default_rng(seed)
			schedule = RdvInertia(0.4, 0.9).schedule(100)
			for t in range(1, 101):
				before = schedule.damping_events
				schedule.next_weight(t, rng.random())
				fired = schedule.damping_events - before
				if t <= 10:
					early += fired
				elif t > 90:
					late += fired
		self.assertLess(early, late)

	def test_delta_ignores_rng(self):
		self.assertEqual(delta_at(17, 40), delta_at(17, 40))


class TestBaselineWeight(RdvSwarmTestCase):
	def test_constant(self):
		for t in (0, 5, 100):
			self.assertEqual(baseline_weight(ConstantInertia(1.0), t, 100, 0.3), 1.0)

	def test_linear_midpoint(self):
		self.assertAlmostEqual(baseline_weight(LinearDecreasingInertia(0.9, 0.4), 50, 100, 0.0), 0.65, places=15)

	def test_random_passthrough(self):
		self.assertEqual(baseline_weight(RandomInertia(), 3, 100, 0.37), 0.37)

	def test_invalid_linear(self):
		with self.assertRaises(ValidationError):
			baseline_weight(LinearDecreasingInertia(0.4, 0.9), 1, 10, 0.0)

	def test_rdv_is_not_a_baseline(self):
		with self.assertRaises(ValidationError):
			baseline_weight(RdvInertia(), 1, 10, 0.0)


class TestBuildStrategy(RdvSwarmTestCase):
	def test_serialized_form(self):
		self.assertEqual(
			build_strategy("rdv", alpha=0.4, alpha_dump=0.9).as_dict(),
			{"iw": "rdv", "alpha": 0.4, "alpha_dump": 0.9, "decay_sharpness": 1.0},
		)
		self.assertEqual(build_strategy("constant", w=1.0, alpha=0.3).as_dict(), {"iw": "constant", "w": 1.0})

	def test_from_dict(self):
		strategy = LinearDecreasingInertia(0.8, 0.3)
		self.assertEqual(strategy_from_dict(strategy.as_dict()), strategy)

	def test_unknown(self):
		with self.assertRaises(ValidationError):
			build_strategy("chaotic")

	def test_invalid_rdv(self):
		with self.assertRaises(ValidationError):
			build_strategy("rdv", alpha=0.0)

# Copyright (c) 2026, rdv_swarm and contributors
# See license.txt

import unittest

import numpy as np


class RdvSwarmTestCase(unittest.TestCase):
	"""Base class for rdv_swarm tests"""

	def assertAllClose(self, actual, expected, rtol=1e-12, atol=0.0):
		np.testing.assert_allclose(np.asarray(actual, dtype=float), np.asarray(expected, dtype=float), rtol=rtol, atol=atol)

	def assertArrayEqual(self, actual, expected):
		np.testing.assert_array_equal(np.asarray(actual), np.asarray(expected))

	def rng(self, seed=0):
		return np.random.default_rng(seed)

# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

import math
from dataclasses import asdict, dataclass, replace

from rdv_swarm import config, hooks
from rdv_swarm.exceptions import ValidationError
from rdv_swarm.utils import get_attr, throw


def delta_at(iteration, max_iterations, sharpness=config.DECAY_SHARPNESS):
	"""Descending gate: 1 at iteration 0, exp(-sharpness) at max_iterations"""
	return math.exp(-sharpness * iteration / max_iterations)


@dataclass(frozen=True)
class RdvState:
	alpha: float
	alpha_dump: float
	max_iterations: int
	decay_sharpness: float = config.DECAY_SHARPNESS

	def validate(self):
		if not 0.0 < self.alpha <= 1.0:
			throw(f"alpha must be in (0, 1], got {self.alpha}")
		if not 0.0 < self.alpha_dump <= 1.0:
			throw(f"alpha_dump must be in (0, 1], got {self.alpha_dump}")
		if self.max_iterations < 1:
			throw(f"max_iterations must be >= 1, got {self.max_iterations}")
		if self.decay_sharpness <= 0.0:
			throw(f"decay sharpness must be > 0, got {self.decay_sharpness}")


def rdv_weight(state, iteration, rand_draw):
	"""Damp alpha when the gate falls below the draw; the weight is alpha"""
	if delta_at(iteration, state.max_iterations, state.decay_sharpness) < rand_draw:
		state = replace(state, alpha=state.alpha * state.alpha_dump)
	return state.alpha, state


def baseline_weight(strategy, iteration, max_iterations, rand_draw):
	if isinstance(strategy, ConstantInertia):
		return strategy.w
	if isinstance(strategy, LinearDecreasingInertia):
		strategy.validate()
		return strategy.w_max - (strategy.w_max - strategy.w_min) * iteration / max_iterations
	if isinstance(strategy, RandomInertia):
		return rand_draw
	throw(f"{type(strategy).__name__} is not a baseline inertia strategy")


class InertiaStrategy:
	"""Immutable strategy description; `schedule()` makes the run-owned state"""

	kind = None

	def validate(self):
		pass

	def schedule(self, max_iterations):
		self.validate()
		return InertiaSchedule(self, max_iterations)

	def as_dict(self):
		return {"iw": self.kind, **asdict(self)}


@dataclass(frozen=True)
class ConstantInertia(InertiaStrategy):
	kind = "constant"
	w: float = config.CONSTANT_W

	def validate(self):
		if not (math.isfinite(self.w) and self.w > 0.0):
			throw(f"constant inertia weight must be > 0, got {self.w}")


@dataclass(frozen=True)
class LinearDecreasingInertia(InertiaStrategy):
	kind = "linear"
	w_max: float = config.W_MAX
	w_min: float = config.W_MIN

	def validate(self):
		if self.w_min > self.w_max:
			throw(f"w_min ({self.w_min}) must not exceed w_max ({self.w_max})")
		if self.w_min <= 0.0:
			throw(f"w_min must be > 0, got {self.w_min}")


@dataclass(frozen=True)
class RandomInertia(InertiaStrategy):
	kind = "random"


@dataclass(frozen=True)
class RdvInertia(InertiaStrategy):
	kind = "rdv"
	alpha: float = config.ALPHA
	alpha_dump: float = config.ALPHA_DUMP
	decay_sharpness: float = config.DECAY_SHARPNESS

	def validate(self):
		RdvState(self.alpha, self.alpha_dump, 1, self.decay_sharpness).validate()


class InertiaSchedule:
	"""Per-run inertia state. Owned by one run and queried sequentially."""

	def __init__(self, strategy, max_iterations):
		self.strategy = strategy
		self.max_iterations = max_iterations
		self.queries = 0
		self.damping_events = 0
		self.state = None
		if isinstance(strategy, RdvInertia):
			self.state = RdvState(strategy.alpha, strategy.alpha_dump, max_iterations, strategy.decay_sharpness)
			self.state.validate()

	@property
	def alpha(self):
		return self.state.alpha if self.state else None

	def next_weight(self, iteration, rand_draw):
		self.queries += 1
		if self.state is None:
			return baseline_weight(self.strategy, iteration, self.max_iterations, rand_draw)
		w, new_state = rdv_weight(self.state, iteration, rand_draw)
		if new_state is not self.state:
			self.damping_events += 1
		self.state = new_state
		return w


def build_strategy(kind, **params):
	"""Strategy from its CLI name; unknown params for the kind are ignored"""
	if kind not in hooks.inertia_strategies:
		throw(f"Unknown inertia strategy {kind!r}; choose from {sorted(hooks.inertia_strategies)}", ValidationError)
	cls = get_attr(hooks.inertia_strategies[kind])
	fields = cls.__dataclass_fields__
	strategy = cls(**{k: v for k, v in params.items() if k in fields and v is not None})
	strategy.validate()
	return strategy


def strategy_from_dict(doc):
	doc = dict(doc)
	return build_strategy(doc.pop("iw"), **doc)

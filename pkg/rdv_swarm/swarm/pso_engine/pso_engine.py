# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from rdv_swarm import config as defaults
from rdv_swarm.evaluation.metrics.metrics import position_error
from rdv_swarm.exceptions import DataError, DimensionError, ObjectiveError, ValidationError
from rdv_swarm.forecasting.nar_net.nar_net import forward_batch, with_params
from rdv_swarm.utils import throw

logger = logging.getLogger(__name__)

INERTIA_SCOPES = ("particle", "iteration")
TRACE_COLUMNS = ("iteration", "best_fitness", "mean_abs_velocity", "inertia_weight")


@dataclass(frozen=True)
class PsoConfig:
	swarm_size: int = defaults.SWARM_SIZE
	max_iterations: int = defaults.MAX_ITERATIONS
	c1: float = defaults.C1
	c2: float = defaults.C2
	position_limit: float = defaults.POSITION_LIMIT
	init_position_range: tuple = defaults.INIT_POSITION_RANGE
	init_velocity_range: tuple = defaults.INIT_VELOCITY_RANGE
	seed: int = defaults.FALLBACK_SEED
	inertia_scope: str = defaults.INERTIA_SCOPE

	def __post_init__(self):
		object.__setattr__(self, "init_position_range", tuple(float(v) for v in self.init_position_range))
		object.__setattr__(self, "init_velocity_range", tuple(float(v) for v in self.init_velocity_range))

	def validate(self):
		if self.swarm_size < 1:
			throw(f"swarm size must be >= 1, got {self.swarm_size}")
		if self.max_iterations < 1:
			throw(f"max iterations must be >= 1, got {self.max_iterations}")
		if self.c1 < 0 or self.c2 < 0:
			throw(f"acceleration coefficients must be >= 0, got c1={self.c1} c2={self.c2}")
		if not self.position_limit > 0:
			throw(f"position limit must be > 0, got {self.position_limit}")
		for name, (low, high) in (
			("init position", self.init_position_range),
			("init velocity", self.init_velocity_range),
		):
			if not low < high:
				throw(f"{name} range needs low < high, got ({low}, {high})")
		if self.position_limit < self.init_position_range[1]:
			throw(
				f"position limit {self.position_limit} is below the init position upper bound {self.init_position_range[1]}"
			)
		if not 0 <= self.seed < 2**64:
			throw(f"seed must be an unsigned 64-bit integer, got {self.seed}")
		if self.inertia_scope not in INERTIA_SCOPES:
			throw(f"inertia scope must be one of {INERTIA_SCOPES}, got {self.inertia_scope!r}")

	def as_dict(self):
		doc = asdict(self)
		doc["init_position_range"] = list(self.init_position_range)
		doc["init_velocity_range"] = list(self.init_velocity_range)
		return doc


@dataclass
class Particle:
	position: np.ndarray
	velocity: np.ndarray
	pbest_position: np.ndarray
	pbest_fitness: float
	fitness: float


@dataclass
class Swarm:
	"""Array view of all particles, row i = particle i"""

	positions: np.ndarray
	velocities: np.ndarray
	pbest_positions: np.ndarray
	pbest_fitness: np.ndarray
	fitness: np.ndarray

	def particle(self, i):
		return Particle(
			self.positions[i].copy(),
			self.velocities[i].copy(),
			self.pbest_positions[i].copy(),
			float(self.pbest_fitness[i]),
			float(self.fitness[i]),
		)

	def particles(self):
		return [self.particle(i) for i in range(len(self.positions))]


@dataclass
class ConvergenceTrace:
	best_fitness: list = field(default_factory=list)
	mean_abs_velocity: list = field(default_factory=list)
	inertia_weight: list = field(default_factory=list)

	def record(self, best_fitness, mean_abs_velocity, inertia_weight):
		self.best_fitness.append(float(best_fitness))
		self.mean_abs_velocity.append(float(mean_abs_velocity))
		self.inertia_weight.append(float(inertia_weight))

	def __len__(self):
		return len(self.best_fitness)

	def to_frame(self):
		return pd.DataFrame(
			{
				"iteration": np.arange(1, len(self) + 1),
				"best_fitness": self.best_fitness,
				"mean_abs_velocity": self.mean_abs_velocity,
				"inertia_weight": self.inertia_weight,
			},
			columns=list(TRACE_COLUMNS),
		)

	def to_csv(self, path):
		try:
			self.to_frame().to_csv(path, index=False, float_format="%.17g")
		except OSError as e:
			throw(f"Cannot write trace to {path}: {e}", DataError)


@dataclass
class RunResult:
	gbest_position: np.ndarray
	gbest_fitness: float
	trace: ConvergenceTrace
	elapsed_seconds: float
	iterations_run: int
	damping_events: int = 0
	final_inertia: float | None = None

	def summary(self):
		return {
			"gbest_fitness": self.gbest_fitness,
			"iterations_run": self.iterations_run,
			"elapsed_seconds": self.elapsed_seconds,
			"damping_events": self.damping_events,
			"final_inertia": self.final_inertia,
		}


def update_velocity(v, x, pbest, gbest, w, c1, c2, r1, r2):
	return w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)


def update_position(x, v, limit):
	"""x + v clamped to [-limit, +limit]"""
	return np.clip(np.add(x, v), -limit, limit)


def run_pso(config, dim, objective, iw, objective_total=True, callback=None):
	"""Minimize `objective` over R^dim with a global-best swarm.

	Per iteration the RNG block is drawn particle-major: for each particle one gate draw
	(consumed by every inertia strategy, used by rdv and random) and then `dim` values of r1
	followed by `dim` values of r2. With `inertia_scope="iteration"` the gate is drawn once per
	iteration before the block instead. When `objective_total` is False, non-finite values
	mark the position worst-possible instead of aborting.
	"""
	config.validate()
	if int(dim) != dim or dim < 1:
		throw(f"dimension must be >= 1, got {dim}", DimensionError)
	dim = int(dim)
	per_particle = config.inertia_scope == "particle"
	schedule = iw.schedule(config.max_iterations)
	rng = np.random.default_rng(config.seed)
	started = time.perf_counter()

	def evaluate(i, iteration, x):
		value = float(objective(x))
		if not math.isfinite(value):
			if objective_total:
				throw(
					f"Objective returned {value} for particle {i} at iteration {iteration}",
					ObjectiveError,
				)
			return math.inf
		return value

	swarm = Swarm(
		positions=rng.uniform(*config.init_position_range, size=(config.swarm_size, dim)),
		velocities=rng.uniform(*config.init_velocity_range, size=(config.swarm_size, dim)),
		pbest_positions=np.empty((config.swarm_size, dim)),
		pbest_fitness=np.empty(config.swarm_size),
		fitness=np.empty(config.swarm_size),
	)
	for i in range(config.swarm_size):
		swarm.fitness[i] = evaluate(i, 0, swarm.positions[i])
	swarm.pbest_positions[:] = swarm.positions
	swarm.pbest_fitness[:] = swarm.fitness
	g = int(np.argmin(swarm.pbest_fitness))
	gbest = swarm.pbest_positions[g].copy()
	gbest_fitness = float(swarm.pbest_fitness[g])

	logger.debug(
		"PSO start: dim=%d swarm=%d iterations=%d iw=%s seed=%d",
		dim,
		config.swarm_size,
		config.max_iterations,
		iw.as_dict(),
		config.seed,
	)

	trace = ConvergenceTrace()
	offset = 1 if per_particle else 0
	w = None
	for t in range(1, config.max_iterations + 1):
		if not per_particle:
			w = schedule.next_weight(t, rng.random())
		draws = rng.random((config.swarm_size, offset + 2 * dim))
		for i in range(config.swarm_size):
			if per_particle:
				w = schedule.next_weight(t, draws[i, 0])
			r1 = draws[i, offset : offset + dim]
			r2 = draws[i, offset + dim :]
			swarm.velocities[i] = update_velocity(
				swarm.velocities[i],
				swarm.positions[i],
				swarm.pbest_positions[i],
				gbest,
				w,
				config.c1,
				config.c2,
				r1,
				r2,
			)
			swarm.positions[i] = update_position(swarm.positions[i], swarm.velocities[i], config.position_limit)
			fitness = evaluate(i, t, swarm.positions[i])
			swarm.fitness[i] = fitness
			if fitness < swarm.pbest_fitness[i]:
				swarm.pbest_fitness[i] = fitness
				swarm.pbest_positions[i] = swarm.positions[i]
				if fitness < gbest_fitness:
					gbest_fitness = fitness
					gbest = swarm.positions[i].copy()

		trace.record(gbest_fitness, np.mean(np.abs(swarm.velocities)), w)
		if callback is not None:
			callback(t, swarm)

	elapsed = time.perf_counter() - started
	logger.debug("PSO finished: gbest=%.9g after %d iterations in %.3fs", gbest_fitness, len(trace), elapsed)
	return RunResult(
		gbest_position=gbest,
		gbest_fitness=gbest_fitness,
		trace=trace,
		elapsed_seconds=elapsed,
		iterations_run=len(trace),
		damping_events=schedule.damping_events,
		final_inertia=w,
	)


class ForecastFitness:
	"""Position error of one-step predictions over the lag rows, in normalized space.

	Non-finite predictions (and a negative radicand in the literal form) score +inf so
	the candidate is never selected as a personal best.
	"""

	def __init__(self, net_template, scaler, lag_dataset, literal=False):
		if len(lag_dataset) == 0:
			throw("Forecast fitness needs at least one lag row", DataError)
		if lag_dataset.m != net_template.m:
			throw(
				f"Lag dataset has {lag_dataset.m} lags but the network expects {net_template.m}", DimensionError
			)
		self.net_template = net_template
		self.scaler = scaler
		self.dataset = lag_dataset.normalized(scaler)
		self.literal = literal

	@property
	def dim(self):
		return self.net_template.dim

	def predict(self, flat):
		with np.errstate(over="ignore", invalid="ignore"):
			return forward_batch(with_params(self.net_template, flat), self.dataset.inputs)

	def __call__(self, flat):
		predictions = self.predict(flat)
		if not np.all(np.isfinite(predictions)):
			return math.inf
		try:
			return position_error(predictions, self.dataset.targets, literal=self.literal)
		except ValidationError:
			return math.inf


def forecast_fitness(net_template, scaler, lag_dataset, literal=False):
	return ForecastFitness(net_template, scaler, lag_dataset, literal)

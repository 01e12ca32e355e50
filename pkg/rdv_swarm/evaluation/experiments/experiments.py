# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

"""Runnable experiment protocols: the (alpha, alpha_dump) grid sweep, paired variant
comparison with significance tests, benchmark objectives and velocity stabilization."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from rdv_swarm import config, hooks
from rdv_swarm.evaluation.stats_tests.stats_tests import improvement_pct, paired_t_test, summarize_runs
from rdv_swarm.exceptions import (
	DataError,
	DegenerateStatisticsError,
	DimensionError,
	ObjectiveError,
	RdvSwarmError,
	ValidationError,
)
from rdv_swarm.swarm.inertia_rdv.inertia_rdv import RdvInertia
from rdv_swarm.swarm.pso_engine.pso_engine import PsoConfig, run_pso
from rdv_swarm.utils import derive_seed, get_attr, log_error, rounded, throw

logger = logging.getLogger(__name__)

AGGREGATES = ("mean", "min")
SWEEP_COLUMNS = ("alpha", "alpha_dump", "mean_pe", "best_pe", "runs")
CONVERGENCE_KEYS = ("pe", "elapsed_seconds", "stabilization_iteration")
GRID_TOLERANCE = 1e-9


# Benchmark objectives
# ------------------------------


def sphere(x):
	x = np.asarray(x, dtype=np.float64)
	return float(np.sum(x * x))


def rastrigin(x):
	x = np.asarray(x, dtype=np.float64)
	return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x):
	x = np.asarray(x, dtype=np.float64)
	return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def benchmark_objective(name, dim):
	if name not in hooks.benchmark_functions:
		throw(f"Unknown benchmark function {name!r}; choose from {sorted(hooks.benchmark_functions)}")
	path, min_dim = hooks.benchmark_functions[name]
	if int(dim) != dim or dim < min_dim:
		throw(f"{name} needs dimension >= {min_dim}, got {dim}", DimensionError)
	return get_attr(path)


@dataclass(frozen=True)
class BenchmarkProblem:
	"""Picklable descriptor of a benchmark minimization; the score is the final fitness"""

	function: str = config.BENCH_FUNCTION
	dim: int = config.BENCH_DIM

	metric_keys = ("fitness",)
	objective_total = True

	def objective(self):
		return benchmark_objective(self.function, self.dim)

	def score(self, position):
		return {"fitness": self.objective()(position)}

	def as_dict(self):
		return {"function": self.function, "dim": self.dim}


# Stabilization
# ------------------------------


def stabilization_iteration(trace, window=config.STABILIZATION_WINDOW, rel_tol=config.STABILIZATION_REL_TOL):
	"""First trace index t where mean |v| over [t, t + window) spreads by at most rel_tol x its mean.

	Takes a ConvergenceTrace or a plain sequence of velocity averages. The index is 0-based
	into the trace, so the iteration number is t + 1. None when no window qualifies.
	"""
	values = np.asarray(getattr(trace, "mean_abs_velocity", trace), dtype=np.float64)
	if int(window) != window or window < 2:
		throw(f"stabilization window must be an integer >= 2, got {window}")
	if not rel_tol >= 0.0:
		throw(f"stabilization tolerance must be >= 0, got {rel_tol}")
	if len(values) < window:
		throw(f"Trace of {len(values)} iterations is shorter than the window {window}")
	windows = sliding_window_view(values, int(window))
	spread = windows.max(axis=1) - windows.min(axis=1)
	hits = np.flatnonzero(spread <= rel_tol * windows.mean(axis=1))
	return int(hits[0]) if hits.size else None


# Grid sweep
# ------------------------------


def parse_grid(text):
	"""`start:stop:step` as an increasing list, stop included when reached within tolerance"""
	try:
		start, stop, step = (float(part) for part in text.split(":"))
	except ValueError:
		throw(f"Grid {text!r} is not in start:stop:step form")
	if not step > 0:
		throw(f"Grid {text!r} needs a positive step")
	if stop < start:
		throw(f"Grid {text!r} stops before it starts")
	count = int(math.floor((stop - start) / step + GRID_TOLERANCE)) + 1
	# rounding keeps 0.1 + 2 * 0.1 printing as 0.3
	return [round(start + k * step, 12) for k in range(count)]


@dataclass(frozen=True)
class SweepSpec:
	alpha_grid: tuple
	dump_grid: tuple
	runs_per_cell: int = config.RUNS
	base_config: PsoConfig = field(default_factory=PsoConfig)
	problem: object = field(default_factory=BenchmarkProblem)
	decay_sharpness: float = config.DECAY_SHARPNESS

	def __post_init__(self):
		object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
		object.__setattr__(self, "dump_grid", tuple(float(d) for d in self.dump_grid))

	def validate(self):
		for name, grid in (("alpha", self.alpha_grid), ("alpha_dump", self.dump_grid)):
			if not grid:
				throw(f"{name} grid is empty")
			if any(not 0.0 < v <= 1.0 for v in grid):
				throw(f"{name} grid values must lie in (0, 1], got {list(grid)}")
			if any(b <= a for a, b in zip(grid, grid[1:], strict=False)):
				throw(f"{name} grid must be strictly increasing, got {list(grid)}")
		if self.runs_per_cell < 1:
			throw(f"runs per cell must be >= 1, got {self.runs_per_cell}")
		self.base_config.validate()

	def cells(self):
		return [(alpha, dump) for alpha in self.alpha_grid for dump in self.dump_grid]


@dataclass(frozen=True)
class SweepJob:
	cell_index: int
	run_index: int
	alpha: float
	alpha_dump: float
	config: PsoConfig
	problem: object
	decay_sharpness: float


@dataclass(frozen=True)
class SweepCell:
	alpha: float
	alpha_dump: float
	mean_pe: float
	best_pe: float
	runs: int

	def score(self, aggregate):
		return self.mean_pe if aggregate == "mean" else self.best_pe


@dataclass
class SweepResult:
	cells: list
	best: SweepCell
	aggregate: str

	def to_frame(self):
		return pd.DataFrame(
			[(c.alpha, c.alpha_dump, c.mean_pe, c.best_pe, c.runs) for c in self.cells], columns=list(SWEEP_COLUMNS)
		)


def sweep_jobs(spec):
	"""One job per (cell, run); seeds hash (base seed, cell index, run index)"""
	spec.validate()
	return [
		SweepJob(
			cell_index=cell_index,
			run_index=run_index,
			alpha=alpha,
			alpha_dump=dump,
			config=replace(spec.base_config, seed=derive_seed(spec.base_config.seed, cell_index, run_index)),
			problem=spec.problem,
			decay_sharpness=spec.decay_sharpness,
		)
		for cell_index, (alpha, dump) in enumerate(spec.cells())
		for run_index in range(spec.runs_per_cell)
	]


def run_sweep_job(job):
	"""(cell_index, run_index, final PE); PE is None when the run aborted"""
	strategy = RdvInertia(job.alpha, job.alpha_dump, job.decay_sharpness)
	try:
		result = run_pso(
			job.config, job.problem.dim, job.problem.objective(), strategy, objective_total=job.problem.objective_total
		)
	except RdvSwarmError as e:
		log_error("Sweep run aborted", {"job": _job_dict(job), "error": str(e)})
		return job.cell_index, job.run_index, None
	if not math.isfinite(result.gbest_fitness):
		log_error("Sweep run found no finite fitness", {"job": _job_dict(job)})
		return job.cell_index, job.run_index, None
	return job.cell_index, job.run_index, result.gbest_fitness


def _job_dict(job):
	return {
		"cell_index": job.cell_index,
		"run_index": job.run_index,
		"alpha": job.alpha,
		"alpha_dump": job.alpha_dump,
		"seed": job.config.seed,
	}


def collect_sweep(spec, outcomes, aggregate=config.SWEEP_AGGREGATE):
	"""Aggregate job outcomes per cell; independent of the order outcomes arrive in"""
	if aggregate not in AGGREGATES:
		throw(f"aggregate must be one of {AGGREGATES}, got {aggregate!r}")
	by_cell = {}
	for cell_index, run_index, pe in outcomes:
		by_cell.setdefault(cell_index, {})[run_index] = pe

	cells = []
	for cell_index, (alpha, dump) in enumerate(spec.cells()):
		runs = by_cell.get(cell_index, {})
		values = [runs[k] for k in sorted(runs) if runs[k] is not None]
		if not values:
			throw(f"Every run of cell alpha={alpha} alpha_dump={dump} aborted", ObjectiveError)
		cells.append(SweepCell(alpha, dump, math.fsum(values) / len(values), min(values), len(values)))

	best = select_best(cells, aggregate)
	return SweepResult(cells, best, aggregate)


def select_best(cells, aggregate=config.SWEEP_AGGREGATE):
	"""Lowest score; ties go to the lexicographically first (alpha, alpha_dump)"""
	return min(cells, key=lambda c: (c.score(aggregate), c.alpha, c.alpha_dump))


def grid_sweep(spec, jobs=1, aggregate=config.SWEEP_AGGREGATE):
	job_list = sweep_jobs(spec)
	logger.info(
		"Sweeping %d cells x %d runs over %s with %d worker(s)",
		len(spec.cells()),
		spec.runs_per_cell,
		spec.problem.as_dict(),
		jobs,
	)
	result = collect_sweep(spec, execute(run_sweep_job, job_list, jobs), aggregate)
	logger.info("Best cell: alpha=%s alpha_dump=%s", result.best.alpha, result.best.alpha_dump)
	return result


def write_sweep_csv(path, result):
	try:
		result.to_frame().to_csv(path, index=False, float_format="%.17g")
	except OSError as e:
		throw(f"Cannot write sweep table to {path}: {e}", DataError)


def execute(fn, items, jobs=1):
	"""Map `fn` over `items` in submission order, on a process pool when jobs > 1"""
	if int(jobs) != jobs or jobs < 1:
		throw(f"--jobs must be a positive integer, got {jobs}")
	if jobs == 1 or len(items) <= 1:
		return [fn(item) for item in items]
	with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
		return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * int(jobs)))))


# Variant comparison
# ------------------------------


@dataclass(frozen=True)
class TrialJob:
	variant: str
	trial: int
	strategy: object
	config: PsoConfig
	problem: object
	window: int
	rel_tol: float


@dataclass(frozen=True)
class TrialRecord:
	variant: str
	trial: int
	seed: int
	metrics: dict
	pe: float
	elapsed_seconds: float
	iterations: int
	stabilization_iteration: int | None


def run_trial(job):
	result = run_pso(
		job.config, job.problem.dim, job.problem.objective(), job.strategy, objective_total=job.problem.objective_total
	)
	stable = None
	if len(result.trace) >= job.window:
		index = stabilization_iteration(result.trace, job.window, job.rel_tol)
		stable = None if index is None else index + 1
	return TrialRecord(
		variant=job.variant,
		trial=job.trial,
		seed=job.config.seed,
		metrics=job.problem.score(result.gbest_position),
		pe=result.gbest_fitness,
		elapsed_seconds=result.elapsed_seconds,
		iterations=result.iterations_run,
		stabilization_iteration=stable,
	)


@dataclass
class ComparisonReport:
	variants: list
	strategies: dict
	trials: int
	seeds: list
	metric_keys: tuple
	matrix: dict
	summaries: dict
	t_tests: dict
	convergence: dict
	improvements: dict
	problem: dict = field(default_factory=dict)


def compare_variants(
	problem,
	variants,
	trials=config.RUNS,
	base_config=None,
	jobs=1,
	window=config.STABILIZATION_WINDOW,
	rel_tol=config.STABILIZATION_REL_TOL,
	alpha_level=config.ALPHA_LEVEL,
	tail=config.TAIL,
):
	"""Run every variant for `trials` paired seeds and test variant 1 against variant 2.

	Trial k uses the same derived seed for every variant, so trajectories differ only
	through the inertia strategy.
	"""
	variants = list(variants)
	if len(variants) < 2:
		throw(f"Comparison needs at least 2 variants, got {len(variants)}")
	names = [name for name, _strategy in variants]
	if len(set(names)) != len(names):
		throw(f"Variant names must be unique, got {names}")
	if int(trials) != trials or trials < 2:
		throw(f"Comparison needs at least 2 trials for a paired t-test, got {trials}")
	base_config = base_config or PsoConfig(seed=config.default_seed())
	base_config.validate()
	for _name, strategy in variants:
		strategy.validate()

	seeds = [derive_seed(base_config.seed, 0, trial) for trial in range(int(trials))]
	job_list = [
		TrialJob(name, trial, strategy, replace(base_config, seed=seeds[trial]), problem, window, rel_tol)
		for trial in range(int(trials))
		for name, strategy in variants
	]
	logger.info("Comparing %s over %d paired trials with %d worker(s)", names, trials, jobs)
	try:
		records = execute(run_trial, job_list, jobs)
	except RdvSwarmError as e:
		log_error("Comparison trial aborted", {"variants": names, "error": str(e)})
		raise

	by_variant = {name: sorted((r for r in records if r.variant == name), key=lambda r: r.trial) for name in names}
	keys = tuple(problem.metric_keys)
	matrix = {name: {key: [r.metrics[key] for r in by_variant[name]] for key in keys} for name in names}

	summaries = {name: {key: _summary_or_none(matrix[name][key]) for key in keys} for name in names}
	convergence = {
		name: {
			"pe": summarize_runs([r.pe for r in by_variant[name]]),
			"elapsed_seconds": summarize_runs([r.elapsed_seconds for r in by_variant[name]]),
			"stabilization_iteration": _summary_or_none([r.stabilization_iteration for r in by_variant[name]]),
		}
		for name in names
	}

	study, baseline = names[0], names[1]
	t_tests = {}
	for key in keys:
		a, b = matrix[study][key], matrix[baseline][key]
		if any(v is None for v in a + b):
			t_tests[key] = f"undefined: {key} missing in at least one trial"
			continue
		try:
			t_tests[key] = paired_t_test(a, b, alpha_level=alpha_level, tail=tail)
		except DegenerateStatisticsError as e:
			t_tests[key] = f"degenerate: {e}"

	improvements = {}
	for key in CONVERGENCE_KEYS:
		proposed, reference = convergence[study][key], convergence[baseline][key]
		improvements[key] = {
			stat: _improvement_or_none(getattr(reference, stat), getattr(proposed, stat))
			if proposed is not None and reference is not None
			else None
			for stat in ("min", "max", "mean")
		}

	return ComparisonReport(
		variants=names,
		strategies={name: strategy.as_dict() for name, strategy in variants},
		trials=int(trials),
		seeds=seeds,
		metric_keys=keys,
		matrix=matrix,
		summaries=summaries,
		t_tests=t_tests,
		convergence=convergence,
		improvements=improvements,
		problem=problem.as_dict(),
	)


def _summary_or_none(values):
	if any(v is None for v in values):
		return None
	return summarize_runs(values)


def _improvement_or_none(baseline, proposed):
	try:
		return improvement_pct(baseline, proposed)
	except ValidationError:
		return None


def comparison_as_dict(report, digits=config.REPORT_DIGITS):
	def summary(s):
		return s.as_dict(digits) if s is not None else None

	return {
		"problem": report.problem,
		"variants": report.variants,
		"strategies": report.strategies,
		"trials": report.trials,
		"seeds": report.seeds,
		"per_trial": {
			name: {key: [rounded(v, digits) for v in values] for key, values in metrics.items()}
			for name, metrics in report.matrix.items()
		},
		"summaries": {
			name: {key: summary(s) for key, s in metrics.items()} for name, metrics in report.summaries.items()
		},
		"t_tests": {
			key: result.as_dict(digits) if hasattr(result, "as_dict") else {"error": result}
			for key, result in report.t_tests.items()
		},
		"convergence": {
			name: {key: summary(s) for key, s in stats.items()} for name, stats in report.convergence.items()
		},
		"improvement_pct": {
			key: {stat: rounded(v, digits) for stat, v in stats.items()} for key, stats in report.improvements.items()
		},
	}

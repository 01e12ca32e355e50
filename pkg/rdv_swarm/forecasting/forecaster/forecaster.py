# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

"""Train, evaluate and forecast with a PSO-trained lag network."""

import logging
from dataclasses import dataclass, field

import numpy as np

from rdv_swarm import config
from rdv_swarm.evaluation.metrics.metrics import METRIC_KEYS, compute_metrics, position_error
from rdv_swarm.exceptions import InsufficientHistoryError
from rdv_swarm.forecasting.nar_net.nar_net import NarNetwork, forecast_recursive, forward_batch, with_params
from rdv_swarm.forecasting.series_io.series_io import (
	TimeSeries,
	differenced,
	fit_scaler,
	integrate,
	make_lag_dataset,
	split_indices,
)
from rdv_swarm.swarm.inertia_rdv.inertia_rdv import RdvInertia
from rdv_swarm.swarm.pso_engine.pso_engine import PsoConfig, forecast_fitness, run_pso
from rdv_swarm.utils import rounded, throw

logger = logging.getLogger(__name__)

SPLIT_MODES = ("chronological", "random")
SEGMENTS = ("train", "validation", "test")


@dataclass(frozen=True)
class ForecastProblem:
	"""A series prepared for training: fitted scaler, lag rows and their segment assignment.

	The network models the series differenced `difference` times. Lag row k predicts
	source index k + m + difference and belongs to the segment holding that index.
	"""

	values: np.ndarray = field(repr=False)
	net_template: NarNetwork
	scaler: object
	train_rows: np.ndarray = field(repr=False)
	validation_rows: np.ndarray = field(repr=False)
	test_rows: np.ndarray = field(repr=False)
	literal: bool = False
	difference: int = config.DIFFERENCE_ORDER

	metric_keys = METRIC_KEYS
	objective_total = False

	@property
	def dim(self):
		return self.net_template.dim

	@property
	def modeled(self):
		return differenced(self.values, self.difference)

	@property
	def dataset(self):
		return make_lag_dataset(self.modeled, self.net_template.m)

	@property
	def anchors(self):
		"""Level each row's modeled target is added to (zero when not differenced)"""
		start, count = self.net_template.m, len(self.values) - self.net_template.m - self.difference
		if not self.difference:
			return np.zeros(count)
		return self.values[start : start + count].copy()

	def rows(self, segment):
		return {"train": self.train_rows, "validation": self.validation_rows, "test": self.test_rows}[segment]

	def segment(self, name):
		rows = self.rows(name)
		return self.dataset.subset(rows), self.anchors[rows]

	def objective(self):
		return forecast_fitness(self.net_template, self.scaler, self.dataset.subset(self.train_rows), self.literal)

	def evaluate(self, position, segment="test"):
		"""Raw-space metrics of the network at `position` on one segment"""
		net = with_params(self.net_template, position)
		return evaluate_segment(net, self.scaler, *self.segment(segment))["raw"]

	def score(self, position):
		report = self.evaluate(position, "test")
		return {key: report.metric(key) for key in self.metric_keys}

	def as_dict(self):
		return {
			"lags": self.net_template.m,
			"hidden_sizes": list(self.net_template.hidden_sizes),
			"hidden_activation": self.net_template.hidden_activation,
			"output_activation": self.net_template.output_activation,
			"difference": self.difference,
			"scaler": self.scaler.as_dict(),
			"rows": {segment: len(self.rows(segment)) for segment in SEGMENTS},
			"literal_eq18": self.literal,
		}


@dataclass
class TrainedForecaster:
	net: NarNetwork
	scaler: object
	result: object
	metrics: dict
	train_pe: dict
	difference: int = 0

	def forecast(self, history, horizon):
		return forecast_levels(self.net, self.scaler, history, horizon, self.difference)

	def score(self):
		return self.metrics["test"]["raw"]

	def metrics_as_dict(self, digits=config.REPORT_DIGITS, include_nmse=False):
		return {
			segment: {space: report.as_dict(digits, include_nmse) for space, report in spaces.items()}
			for segment, spaces in self.metrics.items()
		}


def prepare_problem(
	series,
	lags=config.LAGS,
	hidden_sizes=config.HIDDEN_SIZES,
	hidden_activation=config.HIDDEN_ACTIVATION,
	output_activation=config.OUTPUT_ACTIVATION,
	ratios=config.SPLIT_RATIOS,
	split_mode=config.SPLIT_MODE,
	seed=None,
	literal=False,
	difference=config.DIFFERENCE_ORDER,
):
	if split_mode not in SPLIT_MODES:
		throw(f"split mode must be one of {SPLIT_MODES}, got {split_mode!r}")
	if difference not in config.DIFFERENCE_ORDERS:
		throw(f"Difference order must be one of {config.DIFFERENCE_ORDERS}, got {difference!r}")
	values = np.asarray(series.values if isinstance(series, TimeSeries) else series, dtype=np.float64)
	if len(values) < config.MIN_SPLIT_LENGTH:
		throw(f"Series has {len(values)} values; at least {config.MIN_SPLIT_LENGTH} are needed", InsufficientHistoryError)

	shuffle = split_mode == "random"
	if shuffle and seed is None:
		seed = config.default_seed()
	train_idx, val_idx, test_idx = split_indices(len(values), ratios, shuffle=shuffle, seed=seed)
	net = NarNetwork(lags, hidden_sizes, hidden_activation, output_activation)
	modeled = differenced(values, difference)
	dataset = make_lag_dataset(modeled, lags)

	target_index = np.arange(len(dataset)) + lags + difference
	segments = []
	for name, idx in zip(SEGMENTS, (train_idx, val_idx, test_idx), strict=True):
		rows = np.flatnonzero(np.isin(target_index, idx))
		if len(rows) < 2:
			throw(
				f"Only {len(rows)} {name} rows remain with {lags} lags over {len(values)} values; reduce --lags",
				InsufficientHistoryError,
			)
		segments.append(rows)

	# modeled index j is the change into level index j + difference
	scaler = fit_scaler(modeled[train_idx[train_idx >= difference] - difference])

	logger.info(
		"Prepared %d lag rows (train %d, validation %d, test %d) at difference order %d for network %s",
		len(dataset),
		*(len(rows) for rows in segments),
		difference,
		net.layer_widths,
	)
	return ForecastProblem(values, net, scaler, *segments, literal=literal, difference=difference)


def evaluate_segment(net, scaler, dataset, anchors=None):
	"""Metrics in raw and normalized space plus the residual position error in both.

	`anchors` are added back to targets and predictions so raw metrics are in level units.
	"""
	anchors = np.zeros(len(dataset)) if anchors is None else np.asarray(anchors, dtype=np.float64)
	normalized = dataset.normalized(scaler)
	predicted = forward_batch(net, normalized.inputs)
	predicted_raw = scaler.invert(predicted) + anchors
	targets_raw = dataset.targets + anchors
	return {
		"raw": compute_metrics(targets_raw, predicted_raw),
		"normalized": compute_metrics(normalized.targets, predicted),
		"pe_raw": position_error(predicted_raw, targets_raw),
		"pe_normalized": position_error(predicted, normalized.targets),
	}


def forecast_levels(net, scaler, history, horizon, difference=config.DIFFERENCE_ORDER):
	"""Recursive forecast in level units for a network trained on a differenced series"""
	history = np.asarray(history, dtype=np.float64)
	if not difference:
		return forecast_recursive(net, scaler, history, horizon)
	steps = forecast_recursive(net, scaler, differenced(history, difference), horizon)
	return integrate(history[-1], steps)


def train_forecaster(problem, pso_config=None, strategy=None, callback=None):
	pso_config = pso_config or PsoConfig(seed=config.default_seed())
	strategy = strategy or RdvInertia()
	result = run_pso(
		pso_config,
		problem.dim,
		problem.objective(),
		strategy,
		objective_total=problem.objective_total,
		callback=callback,
	)
	if not np.isfinite(result.gbest_fitness):
		throw("Every candidate network produced non-finite predictions; try a smaller --limit")
	net = with_params(problem.net_template, result.gbest_position)

	metrics, train_pe = {}, {}
	for segment in SEGMENTS:
		evaluation = evaluate_segment(net, problem.scaler, *problem.segment(segment))
		metrics[segment] = {"raw": evaluation["raw"], "normalized": evaluation["normalized"]}
		if segment == "train":
			train_pe = {"normalized": evaluation["pe_normalized"], "raw": evaluation["pe_raw"]}

	logger.info(
		"Trained forecaster: train PE %s, test R2 %s",
		rounded(train_pe["normalized"]),
		rounded(metrics["test"]["raw"].r_squared),
	)
	return TrainedForecaster(net, problem.scaler, result, metrics, train_pe, problem.difference)

# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from rdv_swarm import config
from rdv_swarm.exceptions import DataError, DimensionError, InsufficientHistoryError, ValidationError
from rdv_swarm.forecasting.series_io.series_io import Scaler
from rdv_swarm.utils import throw

logger = logging.getLogger(__name__)

HIDDEN_ACTIVATIONS = ("identity", "tanh", "step")
OUTPUT_ACTIVATIONS = ("identity", "step")


def identity(s):
	return s


def step(s):
	# f(x) = 1 for x > 0, 0 for x <= 0
	return np.where(np.asarray(s) > 0.0, 1.0, 0.0)


ACTIVATIONS = {"identity": identity, "tanh": np.tanh, "step": step}


@dataclass(frozen=True)
class NarNetwork:
	"""Feed-forward lag network m -> hidden_sizes... -> 1.

	`params` is flat, layer by layer: the fan_out x fan_in weight block (by destination
	neuron, then source) followed by fan_out thresholds. Each neuron computes
	S = sum(w_i * x_i) - theta and applies its layer's activation.
	"""

	m: int
	hidden_sizes: tuple = config.HIDDEN_SIZES
	hidden_activation: str = config.HIDDEN_ACTIVATION
	output_activation: str = config.OUTPUT_ACTIVATION
	params: np.ndarray = field(default=None, repr=False)

	def __post_init__(self):
		object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
		self.validate_architecture()
		if self.params is None:
			params = np.zeros(param_count(self.m, self.hidden_sizes))
		else:
			params = np.array(self.params, dtype=np.float64).ravel()
		if len(params) != param_count(self.m, self.hidden_sizes):
			throw(
				f"Network {self.layer_widths} needs {param_count(self.m, self.hidden_sizes)} params, got {len(params)}",
				DimensionError,
			)
		if not np.all(np.isfinite(params)):
			throw("Network params must be finite", ValidationError)
		params.flags.writeable = False
		object.__setattr__(self, "params", params)

	def validate_architecture(self):
		if int(self.m) != self.m or self.m < 1:
			throw(f"Lag count m must be >= 1, got {self.m}")
		if any(h < 1 for h in self.hidden_sizes):
			throw(f"Hidden layer sizes must be >= 1, got {list(self.hidden_sizes)}")
		if self.hidden_activation not in HIDDEN_ACTIVATIONS:
			throw(f"Hidden activation must be one of {HIDDEN_ACTIVATIONS}, got {self.hidden_activation!r}")
		if self.output_activation not in OUTPUT_ACTIVATIONS:
			throw(f"Output activation must be one of {OUTPUT_ACTIVATIONS}, got {self.output_activation!r}")

	@property
	def layer_widths(self):
		return (self.m, *self.hidden_sizes, 1)

	@property
	def dim(self):
		return len(self.params)

	def layers(self, params=None):
		"""Yield (weights, thresholds, activation) per layer, viewing `params` without copying"""
		params = self.params if params is None else params
		widths = self.layer_widths
		offset = 0
		for idx, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:], strict=True)):
			weights = params[offset : offset + fan_in * fan_out].reshape(fan_out, fan_in)
			offset += fan_in * fan_out
			thresholds = params[offset : offset + fan_out]
			offset += fan_out
			is_output = idx == len(widths) - 2
			activation = self.output_activation if is_output else self.hidden_activation
			yield weights, thresholds, ACTIVATIONS[activation]

	def as_dict(self):
		return {
			"m": self.m,
			"hidden_sizes": list(self.hidden_sizes),
			"activations": {"hidden": self.hidden_activation, "output": self.output_activation},
			"params": [float(p) for p in self.params],
		}


def param_count(m, hidden_sizes):
	widths = (m, *hidden_sizes, 1)
	return sum(fan_in * fan_out + fan_out for fan_in, fan_out in zip(widths[:-1], widths[1:], strict=True))


def with_params(net, flat):
	flat = np.asarray(flat, dtype=np.float64).ravel()
	if len(flat) != net.dim:
		throw(f"Expected {net.dim} params for network {net.layer_widths}, got {len(flat)}", DimensionError)
	return NarNetwork(net.m, net.hidden_sizes, net.hidden_activation, net.output_activation, flat)


def forward_batch(net, inputs, params=None):
	"""Forward pass over rows of lag windows; returns one output per row"""
	a = np.asarray(inputs, dtype=np.float64)
	if a.ndim != 2 or a.shape[1] != net.m:
		throw(f"Expected rows of {net.m} lags, got array of shape {a.shape}", DimensionError)
	for weights, thresholds, activation in net.layers(params):
		a = activation(a @ weights.T - thresholds)
	return a[:, 0]


def forward(net, lags):
	lags = np.asarray(lags, dtype=np.float64)
	if lags.shape != (net.m,):
		throw(f"Expected {net.m} lags, got {lags.size}", DimensionError)
	return float(forward_batch(net, lags[np.newaxis, :])[0])


def predict_one_step(net, scaler, history):
	history = np.asarray(history, dtype=np.float64)
	if len(history) < net.m:
		throw(f"Need at least {net.m} history values, got {len(history)}", InsufficientHistoryError)
	return scaler.invert(forward(net, scaler.transform(history[-net.m :])))


def forecast_recursive(net, scaler, history, horizon):
	"""Predict `horizon` steps, feeding each prediction back as the newest lag"""
	if int(horizon) != horizon or horizon < 0:
		throw(f"Horizon must be a non-negative integer, got {horizon}")
	working = [float(v) for v in history]
	if len(working) < net.m:
		throw(f"Need at least {net.m} history values, got {len(working)}", InsufficientHistoryError)
	predictions = []
	for _ in range(int(horizon)):
		prediction = predict_one_step(net, scaler, working[-net.m :])
		predictions.append(prediction)
		working.append(prediction)
	return predictions


def save_model(path, net, scaler, difference=0):
	"""`difference` records the order the series was differenced at before lag embedding"""
	doc = net.as_dict()
	doc["scaler"] = scaler.as_dict()
	doc["difference"] = difference
	with open(path, "w", encoding="utf-8") as f:
		# json writes floats with repr, the shortest round-tripping decimal
		json.dump(doc, f, indent=1)
	logger.debug("Saved model with %d params to %s", net.dim, path)


def load_model(path):
	try:
		with open(path, encoding="utf-8") as f:
			doc = json.load(f)
	except OSError as e:
		throw(f"Cannot read model file {path}: {e}", DataError)
	except json.JSONDecodeError as e:
		throw(f"Model file {path} is not valid JSON: {e}", DataError)
	try:
		net = NarNetwork(
			m=doc["m"],
			hidden_sizes=tuple(doc["hidden_sizes"]),
			hidden_activation=doc["activations"]["hidden"],
			output_activation=doc["activations"]["output"],
			params=doc["params"],
		)
		scaler = Scaler(float(doc["scaler"]["min"]), float(doc["scaler"]["max"]))
	except (KeyError, TypeError) as e:
		throw(f"Model file {path} is missing field {e}", DataError)
	difference = doc.get("difference", 0)
	if difference not in config.DIFFERENCE_ORDERS:
		throw(f"Model file {path} has unsupported difference order {difference!r}", DataError)
	return net, scaler, difference

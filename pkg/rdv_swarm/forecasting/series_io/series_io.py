# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from rdv_swarm import config
from rdv_swarm.exceptions import DataError, DegenerateSeriesError, InsufficientHistoryError, ValidationError
from rdv_swarm.utils import throw

logger = logging.getLogger(__name__)

MONTH_PATTERN = re.compile(r"^\d{4}-\d{2}$")
SERIES_COLUMNS = ("month", "value")


@dataclass(frozen=True)
class TimeSeries:
	timestamps: tuple
	values: np.ndarray = field(repr=False)

	def __post_init__(self):
		values = np.array(self.values, dtype=np.float64)
		values.flags.writeable = False
		object.__setattr__(self, "values", values)
		object.__setattr__(self, "timestamps", tuple(self.timestamps))
		self.validate()

	def validate(self):
		if len(self.values) < 1:
			throw("Time series must hold at least one observation", DataError)
		if len(self.timestamps) != len(self.values):
			throw(
				f"Time series has {len(self.timestamps)} timestamps but {len(self.values)} values", DataError
			)
		for idx, value in enumerate(self.values, start=1):
			if not math.isfinite(value):
				throw(f"Row {idx}: value {value} is not finite", DataError)
		previous = None
		for idx, month in enumerate(self.timestamps, start=1):
			period = parse_month(month, idx)
			if previous is not None:
				check_consecutive(previous, period, idx)
			previous = period

	def __len__(self):
		return len(self.values)


@dataclass(frozen=True)
class Scaler:
	"""Min-max normalization fitted on the training segment"""

	min: float
	max: float

	def __post_init__(self):
		if not (math.isfinite(self.min) and math.isfinite(self.max)) or not self.max > self.min:
			throw(f"Scaler requires max > min, got min={self.min} max={self.max}", DegenerateSeriesError)

	@property
	def span(self):
		return self.max - self.min

	def transform(self, x):
		return (np.asarray(x, dtype=np.float64) - self.min) / self.span if np.ndim(x) else (float(x) - self.min) / self.span

	def invert(self, u):
		return np.asarray(u, dtype=np.float64) * self.span + self.min if np.ndim(u) else float(u) * self.span + self.min

	def as_dict(self):
		return {"min": self.min, "max": self.max}


@dataclass(frozen=True)
class LagDataset:
	inputs: np.ndarray = field(repr=False)
	targets: np.ndarray = field(repr=False)
	m: int

	def __len__(self):
		return len(self.targets)

	def subset(self, rows):
		rows = np.asarray(rows, dtype=np.intp)
		return LagDataset(self.inputs[rows], self.targets[rows], self.m)

	def normalized(self, scaler):
		return LagDataset(scaler.transform(self.inputs), scaler.transform(self.targets), self.m)


def parse_month(label, row):
	if not isinstance(label, str) or not MONTH_PATTERN.match(label.strip()):
		throw(f"Row {row}: month {label!r} is not in YYYY-MM form", DataError)
	try:
		return pd.Period(label.strip(), freq="M")
	except ValueError:
		throw(f"Row {row}: month {label!r} is not a valid calendar month", DataError)


def check_consecutive(previous, current, row):
	step = (current - previous).n
	if step == 0:
		throw(f"Row {row}: duplicate month {current}", DataError)
	if step != 1:
		throw(f"Row {row}: month {current} does not follow {previous} (gap or out of order)", DataError)


def load_series(path):
	"""Load a two-column `month,value` CSV into a validated TimeSeries"""
	try:
		frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
	except (OSError, UnicodeDecodeError) as e:
		throw(f"Cannot read series file {path}: {e}", DataError)
	except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
		throw(f"Malformed series file {path}: {e}", DataError)

	if frame.shape[1] != 2:
		throw(f"Series file {path} must have exactly two columns (month,value), found {frame.shape[1]}", DataError)
	header = [str(c).strip() for c in frame.columns]
	if header != list(SERIES_COLUMNS):
		throw(f"Row 1 (header) of {path} must be {','.join(SERIES_COLUMNS)}, got {','.join(header)}", DataError)

	timestamps, values = [], []
	previous = None
	for idx, (month, raw) in enumerate(frame.itertuples(index=False, name=None), start=1):
		period = parse_month(month, idx)
		if previous is not None:
			check_consecutive(previous, period, idx)
		previous = period
		value = parse_value(raw, idx)
		timestamps.append(str(period))
		values.append(value)

	if not values:
		throw(f"Series file {path} has no data rows", DataError)

	logger.debug("Loaded %d monthly observations from %s", len(values), path)
	return TimeSeries(tuple(timestamps), np.array(values))


def parse_value(raw, row):
	if raw is None or (isinstance(raw, float) and math.isnan(raw)) or not str(raw).strip():
		throw(f"Row {row}: empty value field", DataError)
	try:
		value = float(str(raw).strip())
	except ValueError:
		throw(f"Row {row}: value {raw!r} is not a decimal number", DataError)
	if not math.isfinite(value):
		throw(f"Row {row}: value {raw!r} is not finite", DataError)
	return value


def save_series(path, series):
	month, value = SERIES_COLUMNS
	frame = pd.DataFrame({month: list(series.timestamps), value: [repr(float(v)) for v in series.values]})
	frame.to_csv(path, index=False)


def synthetic_series(
	n=config.SYNTH_LENGTH,
	start=config.SYNTH_START,
	level=config.SYNTH_LEVEL,
	trend=config.SYNTH_TREND,
	amplitude=config.SYNTH_AMPLITUDE,
	period=config.SYNTH_PERIOD,
	noise=config.SYNTH_NOISE,
	seed=None,
):
	"""Monthly series: linear trend + sinusoid + seeded Gaussian noise"""
	if n < 1:
		throw(f"Synthetic series length must be >= 1, got {n}")
	if period <= 0:
		throw(f"Seasonal period must be positive, got {period}")
	rng = np.random.default_rng(config.FALLBACK_SEED if seed is None else seed)
	t = np.arange(n, dtype=np.float64)
	values = level + trend * t + amplitude * np.sin(2.0 * np.pi * t / period) + rng.normal(0.0, noise, n)
	months = pd.period_range(start=pd.Period(start, freq="M"), periods=n, freq="M")
	return TimeSeries(tuple(str(p) for p in months), values)


def fit_scaler(train_values):
	values = np.asarray(train_values, dtype=np.float64)
	if values.size < 2:
		throw(f"Scaler needs at least 2 training values, got {values.size}", DataError)
	lo, hi = float(values.min()), float(values.max())
	if hi == lo:
		throw(f"Training segment is constant ({lo}); refusing to fit a degenerate scaler", DegenerateSeriesError)
	return Scaler(lo, hi)


def make_lag_dataset(values, m):
	"""Rows of m lags (oldest first) mapped to the next value"""
	values = np.asarray(values, dtype=np.float64)
	if int(m) != m or m < 1:
		throw(f"Lag count must be a positive integer, got {m}")
	m = int(m)
	if m >= len(values):
		throw(f"Insufficient history: {len(values)} values cannot support {m} lags", InsufficientHistoryError)
	inputs = sliding_window_view(values, m)[:-1].copy()
	return LagDataset(inputs, values[m:].copy(), m)


def differenced(values, order=config.DIFFERENCE_ORDER):
	"""Order 0 copies the series; order 1 gives the n - 1 month-on-month changes"""
	values = np.asarray(values, dtype=np.float64)
	if order not in config.DIFFERENCE_ORDERS:
		throw(f"Difference order must be one of {config.DIFFERENCE_ORDERS}, got {order!r}")
	if len(values) <= order:
		throw(f"Differencing {len(values)} values at order {order} leaves nothing", InsufficientHistoryError)
	return np.diff(values, n=order) if order else values.copy()


def integrate(last_value, steps):
	"""Undo first differencing: levels that follow `last_value` by the given steps"""
	return (float(last_value) + np.cumsum(np.asarray(steps, dtype=np.float64))).tolist()


def split_sizes(n, ratios):
	"""Floor-remainder rule: val and test get floor(ratio * n), train gets the rest"""
	if len(ratios) != 3:
		throw(f"Split needs three ratios (train, val, test), got {len(ratios)}")
	if any(r <= 0 for r in ratios):
		throw(f"Every split ratio must be > 0, got {tuple(ratios)}")
	if abs(sum(ratios) - 1.0) > config.RATIO_TOLERANCE:
		throw(f"Split ratios must sum to 1, got {sum(ratios)!r}")
	n_val = math.floor(ratios[1] * n + config.RATIO_TOLERANCE)
	n_test = math.floor(ratios[2] * n + config.RATIO_TOLERANCE)
	n_train = n - n_val - n_test
	if min(n_train, n_val, n_test) < 1:
		throw(f"Split of {n} values by {tuple(ratios)} leaves an empty segment", ValidationError)
	return n_train, n_val, n_test


def split_indices(n, ratios, shuffle=False, seed=None):
	n_train, n_val, _n_test = split_sizes(n, ratios)
	order = np.arange(n)
	if shuffle:
		order = np.random.default_rng(seed).permutation(n)
	segments = (order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :])
	return tuple(np.sort(s) for s in segments)


def split_series(values, ratios=config.SPLIT_RATIOS, shuffle=False, seed=None):
	"""Chronological train/val/test split; `shuffle` assigns indices at random (order kept within)"""
	values = np.asarray(values, dtype=np.float64)
	if len(values) < config.MIN_SPLIT_LENGTH:
		throw(f"Split needs at least {config.MIN_SPLIT_LENGTH} values, got {len(values)}", DataError)
	return tuple(values[idx] for idx in split_indices(len(values), ratios, shuffle, seed))

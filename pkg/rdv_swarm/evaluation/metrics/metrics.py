# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

"""Forecast accuracy metrics and position error."""

import math
from dataclasses import dataclass

import numpy as np

from rdv_swarm import config
from rdv_swarm.exceptions import DegenerateStatisticsError, DimensionError, ValidationError
from rdv_swarm.utils import rounded, throw

METRIC_KEYS = ("nrmse", "mae", "mape", "wape", "r2")


@dataclass(frozen=True)
class MetricsReport:
	nrmse: float
	mae: float
	mape: float | None
	wape: float
	r_squared: float
	n: int
	nmse: float
	mape_note: str | None = None

	def metric(self, key):
		return self.r_squared if key == "r2" else getattr(self, key)

	def as_dict(self, digits=config.REPORT_DIGITS, include_nmse=False):
		doc = {key: rounded(self.metric(key), digits) for key in METRIC_KEYS}
		doc["n"] = self.n
		if include_nmse:
			doc["nmse"] = rounded(self.nmse, digits)
		if self.mape_note:
			doc["mape_note"] = self.mape_note
		return doc


def _paired_arrays(a, b, min_length, what):
	a = np.asarray(a, dtype=np.float64).ravel()
	b = np.asarray(b, dtype=np.float64).ravel()
	if len(a) != len(b):
		throw(f"{what}: length mismatch ({len(a)} vs {len(b)})", DimensionError)
	if len(a) < min_length:
		throw(f"{what}: need at least {min_length} values, got {len(a)}", ValidationError)
	if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
		throw(f"{what}: values must be finite", ValidationError)
	return a, b


def compute_metrics(observed, predicted):
	y, p = _paired_arrays(observed, predicted, 2, "compute_metrics")
	if np.all(y == y[0]):
		throw("Observed series is constant; R-squared is undefined", DegenerateStatisticsError)

	residual = p - y
	sq_err = float(np.sum(residual**2))
	abs_err = np.abs(residual)
	nmse = sq_err / float(np.sum(y**2))

	mape, mape_note = None, None
	zeros = np.flatnonzero(y == 0.0)
	if zeros.size:
		mape_note = f"undefined: observed value is zero at index {int(zeros[0])}"
	else:
		mape = float(np.mean(abs_err / np.abs(y)))

	return MetricsReport(
		nrmse=math.sqrt(nmse),
		mae=float(np.mean(abs_err)),
		mape=mape,
		wape=float(np.sum(abs_err) / np.sum(np.abs(y))),
		r_squared=1.0 - sq_err / float(np.sum((y - y.mean()) ** 2)),
		n=len(y),
		nmse=nmse,
		mape_note=mape_note,
	)


def position_error(a, b, literal=False):
	"""Euclidean distance between two points.

	With `literal`, the unsquared form sqrt(sum(b - a)) is used instead; a negative
	radicand is an error.
	"""
	a, b = _paired_arrays(a, b, 1, "position_error")
	if not literal:
		return math.sqrt(float(np.sum((b - a) ** 2)))
	radicand = float(np.sum(b - a))
	if radicand < 0.0:
		throw(f"position_error (literal form): negative radicand {radicand}", ValidationError)
	return math.sqrt(radicand)

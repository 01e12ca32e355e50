# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

import importlib
import json
import logging
import math

import numpy as np

from rdv_swarm.exceptions import ValidationError

logger = logging.getLogger("rdv_swarm")


def throw(msg, exc=ValidationError):
	raise exc(msg)


def as_json(obj, indent=1):
	return json.dumps(obj, indent=indent, sort_keys=True, default=_json_default)


def _json_default(obj):
	if isinstance(obj, np.integer):
		return int(obj)
	if isinstance(obj, np.floating):
		return float(obj)
	if isinstance(obj, np.ndarray):
		return obj.tolist()
	if hasattr(obj, "as_dict"):
		return obj.as_dict()
	raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def log_error(title, payload=None):
	"""Log a titled JSON payload at error level"""
	logger.error("%s\n%s", title, as_json(payload) if payload is not None else "")


def get_attr(method_string):
	"""Resolve a dotted path like `pkg.module.attr`"""
	modulename, _, methodname = method_string.rpartition(".")
	if not modulename:
		throw(f"Invalid method path {method_string!r}")
	return getattr(importlib.import_module(modulename), methodname)


def rounded(value, digits=9):
	"""Round to `digits` significant digits; None and non-finite values pass through"""
	if value is None:
		return None
	value = float(value)
	if not math.isfinite(value):
		return value
	return float(f"{value:.{digits}g}")


def derive_seed(base_seed, *indices):
	"""Platform-independent 64-bit seed for (base_seed, cell, trial, ...).

	numpy's SeedSequence hashes the entropy with the spawn key, so every index tuple gets an
	independent stream and the mapping never depends on execution order.
	"""
	seq = np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(i) for i in indices))
	return int(seq.generate_state(1, dtype=np.uint64)[0])

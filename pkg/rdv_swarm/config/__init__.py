# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

"""Module defaults. The CLI reads its defaults from here."""

import os

from rdv_swarm.exceptions import ValidationError

SEED_ENV_VAR = "RDV_SWARM_SEED"
FALLBACK_SEED = 42

# swarm
SWARM_SIZE = 30
MAX_ITERATIONS = 100
C1 = 2.0
C2 = 2.0
POSITION_LIMIT = 10.0
INIT_POSITION_RANGE = (-1.0, 1.0)
INIT_VELOCITY_RANGE = (-0.1, 0.1)
INERTIA_SCOPE = "particle"

# inertia weight
IW_KIND = "rdv"
ALPHA = 0.4
ALPHA_DUMP = 0.9
DECAY_SHARPNESS = 1.0
CONSTANT_W = 1.0
W_MAX = 0.9
W_MIN = 0.4

# network
LAGS = 12
HIDDEN_SIZES = (10,)
HIDDEN_ACTIVATION = "tanh"
OUTPUT_ACTIVATION = "identity"

# data
DIFFERENCE_ORDER = 1
DIFFERENCE_ORDERS = (0, 1)
SPLIT_RATIOS = (0.70, 0.15, 0.15)
SPLIT_MODE = "chronological"
RATIO_TOLERANCE = 1e-9
MIN_SPLIT_LENGTH = 10

# synthetic series
SYNTH_LENGTH = 166
SYNTH_START = "2009-03"
SYNTH_LEVEL = 100.0
SYNTH_TREND = 3.0
SYNTH_AMPLITUDE = 10.0
SYNTH_PERIOD = 12
SYNTH_NOISE = 1.0

# experiments
STABILIZATION_WINDOW = 3
STABILIZATION_REL_TOL = 0.05
RUNS = 10
ALPHA_GRID = "0.1:1.0:0.1"
DUMP_GRID = "0.5:0.95:0.05"
SWEEP_AGGREGATE = "mean"
BENCH_FUNCTION = "sphere"
BENCH_DIM = 2

# statistics
ALPHA_LEVEL = 0.05
TAIL = "one"

REPORT_DIGITS = 9


def default_seed():
	"""Seed from the environment fallback, else the fixed default"""
	value = os.environ.get(SEED_ENV_VAR)
	if value is None or not value.strip():
		return FALLBACK_SEED
	try:
		seed = int(value)
	except ValueError:
		raise ValidationError(f"{SEED_ENV_VAR}={value!r} is not an integer seed") from None
	if not 0 <= seed < 2**64:
		raise ValidationError(f"{SEED_ENV_VAR}={value!r} is outside the unsigned 64-bit range")
	return seed

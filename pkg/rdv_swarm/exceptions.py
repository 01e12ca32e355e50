# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt


class RdvSwarmError(Exception):
	exit_code = 1


class ValidationError(RdvSwarmError):
	exit_code = 2


class DimensionError(ValidationError):
	pass


class DataError(RdvSwarmError):
	exit_code = 3


class DegenerateSeriesError(DataError):
	pass


class InsufficientHistoryError(DataError):
	pass


class ObjectiveError(RdvSwarmError):
	"""Objective declared total returned a non-finite value."""

	exit_code = 3


class DegenerateStatisticsError(RdvSwarmError):
	exit_code = 4

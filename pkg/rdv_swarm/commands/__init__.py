# Copyright (c) 2026, rdv_swarm and contributors
# For license information, please see license.txt

"""rdv-swarm command line: train, forecast, sweep, compare, bench, synth and replay."""

import argparse
import json
import logging
import os
import sys

import pandas as pd

from rdv_swarm import __version__, config, hooks
from rdv_swarm.evaluation.experiments.experiments import (
	AGGREGATES,
	BenchmarkProblem,
	SweepSpec,
	compare_variants,
	comparison_as_dict,
	grid_sweep,
	parse_grid,
	stabilization_iteration,
	write_sweep_csv,
)
from rdv_swarm.evaluation.stats_tests.stats_tests import TAILS
from rdv_swarm.exceptions import DataError, DegenerateStatisticsError, RdvSwarmError, ValidationError
from rdv_swarm.forecasting.forecaster.forecaster import (
	SPLIT_MODES,
	forecast_levels,
	prepare_problem,
	train_forecaster,
)
from rdv_swarm.forecasting.nar_net.nar_net import (
	HIDDEN_ACTIVATIONS,
	OUTPUT_ACTIVATIONS,
	load_model,
	save_model,
)
from rdv_swarm.forecasting.series_io.series_io import load_series, save_series, synthetic_series
from rdv_swarm.swarm.inertia_rdv.inertia_rdv import build_strategy, strategy_from_dict
from rdv_swarm.swarm.pso_engine.pso_engine import INERTIA_SCOPES, PsoConfig, run_pso
from rdv_swarm.utils import as_json, log_error, rounded, throw

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
REPORT_FILE = "report.json"
TRACE_FILE = "trace.csv"
MODEL_FILE = "model.json"


# Argument types
# ------------------------------


def positive_int(text):
	value = _parse(int, text)
	if value < 1:
		raise argparse.ArgumentTypeError(f"must be an integer >= 1, got {text!r}")
	return value


def non_negative_int(text):
	value = _parse(int, text)
	if value < 0:
		raise argparse.ArgumentTypeError(f"must be an integer >= 0, got {text!r}")
	return value


def window_length(text):
	value = _parse(int, text)
	if value < 2:
		raise argparse.ArgumentTypeError(f"must be an integer >= 2, got {text!r}")
	return value


def seed_value(text):
	value = _parse(int, text)
	if not 0 <= value < 2**64:
		raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer, got {text!r}")
	return value


def non_negative_float(text):
	value = _parse(float, text)
	if not value >= 0.0:
		raise argparse.ArgumentTypeError(f"must be >= 0, got {text!r}")
	return value


def positive_float(text):
	value = _parse(float, text)
	if not value > 0.0:
		raise argparse.ArgumentTypeError(f"must be > 0, got {text!r}")
	return value


def unit_interval(text):
	value = _parse(float, text)
	if not 0.0 < value <= 1.0:
		raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text!r}")
	return value


def open_unit_interval(text):
	value = _parse(float, text)
	if not 0.0 < value < 1.0:
		raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text!r}")
	return value


def hidden_sizes(text):
	"""Comma-separated layer widths; an empty string means no hidden layer"""
	if not text.strip():
		return ()
	return tuple(positive_int(part) for part in text.split(","))


def split_ratios(text):
	parts = text.split(",")
	if len(parts) != 3:
		raise argparse.ArgumentTypeError(f"needs three comma-separated ratios train,val,test, got {text!r}")
	ratios = tuple(positive_float(part) for part in parts)
	if abs(sum(ratios) - 1.0) > config.RATIO_TOLERANCE:
		raise argparse.ArgumentTypeError(f"ratios must sum to 1, got {text!r}")
	return ratios


def grid(text):
	try:
		return parse_grid(text)
	except ValidationError as e:
		raise argparse.ArgumentTypeError(str(e)) from None


def _parse(cast, text):
	try:
		return cast(text)
	except ValueError:
		raise argparse.ArgumentTypeError(f"invalid {cast.__name__} value {text!r}") from None


# Parser
# ------------------------------


def _common_arguments():
	parent = argparse.ArgumentParser(add_help=False)
	parent.add_argument("--log-level", choices=LOG_LEVELS, default="WARNING", help="logging threshold")
	return parent


def _swarm_arguments():
	parent = argparse.ArgumentParser(add_help=False)
	group = parent.add_argument_group("swarm")
	group.add_argument("--swarm", type=positive_int, default=config.SWARM_SIZE, help="particles in the swarm")
	group.add_argument("--iters", type=positive_int, default=config.MAX_ITERATIONS, help="iterations per run")
	group.add_argument("--c1", type=non_negative_float, default=config.C1, help="cognitive coefficient")
	group.add_argument("--c2", type=non_negative_float, default=config.C2, help="social coefficient")
	group.add_argument("--limit", type=positive_float, default=config.POSITION_LIMIT, help="symmetric position bound")
	group.add_argument(
		"--seed",
		type=seed_value,
		default=config.default_seed(),
		help=f"base seed (falls back to ${config.SEED_ENV_VAR}, then {config.FALLBACK_SEED})",
	)
	group.add_argument(
		"--inertia-scope",
		choices=INERTIA_SCOPES,
		default=config.INERTIA_SCOPE,
		help="query the inertia strategy per particle or once per iteration",
	)
	return parent


def _inertia_arguments():
	parent = argparse.ArgumentParser(add_help=False)
	group = parent.add_argument_group("inertia weight")
	group.add_argument("--iw", choices=sorted(hooks.inertia_strategies), default=config.IW_KIND, help="strategy")
	group.add_argument("--alpha", type=unit_interval, default=config.ALPHA, help="rdv starting alpha")
	group.add_argument("--alpha-dump", type=unit_interval, default=config.ALPHA_DUMP, help="rdv damping factor")
	group.add_argument(
		"--decay-sharpness", type=positive_float, default=config.DECAY_SHARPNESS, help="rdv gate sharpness k"
	)
	group.add_argument("--w", type=positive_float, default=config.CONSTANT_W, help="constant weight")
	group.add_argument("--w-max", type=positive_float, default=config.W_MAX, help="linear start weight")
	group.add_argument("--w-min", type=positive_float, default=config.W_MIN, help="linear end weight")
	return parent


def _data_arguments(required):
	parent = argparse.ArgumentParser(add_help=False)
	group = parent.add_argument_group("series and network")
	group.add_argument("--data", required=required, help="month,value CSV series")
	group.add_argument("--lags", type=positive_int, default=config.LAGS, help="lag count m")
	group.add_argument(
		"--hidden",
		type=hidden_sizes,
		default=",".join(str(h) for h in config.HIDDEN_SIZES),
		help="comma-separated hidden layer widths ('' for none)",
	)
	group.add_argument(
		"--activation", choices=HIDDEN_ACTIVATIONS, default=config.HIDDEN_ACTIVATION, help="hidden activation"
	)
	group.add_argument(
		"--output-activation", choices=OUTPUT_ACTIVATIONS, default=config.OUTPUT_ACTIVATION, help="output activation"
	)
	group.add_argument(
		"--split",
		type=split_ratios,
		default=",".join(str(r) for r in config.SPLIT_RATIOS),
		help="train,val,test ratios",
	)
	group.add_argument("--split-mode", choices=SPLIT_MODES, default=config.SPLIT_MODE, help="segment assignment")
	group.add_argument(
		"--difference",
		type=int,
		choices=config.DIFFERENCE_ORDERS,
		default=config.DIFFERENCE_ORDER,
		help="model month-on-month changes (1) or levels (0)",
	)
	group.add_argument(
		"--literal-eq18",
		action="store_true",
		help="use the unsquared position error sqrt(sum(b - a)) as fitness",
	)
	return parent


def _benchmark_arguments():
	parent = argparse.ArgumentParser(add_help=False)
	group = parent.add_argument_group("benchmark")
	group.add_argument(
		"--function", choices=sorted(hooks.benchmark_functions), default=config.BENCH_FUNCTION, help="objective"
	)
	group.add_argument("--dim", type=positive_int, default=config.BENCH_DIM, help="search space dimension")
	return parent


def _stabilization_arguments():
	parent = argparse.ArgumentParser(add_help=False)
	group = parent.add_argument_group("stabilization")
	group.add_argument(
		"--window", type=window_length, default=config.STABILIZATION_WINDOW, help="flat window length"
	)
	group.add_argument(
		"--rel-tol", type=non_negative_float, default=config.STABILIZATION_REL_TOL, help="relative flatness tolerance"
	)
	return parent


def build_parser():
	formatter = argparse.ArgumentDefaultsHelpFormatter
	parser = argparse.ArgumentParser(
		prog="rdv-swarm", description=hooks.app_description, formatter_class=formatter
	)
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	commands = parser.add_subparsers(dest="command", required=True, metavar="command")

	common, swarm, inertia = _common_arguments(), _swarm_arguments(), _inertia_arguments()
	stabilization = _stabilization_arguments()

	train = commands.add_parser(
		"train",
		help="fit a lag network with PSO on a CSV series",
		parents=[common, _data_arguments(True), swarm, inertia, stabilization],
		formatter_class=formatter,
	)
	train.add_argument("--out", default="rdv_swarm_run", help="output directory for model, report and trace")
	train.add_argument("--nmse", action="store_true", help="also report the unrooted nmse")

	forecast = commands.add_parser(
		"forecast", help="recursive forecast from a saved model", parents=[common], formatter_class=formatter
	)
	forecast.add_argument("--model", required=True, help="model JSON written by train")
	forecast.add_argument("--data", required=True, help="month,value CSV history")
	forecast.add_argument("--horizon", type=non_negative_int, default=12, help="months to forecast")
	forecast.add_argument("--out", help="output CSV (stdout when omitted)")

	sweep = commands.add_parser(
		"sweep",
		help="grid sweep of rdv alpha x alpha_dump",
		parents=[common, _data_arguments(False), _benchmark_arguments(), swarm],
		formatter_class=formatter,
	)
	sweep.add_argument("--alpha-grid", type=grid, default=config.ALPHA_GRID, help="start:stop:step")
	sweep.add_argument("--dump-grid", type=grid, default=config.DUMP_GRID, help="start:stop:step")
	sweep.add_argument("--decay-sharpness", type=positive_float, default=config.DECAY_SHARPNESS, help="gate k")
	sweep.add_argument("--runs", type=positive_int, default=config.RUNS, help="runs per cell")
	sweep.add_argument("--jobs", type=positive_int, default=1, help="worker processes")
	sweep.add_argument("--aggregate", choices=AGGREGATES, default=config.SWEEP_AGGREGATE, help="cell score")
	sweep.add_argument("--out", default="sweep.csv", help="output CSV")

	compare = commands.add_parser(
		"compare",
		help="paired comparison of two inertia strategies",
		parents=[common, _data_arguments(False), _benchmark_arguments(), swarm, inertia, stabilization],
		formatter_class=formatter,
	)
	compare.add_argument(
		"--baseline", choices=sorted(hooks.inertia_strategies), default="constant", help="second variant"
	)
	compare.add_argument("--runs", type=positive_int, default=config.RUNS, help="paired trials")
	compare.add_argument("--jobs", type=positive_int, default=1, help="worker processes")
	compare.add_argument("--tail", choices=TAILS, default=config.TAIL, help="t-test tail")
	compare.add_argument(
		"--alpha-level", type=open_unit_interval, default=config.ALPHA_LEVEL, help="significance level"
	)
	compare.add_argument("--out", default="comparison.json", help="output JSON")

	bench = commands.add_parser(
		"bench",
		help="one PSO run on a benchmark objective",
		parents=[common, _benchmark_arguments(), swarm, inertia, stabilization],
		formatter_class=formatter,
	)
	bench.add_argument("--out", default="rdv_swarm_bench", help="output directory for report and trace")

	synth = commands.add_parser(
		"synth", help="write a synthetic monthly series", parents=[common], formatter_class=formatter
	)
	synth.add_argument("--out", required=True, help="output CSV")
	synth.add_argument("--length", type=positive_int, default=config.SYNTH_LENGTH, help="months")
	synth.add_argument("--start", default=config.SYNTH_START, help="first month YYYY-MM")
	synth.add_argument("--level", type=float, default=config.SYNTH_LEVEL, help="starting level")
	synth.add_argument("--trend", type=float, default=config.SYNTH_TREND, help="increase per month")
	synth.add_argument("--amplitude", type=float, default=config.SYNTH_AMPLITUDE, help="seasonal amplitude")
	synth.add_argument("--period", type=positive_int, default=config.SYNTH_PERIOD, help="seasonal period in months")
	synth.add_argument("--noise", type=non_negative_float, default=config.SYNTH_NOISE, help="Gaussian noise sd")
	synth.add_argument("--seed", type=seed_value, default=config.default_seed(), help="noise seed")

	replay = commands.add_parser(
		"replay", help="re-run the configuration stored in a report", parents=[common], formatter_class=formatter
	)
	replay.add_argument("--report", required=True, help="report JSON written by train or bench")
	replay.add_argument("--out", default="rdv_swarm_replay", help="output directory")

	return parser


# Resolution
# ------------------------------


def pso_config_from_args(args):
	return PsoConfig(
		swarm_size=args.swarm,
		max_iterations=args.iters,
		c1=args.c1,
		c2=args.c2,
		position_limit=args.limit,
		seed=args.seed,
		inertia_scope=args.inertia_scope,
	)


def strategy_from_args(args, kind=None):
	return build_strategy(
		kind or args.iw,
		w=args.w,
		w_max=args.w_max,
		w_min=args.w_min,
		alpha=args.alpha,
		alpha_dump=args.alpha_dump,
		decay_sharpness=args.decay_sharpness,
	)


def problem_config_from_args(args):
	if getattr(args, "data", None):
		return {
			"kind": "forecast",
			"data": os.path.abspath(args.data),
			"lags": args.lags,
			"hidden_sizes": list(args.hidden),
			"hidden_activation": args.activation,
			"output_activation": args.output_activation,
			"ratios": list(args.split),
			"split_mode": args.split_mode,
			"split_seed": args.seed,
			"literal_eq18": args.literal_eq18,
			"difference": args.difference,
		}
	return {"kind": "benchmark", "function": args.function, "dim": args.dim}


def build_problem(problem_config):
	if problem_config["kind"] == "benchmark":
		return BenchmarkProblem(problem_config["function"], problem_config["dim"])
	return prepare_problem(
		load_series(problem_config["data"]),
		lags=problem_config["lags"],
		hidden_sizes=tuple(problem_config["hidden_sizes"]),
		hidden_activation=problem_config["hidden_activation"],
		output_activation=problem_config["output_activation"],
		ratios=tuple(problem_config["ratios"]),
		split_mode=problem_config["split_mode"],
		seed=problem_config["split_seed"],
		literal=problem_config["literal_eq18"],
		difference=problem_config.get("difference", 0),
	)


def resolve_run(args):
	"""Every setting of a train or bench run, defaults made explicit"""
	return {
		"command": args.command,
		"problem": problem_config_from_args(args),
		"pso": pso_config_from_args(args).as_dict(),
		"iw": strategy_from_args(args).as_dict(),
		"stabilization": {"window": args.window, "rel_tol": args.rel_tol},
		"nmse": getattr(args, "nmse", False),
	}


# Runs
# ------------------------------


def execute_run(resolved, out_dir):
	"""Run a resolved train/bench configuration, write its outputs and return the report"""
	pso = PsoConfig(**resolved["pso"])
	strategy = strategy_from_dict(resolved["iw"])
	problem = build_problem(resolved["problem"])
	_make_dir(out_dir)
	outputs = {"trace": os.path.abspath(os.path.join(out_dir, TRACE_FILE))}

	if resolved["problem"]["kind"] == "forecast":
		model = train_forecaster(problem, pso, strategy)
		result = model.result
		outputs["model"] = os.path.abspath(os.path.join(out_dir, MODEL_FILE))
		_write(save_model, outputs["model"], model.net, model.scaler, model.difference)
		metrics = model.metrics_as_dict(include_nmse=resolved["nmse"])
		metrics["train_pe"] = {space: rounded(v) for space, v in model.train_pe.items()}
	else:
		result = run_pso(pso, problem.dim, problem.objective(), strategy, objective_total=problem.objective_total)
		metrics = {"gbest_fitness": rounded(result.gbest_fitness)}

	result.trace.to_csv(outputs["trace"])
	window, rel_tol = resolved["stabilization"]["window"], resolved["stabilization"]["rel_tol"]
	stable = None
	if len(result.trace) >= window:
		index = stabilization_iteration(result.trace, window, rel_tol)
		stable = None if index is None else index + 1

	report = {
		"tool": {"name": hooks.app_name, "version": __version__},
		"config": resolved,
		"seed": pso.seed,
		"metrics": metrics,
		"convergence": {
			"final_pe": result.gbest_fitness,
			"iterations": result.iterations_run,
			"elapsed_seconds": result.elapsed_seconds,
			"stabilization_iteration": stable,
			"damping_events": result.damping_events,
			"final_inertia": result.final_inertia,
		},
		"gbest_position": [float(v) for v in result.gbest_position],
		"outputs": outputs,
	}
	_write_json(os.path.join(out_dir, REPORT_FILE), report)
	return report


def reproducible_part(report):
	"""The report fields a replay must reproduce exactly"""
	convergence = {k: v for k, v in report["convergence"].items() if k != "elapsed_seconds"}
	return {"metrics": report["metrics"], "convergence": convergence, "gbest_position": report["gbest_position"]}


# Commands
# ------------------------------


def train(args):
	report = execute_run(resolve_run(args), args.out)
	print(as_json({"metrics": report["metrics"]["test"]["raw"], "outputs": report["outputs"]}))


def bench(args):
	report = execute_run(resolve_run(args), args.out)
	print(as_json({"gbest_fitness": report["convergence"]["final_pe"], "outputs": report["outputs"]}))


def forecast(args):
	net, scaler, difference = load_model(args.model)
	series = load_series(args.data)
	predictions = forecast_levels(net, scaler, series.values, args.horizon, difference)
	last = pd.Period(series.timestamps[-1], freq="M")
	frame = pd.DataFrame(
		{"month": [str(last + k) for k in range(1, len(predictions) + 1)], "value": [repr(p) for p in predictions]}
	)
	if args.out:
		_write(frame.to_csv, args.out, index=False)
	else:
		frame.to_csv(sys.stdout, index=False)


def sweep(args):
	problem_config = problem_config_from_args(args)
	spec = SweepSpec(
		alpha_grid=args.alpha_grid,
		dump_grid=args.dump_grid,
		runs_per_cell=args.runs,
		base_config=pso_config_from_args(args),
		problem=build_problem(problem_config),
		decay_sharpness=args.decay_sharpness,
	)
	result = grid_sweep(spec, jobs=args.jobs, aggregate=args.aggregate)
	write_sweep_csv(args.out, result)
	best = result.best
	print(as_json({"alpha": best.alpha, "alpha_dump": best.alpha_dump, "pe": best.score(args.aggregate), "out": args.out}))


def compare(args):
	problem_config = problem_config_from_args(args)
	study = args.iw
	baseline = args.baseline if args.baseline != args.iw else f"{args.baseline}_baseline"
	variants = [(study, strategy_from_args(args)), (baseline, strategy_from_args(args, args.baseline))]
	report = compare_variants(
		build_problem(problem_config),
		variants,
		trials=args.runs,
		base_config=pso_config_from_args(args),
		jobs=args.jobs,
		window=args.window,
		rel_tol=args.rel_tol,
		alpha_level=args.alpha_level,
		tail=args.tail,
	)
	doc = comparison_as_dict(report)
	doc["tool"] = {"name": hooks.app_name, "version": __version__}
	doc["config"] = {"problem": problem_config, "pso": pso_config_from_args(args).as_dict(), "jobs": args.jobs}
	_write_json(args.out, doc)
	degenerate = sorted(key for key, result in report.t_tests.items() if isinstance(result, str))
	if degenerate:
		throw(f"t-test undefined for {', '.join(degenerate)}; report written to {args.out}", DegenerateStatisticsError)
	print(as_json({"t_tests": doc["t_tests"], "out": args.out}))


def synth(args):
	series = synthetic_series(
		n=args.length,
		start=args.start,
		level=args.level,
		trend=args.trend,
		amplitude=args.amplitude,
		period=args.period,
		noise=args.noise,
		seed=args.seed,
	)
	_write(save_series, args.out, series)


def replay(args):
	try:
		with open(args.report, encoding="utf-8") as f:
			original = json.load(f)
		resolved = original["config"]
	except OSError as e:
		throw(f"Cannot read report {args.report}: {e}", DataError)
	except (json.JSONDecodeError, KeyError, TypeError) as e:
		throw(f"{args.report} is not a run report: {e}", DataError)
	if resolved.get("command") not in ("train", "bench"):
		throw(f"{args.report} holds a {resolved.get('command')!r} run; only train and bench reports replay", DataError)

	report = execute_run(resolved, args.out)
	if reproducible_part(report) != reproducible_part(original):
		log_error("Replay diverged", {"original": reproducible_part(original), "replay": reproducible_part(report)})
		throw(f"Replay of {args.report} did not reproduce the original outputs", RdvSwarmError)
	print(as_json({"reproduced": True, "outputs": report["outputs"]}))


COMMANDS = {
	"train": train,
	"forecast": forecast,
	"sweep": sweep,
	"compare": compare,
	"bench": bench,
	"synth": synth,
	"replay": replay,
}


# Helpers
# ------------------------------


def _make_dir(path):
	try:
		os.makedirs(path, exist_ok=True)
	except OSError as e:
		throw(f"Cannot create output directory {path}: {e}", DataError)


def _write(writer, path, *args, **kwargs):
	try:
		writer(path, *args, **kwargs)
	except OSError as e:
		throw(f"Cannot write {path}: {e}", DataError)


def _write_json(path, doc):
	def dump(target):
		with open(target, "w", encoding="utf-8") as f:
			f.write(as_json(doc))
			f.write("\n")

	_write(dump, path)


def setup_logging(level):
	logging.basicConfig(
		level=getattr(logging, level),
		format="%(asctime)s %(levelname)s %(name)s: %(message)s",
		stream=sys.stderr,
		force=True,
	)


def dispatch(argv):
	"""Run one command line; returns the process exit code"""
	try:
		args = build_parser().parse_args(argv)
	except SystemExit as e:
		return e.code if isinstance(e.code, int) else 2
	except RdvSwarmError as e:
		print(f"rdv-swarm: error: {e}", file=sys.stderr)
		return e.exit_code

	setup_logging(args.log_level)
	try:
		COMMANDS[args.command](args)
	except RdvSwarmError as e:
		logger.debug("%s failed", args.command, exc_info=True)
		print(f"rdv-swarm {args.command}: error: {e}", file=sys.stderr)
		return e.exit_code
	except OSError as e:
		print(f"rdv-swarm {args.command}: error: {e}", file=sys.stderr)
		return DataError.exit_code
	return 0


def main(argv=None):
	return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
	sys.exit(main())

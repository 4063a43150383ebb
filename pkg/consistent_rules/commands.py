# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from consistent_rules import __version__, experiment, hooks
from consistent_rules.archive import ModelArchive, dump_archive, load_archive
from consistent_rules.config import ExperimentSettings, dump_settings, load_settings
from consistent_rules.dataset import convert_arff, load_dataset, load_folds, save_folds
from consistent_rules.exceptions import RuleEngineError, throw
from consistent_rules.metrics import micro_fscore
from consistent_rules.rule_model import predict_all, render_model

LOG_FORMAT = "{time:HH:mm:ss} | {level: <8} | {message}"

# flags that override the settings file, mapped to settings fieldnames
SETTINGS_FLAGS = {
	"dataset": "dataset",
	"labels": "labels",
	"folds": "folds",
	"runs": "runs",
	"pop_size": "pop_size",
	"generations": "generations",
	"mutants": "mutants",
	"max_failed": "max_failed",
	"t": "t",
	"seed": "seed",
	"out": "out",
	"jobs": "jobs",
}


class ArgumentParser(argparse.ArgumentParser):
	"""Usage errors are validation errors (exit code 1)."""

	def error(self, message):
		throw(message)


def configure_logging(verbose: bool = False, log_file: Path | None = None) -> int | None:
	"""stderr sink at INFO (DEBUG when verbose); optional DEBUG file sink, whose id is returned."""
	logger.remove()
	logger.add(sys.stderr, level="DEBUG" if verbose else "INFO", format=LOG_FORMAT)
	if log_file is None:
		return None
	return logger.add(log_file, level="DEBUG", format=LOG_FORMAT, mode="w")


def resolve_settings(args: argparse.Namespace, cross_validating: bool = False) -> ExperimentSettings:
	overrides = {fieldname: getattr(args, flag, None) for flag, fieldname in SETTINGS_FLAGS.items()}
	settings = load_settings(getattr(args, "config", None), overrides)
	settings.validate(cross_validating=cross_validating)
	return settings


def output_dir(args: argparse.Namespace) -> Path:
	out = Path(args.out or "out")
	out.mkdir(parents=True, exist_ok=True)
	return out


def pick_model(archive: ModelArchive, model_index: int | None) -> int:
	if model_index is None:
		return archive.best_index
	if not 0 <= model_index < len(archive.models):
		throw(f"Model index {model_index} outside the archive population of {len(archive.models)}")
	return model_index


def parse_order(text: str | None) -> list[int] | None:
	if text is None:
		return None
	try:
		return [int(part) for part in text.split(",")]
	except ValueError:
		throw(f"Expansion order must be comma-separated feature indices, got {text!r}")


def write_table(table: pd.DataFrame, path: Path) -> None:
	table.to_csv(path, index=False)
	logger.info(f"Wrote {path}")


def cmd_train(args: argparse.Namespace) -> int:
	settings = resolve_settings(args)
	dataset = load_dataset(settings.dataset, settings.labels)
	out = Path(settings.out)
	out.mkdir(parents=True, exist_ok=True)
	dump_settings(settings, out / "settings.cfg")

	with open(out / "generations.jsonl", "w", encoding="utf-8") as generations:

		def on_generation(log):
			generations.write(json.dumps(log.to_record()) + "\n")

		result, archive = experiment.train(dataset, settings, on_generation=on_generation)

	dump_archive(archive, out / "archive.json")
	best = archive.best
	fitness = archive.fitness[archive.best_index]
	(out / "best_model.txt").write_text(
		f"# training F-Score {fitness.fscore:.6f}, {fitness.size} rules\n"
		+ render_model(best, archive.default, archive.feature_names, archive.label_names)
		+ "\n",
		encoding="utf-8",
	)
	stop = result.logs[-1].stop_reason if result.logs else None
	logger.info(f"Training finished after {len(result.logs)} generations ({stop.value if stop else 'no generations'})")
	return 0


def cmd_predict(args: argparse.Namespace) -> int:
	archive = load_archive(args.model)
	index = pick_model(archive, args.model_index)
	features, labels = experiment.read_instances(args.dataset, archive)

	prediction = predict_all(archive.models[index], archive.default, features)
	out = output_dir(args)
	write_table(pd.DataFrame(prediction, columns=list(archive.label_names)), out / "predictions.csv")
	if labels is not None:
		logger.info(f"Micro F-Score of model {index}: {micro_fscore(prediction, labels):.6f}")
	return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
	settings = resolve_settings(args, cross_validating=True)
	dataset = load_dataset(settings.dataset, settings.labels)
	out = Path(settings.out)
	archive_dir = out / "archives"
	archive_dir.mkdir(parents=True, exist_ok=True)
	dump_settings(settings, out / "settings.cfg")

	split = load_folds(args.folds_file, dataset.num_instances) if args.folds_file else None
	split, results = experiment.cross_validate(dataset, settings, split, archive_dir)
	save_folds(split, out / "folds.csv")
	write_table(experiment.evaluation_table(results), out / "evaluation.csv")
	write_table(experiment.fold_table(results), out / "evaluation_folds.csv")

	scores = np.array([r.test_fscore for r in results])
	sizes = np.array([r.size for r in results])
	logger.info(f"Mean test F-Score {scores.mean():.4f}, mean size {sizes.mean():.2f} over {len(results)} jobs")
	return 0


def cmd_pareto(args: argparse.Namespace) -> int:
	archives = [load_archive(path) for path in args.archives]
	curve = experiment.pareto_curve(archives)
	out = output_dir(args)
	write_table(curve, out / "pareto.csv")
	(out / "pareto.svg").write_text(experiment.render_svg(curve), encoding="utf-8")
	logger.info(f"{len(curve)} non-dominated rows from {len(archives)} archive(s)")
	return 0


def cmd_cfsbe_trace(args: argparse.Namespace) -> int:
	archive = load_archive(args.model)
	index = pick_model(archive, args.model_index)
	features, _ = experiment.read_instances(args.dataset, archive)
	box, trace, order = experiment.expansion_trace(
		archive, index, features, args.instance, parse_order(args.order), np.random.default_rng(args.seed or 0)
	)

	print(f"model {index}, instance {args.instance}, order {list(order)}")
	for step in trace:
		print(step)
	print("box: " + " x ".join(f"[{lo}, {up})" for lo, up in zip(box.lower, box.upper)))
	return 0


def cmd_show(args: argparse.Namespace) -> int:
	archive = load_archive(args.model)
	index = pick_model(archive, args.model_index)
	fitness = archive.fitness[index]
	print(f"model {index}: training F-Score {fitness.fscore:.6f}, {fitness.size} rules")
	print(render_model(archive.models[index], archive.default, archive.feature_names, archive.label_names))
	return 0


def cmd_sweep_t(args: argparse.Namespace) -> int:
	settings = resolve_settings(args)
	dataset = load_dataset(settings.dataset, settings.labels)
	candidates = hooks.t_sweep_values
	if args.candidates:
		try:
			candidates = [int(v) for v in args.candidates.split(",")]
		except ValueError:
			throw(f"Candidates must be comma-separated integers, got {args.candidates!r}")
		if min(candidates) < 1:
			throw("Candidate t values must be positive")

	out = Path(settings.out)
	out.mkdir(parents=True, exist_ok=True)
	dump_settings(settings, out / "settings.cfg")
	table = experiment.sweep_t(dataset, settings, candidates)
	write_table(table, out / "sweep_t.csv")
	logger.info(f"Selected t={int(table.loc[table['selected'] == 1, 't'].iloc[0])}")
	return 0


def cmd_convert_arff(args: argparse.Namespace) -> int:
	dataset = convert_arff(args.arff, args.csv, args.labels)
	logger.info(f"Converted {dataset.num_instances} instances to {args.csv}")
	return 0


def add_settings_flags(parser: argparse.ArgumentParser) -> None:
	group = parser.add_argument_group("experiment settings (override --config)")
	group.add_argument("--config", help="key = value settings file")
	group.add_argument("--dataset", help="comma-separated dataset with a header row")
	group.add_argument("--labels", type=int, help="number of trailing label columns")
	group.add_argument("--folds", type=int)
	group.add_argument("--runs", type=int)
	group.add_argument("--pop-size", dest="pop_size", type=int)
	group.add_argument("--generations", type=int)
	group.add_argument("--mutants", type=int)
	group.add_argument("--max-failed", dest="max_failed", type=int)
	group.add_argument("--t", type=int)
	group.add_argument("--seed", type=int)
	group.add_argument("--out", help="output directory")
	group.add_argument("--jobs", type=int, help="worker processes for cross-validation")


def add_model_flags(parser: argparse.ArgumentParser) -> None:
	parser.add_argument("--model", required=True, help="model archive written by train or evaluate")
	parser.add_argument("--model-index", dest="model_index", type=int, help="population index (default: best)")


def build_parser() -> argparse.ArgumentParser:
	parser = ArgumentParser(prog="consistent-rules", description=hooks.app_description)
	parser.add_argument("--version", action="version", version=f"{hooks.app_title} {__version__} ({hooks.app_license})")
	parser.add_argument("--verbose", action="store_true", help="log every generation")
	commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

	train = commands.add_parser("train", help="evolve a population on a dataset and archive it")
	add_settings_flags(train)
	train.set_defaults(func=cmd_train)

	evaluate = commands.add_parser("evaluate", help="cross-validate: folds x runs of train and test")
	add_settings_flags(evaluate)
	evaluate.add_argument("--folds-file", dest="folds_file", help="instance_index,fold_index assignment")
	evaluate.set_defaults(func=cmd_evaluate)

	predict = commands.add_parser("predict", help="label a dataset with an archived model")
	add_model_flags(predict)
	predict.add_argument("--dataset", required=True)
	predict.add_argument("--out")
	predict.set_defaults(func=cmd_predict)

	pareto = commands.add_parser("pareto", help="averaged compromise curve of several archives")
	pareto.add_argument("archives", nargs="+")
	pareto.add_argument("--out")
	pareto.set_defaults(func=cmd_pareto)

	trace = commands.add_parser("cfsbe-trace", help="show the box enlargement around one uncovered instance")
	add_model_flags(trace)
	trace.add_argument("--dataset", required=True)
	trace.add_argument("--instance", type=int, required=True)
	trace.add_argument("--order", help="comma-separated feature indices (default: random)")
	trace.add_argument("--seed", type=int, help="seed of the random order")
	trace.set_defaults(func=cmd_cfsbe_trace)

	show = commands.add_parser("show", help="print an archived model as readable rules")
	add_model_flags(show)
	show.set_defaults(func=cmd_show)

	sweep = commands.add_parser("sweep-t", help="train once per candidate t and pick the best")
	add_settings_flags(sweep)
	sweep.add_argument("--candidates", help="comma-separated t values")
	sweep.set_defaults(func=cmd_sweep_t)

	convert = commands.add_parser("convert-arff", help="convert a numeric ARFF file to the CSV format")
	convert.add_argument("arff")
	convert.add_argument("csv")
	convert.add_argument("--labels", type=int, required=True)
	convert.set_defaults(func=cmd_convert_arff)
	return parser


def main(argv: Sequence[str] | None = None) -> int:
	"""Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 engine invariant violated."""
	configure_logging()
	file_sink = None
	try:
		args = build_parser().parse_args(argv)
		configure_logging(args.verbose)
		if args.command in ("train", "evaluate", "sweep-t"):
			out = Path(load_settings(args.config, {"out": args.out}).out or "out")
			out.mkdir(parents=True, exist_ok=True)
			file_sink = configure_logging(args.verbose, out / "run.log")
		return args.func(args)
	except RuleEngineError as e:
		logger.error(str(e))
		return e.exit_code
	except OSError as e:
		logger.error(f"I/O error: {e}")
		return 2
	finally:
		if file_sink is not None:
			logger.remove(file_sink)


if __name__ == "__main__":
	sys.exit(main())

# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from consistent_rules import evolution, hooks
from consistent_rules.archive import ModelArchive, dump_archive
from consistent_rules.box_enlargement import ExpansionOrder, ExpansionStep, enlarge_box
from consistent_rules.config import ExperimentSettings
from consistent_rules.dataset import Dataset, FoldSplit, read_numeric_table, split_folds
from consistent_rules.exceptions import PreconditionError, throw
from consistent_rules.metrics import micro_fscore
from consistent_rules.rule_model import Box, predict_all

EVALUATION_COLUMNS = ["fold", "run", "seed", "train_fscore", "test_fscore", "test_fscore_std", "size", "size_std"]
FOLD_COLUMNS = ["fold", "runs", "train_fscore", "test_fscore", "test_fscore_std", "size", "size_std"]
PARETO_COLUMNS = ["fscore", "size", "interpretability"]
SWEEP_COLUMNS = ["t", "train_fscore", "size", "selected"]


def derive_seed(seed: int, fold: int, run: int) -> int:
	"""Seed of one (fold, run) job; independent of scheduling and worker count."""
	return int(np.random.SeedSequence([seed, fold, run]).generate_state(1)[0])


def build_archive(dataset: Dataset, result: evolution.EvolutionResult, settings: ExperimentSettings) -> ModelArchive:
	return ModelArchive(
		feature_names=dataset.feature_names,
		label_names=dataset.label_names,
		default=result.default,
		models=list(result.population),
		fitness=list(result.fitness),
		best_index=result.best_index,
		settings=settings.as_dict(),
	)


def train(
	dataset: Dataset,
	settings: ExperimentSettings,
	rng_seed: int | None = None,
	on_generation: Callable[[evolution.GenerationLog], None] | None = None,
) -> tuple[evolution.EvolutionResult, ModelArchive]:
	result = evolution.run(dataset, settings.evolution_config(rng_seed), on_generation)
	return result, build_archive(dataset, result, settings)


@dataclass(frozen=True)
class JobResult:
	fold: int
	run: int
	seed: int
	train_fscore: float
	test_fscore: float
	size: int


def run_job(
	fold_run: tuple[int, int],
	dataset: Dataset,
	split: FoldSplit,
	settings: ExperimentSettings,
	archive_dir: Path | None = None,
) -> JobResult:
	fold, run = fold_run
	seed = derive_seed(settings.seed, fold, run)
	train_indices, test_indices = split.partition(fold)
	train_data, test_data = dataset.subset(train_indices), dataset.subset(test_indices)

	result, archive = train(train_data, settings, rng_seed=seed)
	best = result.best_index
	model = result.population[best]
	test_fscore = micro_fscore(predict_all(model, result.default, test_data.features), test_data.labels)

	if archive_dir is not None:
		dump_archive(archive, archive_dir / f"fold-{fold}-run-{run}.json")
	logger.info(f"fold {fold} run {run}: test F={test_fscore:.4f}, {model.size} rules")
	return JobResult(fold, run, seed, result.fitness[best].fscore, test_fscore, model.size)


def cross_validate(
	dataset: Dataset,
	settings: ExperimentSettings,
	split: FoldSplit | None = None,
	archive_dir: Path | None = None,
) -> tuple[FoldSplit, list[JobResult]]:
	"""
	Train `runs` models per fold and score each training-best model on the
	held-out fold. Jobs run in `settings.jobs` processes; results come back in
	(fold, run) order.
	"""
	if split is None:
		split = split_folds(dataset, settings.folds, np.random.default_rng(settings.seed))
	elif len(split.assignment) != dataset.num_instances:
		throw(f"Fold file covers {len(split.assignment)} instances, dataset has {dataset.num_instances}")
	if split.fold_count < 2:
		throw("Cross-validation needs at least 2 folds")

	jobs = [(fold, run) for fold in range(split.fold_count) for run in range(settings.runs)]
	work = partial(run_job, dataset=dataset, split=split, settings=settings, archive_dir=archive_dir)
	logger.info(f"Running {len(jobs)} jobs on {settings.jobs} worker(s)")
	if settings.jobs == 1:
		results = [work(job) for job in jobs]
	else:
		with ProcessPoolExecutor(max_workers=settings.jobs) as executor:
			results = list(executor.map(work, jobs))
	return split, results


def evaluation_table(results: Sequence[JobResult]) -> pd.DataFrame:
	"""
	One row per (fold, run) plus an aggregate row.

	The aggregate standard deviations are taken over the per-run averages
	across folds.
	"""
	frame = pd.DataFrame([asdict(r) for r in results])
	per_run = frame.groupby("run")[["test_fscore", "size"]].mean()
	rows = frame.assign(test_fscore_std=None, size_std=None)
	aggregate = {
		"fold": "all",
		"run": "all",
		"seed": None,
		"train_fscore": frame["train_fscore"].mean(),
		"test_fscore": frame["test_fscore"].mean(),
		"test_fscore_std": per_run["test_fscore"].std(ddof=0),
		"size": frame["size"].mean(),
		"size_std": per_run["size"].std(ddof=0),
	}
	table = pd.concat([rows, pd.DataFrame([aggregate])], ignore_index=True)
	return table[EVALUATION_COLUMNS]


def fold_table(results: Sequence[JobResult]) -> pd.DataFrame:
	frame = pd.DataFrame([asdict(r) for r in results])
	grouped = frame.groupby("fold")
	table = pd.DataFrame(
		{
			"runs": grouped["run"].count(),
			"train_fscore": grouped["train_fscore"].mean(),
			"test_fscore": grouped["test_fscore"].mean(),
			"test_fscore_std": grouped["test_fscore"].std(ddof=0),
			"size": grouped["size"].mean(),
			"size_std": grouped["size"].std(ddof=0),
		}
	).reset_index()
	return table[FOLD_COLUMNS]


def population_matrix(archive: ModelArchive) -> np.ndarray:
	"""(fscore, size) rows sorted by F-Score descending, then size ascending."""
	rows = sorted(((f.fscore, f.size) for f in archive.fitness), key=lambda row: (-row[0], row[1]))
	return np.array(rows, dtype=np.float64)


def pareto_curve(archives: Sequence[ModelArchive]) -> pd.DataFrame:
	"""
	Average the sorted population matrices of several runs, turn the size
	into interpretability (1 / size) and keep the non-dominated rows.
	"""
	if not archives:
		throw("At least one archive is required")
	first = archives[0]
	for archive in archives[1:]:
		if (archive.num_features, archive.num_labels) != (first.num_features, first.num_labels):
			throw("Archives were trained on datasets with different arities")
		if len(archive.fitness) != len(first.fitness):
			throw("Archives hold populations of different sizes")

	mean = np.mean([population_matrix(archive) for archive in archives], axis=0)
	fscore, size = mean[:, 0], mean[:, 1]
	dominated = np.array(
		[
			np.any((fscore >= fscore[i]) & (size <= size[i]) & ((fscore > fscore[i]) | (size < size[i])))
			for i in range(len(mean))
		]
	)
	keep = ~dominated
	return pd.DataFrame(
		{"fscore": fscore[keep], "size": size[keep], "interpretability": 1.0 / size[keep]},
	)[PARETO_COLUMNS]


def render_svg(curve: pd.DataFrame, title: str = "Compromise curve") -> str:
	"""Static scatter: interpretability on the horizontal axis, F-Score on the vertical one."""
	width, height, margin = 480, 360, 50
	plot_width, plot_height = width - 2 * margin, height - 2 * margin

	def x(value):
		return margin + value * plot_width

	def y(value):
		return height - margin - value * plot_height

	parts = [
		f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
		f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
		f'<text x="{width / 2}" y="{margin / 2}" text-anchor="middle" font-size="14">{title}</text>',
		f'<line x1="{x(0)}" y1="{y(0)}" x2="{x(1)}" y2="{y(0)}" stroke="black"/>',
		f'<line x1="{x(0)}" y1="{y(0)}" x2="{x(0)}" y2="{y(1)}" stroke="black"/>',
	]
	for tick in np.linspace(0.0, 1.0, 6):
		parts.append(f'<text x="{x(tick):.1f}" y="{y(0) + 16:.1f}" text-anchor="middle" font-size="10">{tick:.1f}</text>')
		parts.append(f'<text x="{x(0) - 6:.1f}" y="{y(tick) + 3:.1f}" text-anchor="end" font-size="10">{tick:.1f}</text>')
	parts.append(
		f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">Interpretability (1 / rules)</text>'
	)
	parts.append(
		f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" '
		f'transform="rotate(-90 14 {height / 2})">Micro F-Score</text>'
	)
	for row in curve.itertuples(index=False):
		parts.append(
			f'<circle cx="{x(row.interpretability):.2f}" cy="{y(row.fscore):.2f}" r="3" fill="steelblue">'
			f"<title>{row.size:.2f} rules, F={row.fscore:.4f}</title></circle>"
		)
	parts.append("</svg>")
	return "\n".join(parts) + "\n"


def sweep_t(
	train_data: Dataset,
	settings: ExperimentSettings,
	candidates: Sequence[int] = tuple(hooks.t_sweep_values),
) -> pd.DataFrame:
	"""
	Train one population per candidate t and mark the t whose training-best
	model reaches the highest training F-Score (smaller t on ties).
	"""
	rows = []
	for t in candidates:
		cfg = replace(settings.evolution_config(), t=int(t))
		result = evolution.run(train_data, cfg)
		best = result.fitness[result.best_index]
		rows.append({"t": int(t), "train_fscore": best.fscore, "size": best.size})
		logger.info(f"t={t}: training F={best.fscore:.4f} with {best.size} rules")

	table = pd.DataFrame(rows)
	chosen = min(range(len(rows)), key=lambda i: (-rows[i]["train_fscore"], rows[i]["t"]))
	table["selected"] = [int(i == chosen) for i in range(len(rows))]
	return table[SWEEP_COLUMNS]


def expansion_trace(
	archive: ModelArchive,
	model_index: int,
	features: np.ndarray,
	instance: int,
	order: Sequence[int] | None = None,
	rng: np.random.Generator | None = None,
) -> tuple[Box, list[ExpansionStep], ExpansionOrder]:
	"""Box enlargement around one instance against the rules of an archived model."""
	features = np.atleast_2d(np.asarray(features, dtype=np.float64))
	if features.shape[1] != archive.num_features:
		throw(f"Instances have {features.shape[1]} features, archive expects {archive.num_features}")
	if not 0 <= model_index < len(archive.models):
		throw(f"Model index {model_index} outside the archive population")
	if not 0 <= instance < features.shape[0]:
		throw(f"Instance {instance} outside the dataset")

	model = archive.models[model_index]
	seed = features[instance]
	if model.coverage(seed[None, :]).any():
		throw(f"Instance {instance} is covered by the model; pick an uncovered instance")

	if order is None:
		expansion = ExpansionOrder.random(archive.num_features, rng or np.random.default_rng(0))
	else:
		try:
			expansion = ExpansionOrder(tuple(order))
		except PreconditionError as e:
			throw(str(e))
		if len(expansion) != archive.num_features:
			throw(f"Order has {len(expansion)} dimensions, the model has {archive.num_features} features")

	trace: list[ExpansionStep] = []
	box = enlarge_box(model.rules, seed, expansion, trace)
	return box, trace, expansion


def read_instances(path: str | Path, archive: ModelArchive) -> tuple[np.ndarray, np.ndarray | None]:
	"""
	Feature matrix of a file scored by an archived model, plus its label
	matrix when the file carries the trailing label columns too.
	"""
	values, columns = read_numeric_table(path)
	num_features, num_labels = archive.num_features, archive.num_labels
	if len(columns) == num_features:
		return values, None
	if len(columns) != num_features + num_labels:
		throw(
			f"{path} has {len(columns)} columns; the model expects {num_features} features, "
			f"optionally followed by {num_labels} labels"
		)
	labels = values[:, num_features:]
	if not np.all((labels == 0) | (labels == 1)):
		throw(f"{path}: label values must be 0 or 1")
	return values[:, :num_features], labels.astype(np.int8)

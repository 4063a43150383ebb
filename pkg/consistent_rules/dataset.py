# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NoReturn

import arff
import numpy as np
import pandas as pd
from loguru import logger

from consistent_rules import hooks
from consistent_rules.exceptions import DatasetParseError, ValidationError, log_error, throw


def _frozen(values: np.ndarray) -> np.ndarray:
	values = np.array(values, copy=True)
	values.setflags(write=False)
	return values


@dataclass(frozen=True, eq=False)
class Dataset:
	"""
	Continuous feature matrix plus binary label matrix.

	Immutable after construction; the arrays are read-only so a Dataset can be
	shared between evaluation workers.
	"""

	features: np.ndarray
	labels: np.ndarray
	feature_names: tuple[str, ...] = ()
	label_names: tuple[str, ...] = ()

	def __post_init__(self):
		features = np.asarray(self.features, dtype=np.float64)
		labels = np.asarray(self.labels)

		if features.ndim != 2 or labels.ndim != 2:
			throw("Features and labels must be two-dimensional matrices")
		if features.shape[0] < 1 or features.shape[1] < 1 or labels.shape[1] < 1:
			throw(f"Dataset needs at least one instance, feature and label, got {features.shape} / {labels.shape}")
		if features.shape[0] != labels.shape[0]:
			throw(f"Feature rows ({features.shape[0]}) and label rows ({labels.shape[0]}) differ")
		if not np.all(np.isfinite(features)):
			throw("Feature values must be finite; missing values are not supported")
		if not np.all((labels == 0) | (labels == 1)):
			throw("Label values must be 0 or 1")

		feature_names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(features.shape[1]))
		label_names = tuple(self.label_names) or tuple(f"label{j + 1}" for j in range(labels.shape[1]))
		if len(feature_names) != features.shape[1] or len(label_names) != labels.shape[1]:
			throw("Feature/label names do not match the matrix widths")

		object.__setattr__(self, "features", _frozen(features))
		object.__setattr__(self, "labels", _frozen(labels.astype(np.int8)))
		object.__setattr__(self, "feature_names", feature_names)
		object.__setattr__(self, "label_names", label_names)

	@property
	def num_instances(self) -> int:
		return self.features.shape[0]

	@property
	def num_features(self) -> int:
		return self.features.shape[1]

	@property
	def num_labels(self) -> int:
		return self.labels.shape[1]

	@cached_property
	def feature_values(self) -> tuple[np.ndarray, ...]:
		"""Sorted distinct values of every feature column."""
		return tuple(_frozen(np.unique(self.features[:, j])) for j in range(self.num_features))

	@cached_property
	def next_values(self) -> np.ndarray:
		"""
		For every cell, the smallest value of the same feature strictly greater
		than the cell's value, or +inf when the cell holds the column maximum.
		"""
		result = np.full(self.features.shape, np.inf)
		for j, values in enumerate(self.feature_values):
			positions = np.searchsorted(values, self.features[:, j], side="right")
			inside = positions < len(values)
			result[inside, j] = values[positions[inside]]
		return _frozen(result)

	@cached_property
	def feature_scale(self) -> np.ndarray:
		"""Per-feature range used to normalise distances; constant features scale by 1."""
		spread = self.features.max(axis=0) - self.features.min(axis=0)
		return _frozen(np.where(spread > 0, spread, 1.0))

	def subset(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
		indices = np.asarray(indices, dtype=np.intp)
		if indices.size == 0:
			throw("Cannot build an empty dataset partition")
		return Dataset(
			self.features[indices],
			self.labels[indices],
			self.feature_names,
			self.label_names,
		)


@dataclass(frozen=True)
class FoldSplit:
	fold_count: int
	assignment: tuple[int, ...]

	def __post_init__(self):
		if self.fold_count < 1:
			throw(f"Fold count must be positive, got {self.fold_count}")
		assignment = tuple(int(a) for a in self.assignment)
		if any(a < 0 or a >= self.fold_count for a in assignment):
			throw(f"Fold indices must lie in [0, {self.fold_count})")
		sizes = np.bincount(np.asarray(assignment, dtype=np.intp), minlength=self.fold_count)
		if sizes.min() < 1:
			throw("Every fold must contain at least one instance")
		if sizes.max() - sizes.min() > 1:
			throw(f"Fold sizes must differ by at most one, got {sizes.tolist()}")
		object.__setattr__(self, "assignment", assignment)

	def fold_indices(self, fold: int) -> np.ndarray:
		return np.flatnonzero(np.asarray(self.assignment) == fold)

	def partition(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
		"""Training and test instance indices for one fold."""
		assignment = np.asarray(self.assignment)
		return np.flatnonzero(assignment != fold), np.flatnonzero(assignment == fold)


def read_numeric_table(path: str | Path) -> tuple[np.ndarray, list[str]]:
	"""Parse a headed comma-separated file of finite numbers into (values, column names)."""
	path = Path(path)
	try:
		frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
	except pd.errors.EmptyDataError:
		_parse_error(path, "file is empty, a header row is required")
	except pd.errors.ParserError as e:
		_parse_error(path, f"malformed row: {e}")
	except UnicodeDecodeError as e:
		_parse_error(path, f"not valid UTF-8 text: {e}")

	# more fields than header names on every row turns the first column into the index
	if not isinstance(frame.index, pd.RangeIndex):
		_parse_error(path, "row 1 has more columns than the header")
	if frame.shape[0] < 1:
		_parse_error(path, "no data rows")

	missing = frame.isna().to_numpy()
	if missing.any():
		row = int(np.argwhere(missing)[0][0])
		_parse_error(path, f"row {row + 1} has fewer than {frame.shape[1]} columns")

	columns = [str(c) for c in frame.columns]
	return _parse_numbers(path, frame.to_numpy(dtype=object), columns), columns


def load_dataset(path: str | Path, label_count: int) -> Dataset:
	"""
	Load a comma-separated numeric file with one header row.

	The trailing `label_count` columns are labels, every other column is a
	continuous feature.
	"""
	path = Path(path)
	if label_count < 1:
		throw(f"Label count must be positive, got {label_count}")

	values, columns = read_numeric_table(path)
	if label_count >= len(columns):
		_parse_error(path, f"{label_count} label column(s) requested but the file has only {len(columns)} column(s)")

	feature_count = len(columns) - label_count
	labels = values[:, feature_count:]
	bad = (labels != 0) & (labels != 1)
	if bad.any():
		row, column = (int(v) for v in np.argwhere(bad)[0])
		_parse_error(
			path,
			f"row {row + 1}, column '{columns[feature_count + column]}': "
			f"label value '{labels[row, column]:g}' is not 0 or 1",
		)

	dataset = Dataset(values[:, :feature_count], labels, tuple(columns[:feature_count]), tuple(columns[feature_count:]))
	logger.info(
		f"Loaded {path.name}: {dataset.num_instances} instances, "
		f"{dataset.num_features} features, {dataset.num_labels} labels"
	)
	return dataset


def _parse_numbers(path: Path, cells: np.ndarray, columns: list[str]) -> np.ndarray:
	try:
		values = cells.astype(np.float64)
	except ValueError:
		# find the first offending cell to report its position
		for row, column in np.ndindex(cells.shape):
			try:
				float(cells[row, column])
			except ValueError:
				_parse_error(path, f"row {row + 1}, column '{columns[column]}': '{cells[row, column]}' is not a number")
		raise

	non_finite = ~np.isfinite(values)
	if non_finite.any():
		row, column = (int(v) for v in np.argwhere(non_finite)[0])
		_parse_error(path, f"row {row + 1}, column '{columns[column]}': missing or non-finite value '{cells[row, column]}'")
	return values


def _parse_error(path: Path, message: str) -> NoReturn:
	message = f"{path}: {message}"
	log_error(hooks.dataset_issue_title, message)
	throw(message, DatasetParseError)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
	"""Write `dataset` in the format read by `load_dataset`, values round-trip exactly."""
	frame = pd.DataFrame(
		np.hstack([dataset.features.astype(str), dataset.labels.astype(str)]),
		columns=[*dataset.feature_names, *dataset.label_names],
	)
	frame.to_csv(path, index=False)


def split_folds(dataset: Dataset, fold_count: int, rng: np.random.Generator) -> FoldSplit:
	"""Random permutation of the instances dealt round-robin into `fold_count` folds."""
	if fold_count < 1:
		throw(f"Fold count must be positive, got {fold_count}")
	if fold_count > dataset.num_instances:
		throw(f"Cannot split {dataset.num_instances} instances into {fold_count} folds")

	assignment = np.empty(dataset.num_instances, dtype=np.intp)
	order = rng.permutation(dataset.num_instances)
	assignment[order] = np.arange(dataset.num_instances) % fold_count
	return FoldSplit(fold_count, tuple(assignment.tolist()))


def save_folds(split: FoldSplit, path: str | Path) -> None:
	frame = pd.DataFrame(
		{"instance_index": range(len(split.assignment)), "fold_index": split.assignment},
	)
	frame.to_csv(path, index=False)


def load_folds(path: str | Path, num_instances: int) -> FoldSplit:
	path = Path(path)
	try:
		frame = pd.read_csv(path)
	except pd.errors.EmptyDataError:
		_parse_error(path, "fold file is empty")
	except (pd.errors.ParserError, UnicodeDecodeError) as e:
		_parse_error(path, f"malformed fold file: {e}")
	if list(frame.columns) != ["instance_index", "fold_index"]:
		throw(f"{path}: expected header 'instance_index,fold_index'")
	for column in frame.columns:
		if not pd.api.types.is_integer_dtype(frame[column]):
			_parse_error(path, f"column '{column}' must hold integers only")
	instances = frame["instance_index"].to_numpy()
	if sorted(instances.tolist()) != list(range(num_instances)):
		throw(f"{path}: fold file must list every instance index in [0, {num_instances}) exactly once")

	assignment = np.empty(num_instances, dtype=np.intp)
	assignment[instances] = frame["fold_index"].to_numpy()
	return FoldSplit(int(assignment.max()) + 1, tuple(assignment.tolist()))


def convert_arff(arff_path: str | Path, csv_path: str | Path, label_count: int) -> Dataset:
	"""
	Convert a dense or sparse numeric ARFF file whose trailing `label_count`
	attributes are {0,1} labels into the comma-separated dataset format.
	"""
	arff_path = Path(arff_path)
	with open(arff_path, encoding="utf-8") as fp:
		try:
			document = arff.load(fp)
		except arff.ArffException as e:
			_parse_error(arff_path, f"invalid ARFF: {e}")
		except UnicodeDecodeError as e:
			_parse_error(arff_path, f"not valid UTF-8 text: {e}")

	attributes = document["attributes"]
	if label_count < 1 or label_count >= len(attributes):
		_parse_error(arff_path, f"cannot take {label_count} label attribute(s) from {len(attributes)} attribute(s)")

	feature_count = len(attributes) - label_count
	for name, kind in attributes[:feature_count]:
		if not isinstance(kind, str) or kind.upper() not in ("NUMERIC", "REAL", "INTEGER"):
			_parse_error(arff_path, f"attribute '{name}' is not numeric; only continuous features are supported")

	rows = document["data"]
	if any(value is None for row in rows for value in row):
		_parse_error(arff_path, "missing values are not supported")

	features = np.array([row[:feature_count] for row in rows], dtype=np.float64)
	try:
		labels = np.array([[float(v) for v in row[feature_count:]] for row in rows], dtype=np.float64)
	except ValueError:
		_parse_error(arff_path, "label attributes must hold 0 or 1")
	bad = (labels != 0) & (labels != 1)
	if bad.any():
		row, column = (int(v) for v in np.argwhere(bad)[0])
		_parse_error(
			arff_path,
			f"row {row + 1}, attribute '{attributes[feature_count + column][0]}': label value '{labels[row, column]:g}' is not 0 or 1",
		)
	labels = labels.astype(np.int64)

	try:
		dataset = Dataset(
			features,
			labels,
			tuple(name for name, _ in attributes[:feature_count]),
			tuple(name for name, _ in attributes[feature_count:]),
		)
	except ValidationError as e:
		_parse_error(arff_path, str(e))

	save_dataset(dataset, csv_path)
	logger.info(f"Converted {arff_path.name} to {csv_path}")
	return dataset

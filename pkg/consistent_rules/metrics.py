# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

from consistent_rules.dataset import Dataset
from consistent_rules.exceptions import PreconditionError, throw
from consistent_rules.nsga2 import FitnessTuple, dominates
from consistent_rules.rule_model import DefaultRule, Individual, predict_all
from consistent_rules.rulegen import binarize_means

T = TypeVar("T")


@dataclass(frozen=True)
class ConfusionCounts:
	tp: int
	fp: int
	fn: int
	tn: int

	@property
	def total(self) -> int:
		return self.tp + self.fp + self.fn + self.tn


def default_rule(train: Dataset) -> DefaultRule:
	"""Thresholded average label vector of the training instances."""
	return DefaultRule(binarize_means(train.labels))


def confusion_counts(pred: np.ndarray, truth: np.ndarray) -> ConfusionCounts:
	pred = np.asarray(pred).astype(bool)
	truth = np.asarray(truth).astype(bool)
	if pred.shape != truth.shape:
		throw(f"Prediction shape {pred.shape} differs from truth shape {truth.shape}", PreconditionError)
	return ConfusionCounts(
		tp=int(np.count_nonzero(pred & truth)),
		fp=int(np.count_nonzero(pred & ~truth)),
		fn=int(np.count_nonzero(~pred & truth)),
		tn=int(np.count_nonzero(~pred & ~truth)),
	)


def micro_fscore(pred: np.ndarray, truth: np.ndarray) -> float:
	"""Micro-averaged F-Score pooled over all (instance, label) cells; 0 when undefined."""
	counts = confusion_counts(pred, truth)
	denominator = 2 * counts.tp + counts.fp + counts.fn
	if denominator == 0:
		return 0.0
	return 2 * counts.tp / denominator


def evaluate(ind: Individual, default: DefaultRule, data: Dataset) -> FitnessTuple:
	prediction = predict_all(ind, default, data.features)
	return FitnessTuple(micro_fscore(prediction, data.labels), ind.size)


def pareto_front(pop: Sequence[tuple[T, FitnessTuple]]) -> list[tuple[T, FitnessTuple]]:
	"""Members not dominated by any other member, in input order."""
	return [
		member
		for member in pop
		if not any(dominates(other[1], member[1]) for other in pop)
	]


def interpretability_score(size: int) -> float:
	if size < 1:
		throw(f"Model size must be at least 1, got {size}", PreconditionError)
	return 1.0 / size

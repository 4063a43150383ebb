# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from consistent_rules.box_enlargement import ExpansionOrder, enlarge_box
from consistent_rules.dataset import Dataset
from consistent_rules.exceptions import PreconditionError, throw
from consistent_rules.rule_model import Box, Individual, Rule


@dataclass(frozen=True)
class RuleGenConfig:
	t: int

	def __post_init__(self):
		if self.t < 1:
			throw(f"t must be a positive integer, got {self.t}")


def uncovered_mask(rules: Sequence[Rule], dataset: Dataset) -> np.ndarray:
	covered = np.zeros(dataset.num_instances, dtype=bool)
	for rule in rules:
		covered |= rule.covers(dataset.features)
	return ~covered


def uncovered_instances(rules: Sequence[Rule], dataset: Dataset) -> np.ndarray:
	"""Indices of the instances covered by none of `rules`, ascending."""
	return np.flatnonzero(uncovered_mask(rules, dataset))


def binarize_means(labels: np.ndarray) -> tuple[int, ...]:
	"""Majority vote per label; a mean of exactly 0.5 votes 1."""
	return tuple(int(v) for v in (labels.mean(axis=0) >= 0.5))


def create_rule(
	existing: Sequence[Rule],
	dataset: Dataset,
	cfg: RuleGenConfig,
	rng: np.random.Generator,
) -> Rule:
	"""
	New rule that overlaps none of `existing`.

	A random uncovered seed and a random expansion order define the outer
	box; an inner box grows from the seed toward the nearest uncovered
	instances inside it until `cfg.t` instances are covered or no candidate
	fits. The consequent is the majority vote of the covered instances.
	"""
	uncovered = uncovered_instances(existing, dataset)
	if uncovered.size == 0:
		throw("Every instance is already covered, no seed available", PreconditionError)

	seed = int(rng.choice(uncovered))
	order = ExpansionOrder.random(dataset.num_features, rng)
	outer = enlarge_box(existing, dataset.features[seed], order)

	points = dataset.features
	candidates = uncovered[outer.contains(points[uncovered])]
	distance = np.sqrt((((points[candidates] - points[seed]) / dataset.feature_scale) ** 2).sum(axis=1))
	candidates = candidates[np.lexsort((candidates, distance))]
	pool = points[candidates]

	lower = points[seed].copy()
	upper = np.minimum(dataset.next_values[seed], outer.upper_array)
	covered = np.all((pool >= lower) & (pool < upper), axis=1)

	for position, candidate in enumerate(candidates):
		if covered.sum() >= cfg.t:
			break
		if covered[position]:
			continue
		grown_lower = np.minimum(lower, points[candidate])
		grown_upper = np.maximum(upper, np.minimum(dataset.next_values[candidate], outer.upper_array))
		if np.any(grown_lower < outer.lower_array) or np.any(grown_upper > outer.upper_array):
			continue
		grown_covered = np.all((pool >= grown_lower) & (pool < grown_upper), axis=1)
		# a candidate that would overshoot the target is skipped, not admitted
		if grown_covered.sum() > cfg.t:
			continue
		lower, upper, covered = grown_lower, grown_upper, grown_covered

	antecedent = Box(tuple(lower.tolist()), tuple(upper.tolist()))
	consequent = binarize_means(dataset.labels[candidates[covered]])
	return Rule(antecedent, consequent)


def init_individual(dataset: Dataset, cfg: RuleGenConfig, rng: np.random.Generator) -> Individual:
	return Individual((create_rule((), dataset, cfg, rng),))


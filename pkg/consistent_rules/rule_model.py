# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from consistent_rules.exceptions import InvariantViolation, PreconditionError, ValidationError, throw


@dataclass(frozen=True)
class FeatureTest:
	"""Half-open interval test `lower <= value < upper` on one feature."""

	lower: float
	upper: float

	def __post_init__(self):
		lower, upper = float(self.lower), float(self.upper)
		if math.isnan(lower) or math.isnan(upper) or not lower < upper:
			throw(f"Feature-test bounds must satisfy lower < upper, got [{lower}, {upper})", ValidationError)
		object.__setattr__(self, "lower", lower)
		object.__setattr__(self, "upper", upper)

	@property
	def is_tautological(self) -> bool:
		return self.lower == -math.inf and self.upper == math.inf

	def passes(self, value: float) -> bool:
		return self.lower <= value < self.upper


@dataclass(frozen=True)
class Box:
	"""Axis-aligned hyperrectangle, one half-open interval per feature."""

	lower: tuple[float, ...]
	upper: tuple[float, ...]

	def __post_init__(self):
		lower = tuple(float(v) for v in self.lower)
		upper = tuple(float(v) for v in self.upper)
		if len(lower) != len(upper) or not lower:
			throw("A box needs the same positive number of lower and upper bounds", ValidationError)
		for d, (lo, up) in enumerate(zip(lower, upper)):
			if math.isnan(lo) or math.isnan(up) or not lo < up:
				throw(f"Box dimension {d} is empty: [{lo}, {up})", ValidationError)
		object.__setattr__(self, "lower", lower)
		object.__setattr__(self, "upper", upper)

	@classmethod
	def full(cls, num_features: int) -> "Box":
		return cls((-math.inf,) * num_features, (math.inf,) * num_features)

	@property
	def num_features(self) -> int:
		return len(self.lower)

	@property
	def tests(self) -> tuple[FeatureTest, ...]:
		return tuple(FeatureTest(lo, up) for lo, up in zip(self.lower, self.upper))

	@cached_property
	def lower_array(self) -> np.ndarray:
		return np.array(self.lower)

	@cached_property
	def upper_array(self) -> np.ndarray:
		return np.array(self.upper)

	def contains(self, points: np.ndarray) -> np.ndarray:
		"""Row mask of the points lying inside the box."""
		points = np.atleast_2d(points)
		return np.all((points >= self.lower_array) & (points < self.upper_array), axis=1)

	def within(self, other: "Box") -> bool:
		return bool(np.all(self.lower_array >= other.lower_array) and np.all(self.upper_array <= other.upper_array))


@dataclass(frozen=True)
class Rule:
	antecedent: Box
	consequent: tuple[int, ...]

	def __post_init__(self):
		consequent = tuple(int(v) for v in self.consequent)
		if not consequent or any(v not in (0, 1) for v in consequent):
			throw(f"Rule consequent must be a non-empty 0/1 vector, got {self.consequent}", ValidationError)
		object.__setattr__(self, "consequent", consequent)

	def covers(self, features: np.ndarray) -> np.ndarray:
		return self.antecedent.contains(features)


@dataclass(frozen=True)
class DefaultRule:
	consequent: tuple[int, ...]

	def __post_init__(self):
		consequent = tuple(int(v) for v in self.consequent)
		if not consequent or any(v not in (0, 1) for v in consequent):
			throw(f"Default consequent must be a non-empty 0/1 vector, got {self.consequent}", ValidationError)
		object.__setattr__(self, "consequent", consequent)


@dataclass(frozen=True)
class Individual:
	"""One classification model: a non-empty set of mutually consistent rules."""

	rules: tuple[Rule, ...]

	def __post_init__(self):
		rules = tuple(self.rules)
		if not rules:
			throw("An individual needs at least one rule", ValidationError)
		features = {r.antecedent.num_features for r in rules}
		labels = {len(r.consequent) for r in rules}
		if len(features) != 1 or len(labels) != 1:
			throw("All rules of an individual must share feature and label arities", ValidationError)
		object.__setattr__(self, "rules", rules)

	@property
	def size(self) -> int:
		return len(self.rules)

	@property
	def num_features(self) -> int:
		return self.rules[0].antecedent.num_features

	@property
	def num_labels(self) -> int:
		return len(self.rules[0].consequent)

	@cached_property
	def lower_bounds(self) -> np.ndarray:
		return np.array([r.antecedent.lower for r in self.rules])

	@cached_property
	def upper_bounds(self) -> np.ndarray:
		return np.array([r.antecedent.upper for r in self.rules])

	@cached_property
	def consequents(self) -> np.ndarray:
		return np.array([r.consequent for r in self.rules], dtype=np.int8)

	def coverage(self, features: np.ndarray) -> np.ndarray:
		"""(instances x rules) boolean coverage matrix."""
		return np.column_stack([rule.covers(features) for rule in self.rules])


def test_passes(test: FeatureTest, value: float) -> bool:
	return test.passes(value)


# not collected as a test by pytest
test_passes.__test__ = False


def rule_covers(rule: Rule, instance: Sequence[float] | np.ndarray) -> bool:
	instance = np.asarray(instance, dtype=np.float64)
	if instance.shape != (rule.antecedent.num_features,):
		throw(f"Instance has {instance.size} values, rule expects {rule.antecedent.num_features}", PreconditionError)
	return bool(rule.covers(instance)[0])


def boxes_overlap(a: Box, b: Box) -> bool:
	if a.num_features != b.num_features:
		throw(f"Cannot compare boxes of {a.num_features} and {b.num_features} dimensions", PreconditionError)
	return bool(np.all(np.maximum(a.lower_array, b.lower_array) < np.minimum(a.upper_array, b.upper_array)))


def rules_consistent(a: Rule, b: Rule) -> bool:
	if len(a.consequent) != len(b.consequent):
		throw("Rules with different label arities cannot be compared", PreconditionError)
	if a.antecedent.num_features != b.antecedent.num_features:
		throw("Rules with different feature arities cannot be compared", PreconditionError)
	return a.consequent == b.consequent or not boxes_overlap(a.antecedent, b.antecedent)


def overlap_matrix(rules: Sequence[Rule]) -> np.ndarray:
	"""Symmetric (k x k) matrix of pairwise antecedent overlap; the diagonal is True."""
	if not rules:
		return np.zeros((0, 0), dtype=bool)
	lower = np.array([r.antecedent.lower for r in rules])
	upper = np.array([r.antecedent.upper for r in rules])
	return np.all(
		np.maximum(lower[:, None, :], lower[None, :, :]) < np.minimum(upper[:, None, :], upper[None, :, :]),
		axis=2,
	)


def rules_pairwise_consistent(rules: Sequence[Rule]) -> bool:
	if len(rules) < 2:
		return True
	overlaps = overlap_matrix(rules)
	consequents = np.array([r.consequent for r in rules])
	same = np.all(consequents[:, None, :] == consequents[None, :, :], axis=2)
	return not np.any(overlaps & ~same)


def model_consistent(ind: Individual) -> bool:
	return rules_pairwise_consistent(ind.rules)


def model_disjoint(ind: Individual) -> bool:
	"""Stronger engine invariant: no two rule boxes overlap at all."""
	overlaps = overlap_matrix(ind.rules)
	np.fill_diagonal(overlaps, False)
	return not overlaps.any()


def predict(ind: Individual, default: DefaultRule, instance: Sequence[float] | np.ndarray) -> tuple[int, ...]:
	return tuple(int(v) for v in predict_all(ind, default, np.atleast_2d(np.asarray(instance, dtype=np.float64)))[0])


def predict_all(ind: Individual, default: DefaultRule, features: np.ndarray) -> np.ndarray:
	"""
	Predicted label matrix for every row of `features`.

	Rows covered by no rule receive the default consequent; a row covered by
	rules with different consequents raises InvariantViolation.
	"""
	features = np.atleast_2d(np.asarray(features, dtype=np.float64))
	if features.shape[1] != ind.num_features:
		throw(f"Instances have {features.shape[1]} features, model expects {ind.num_features}", PreconditionError)
	if len(default.consequent) != ind.num_labels:
		throw("Default rule and model label arities differ", PreconditionError)

	coverage = ind.coverage(features)
	counts = coverage.sum(axis=1)
	first = coverage.argmax(axis=1)
	prediction = np.where(
		(counts > 0)[:, None],
		ind.consequents[first],
		np.asarray(default.consequent, dtype=np.int8)[None, :],
	).astype(np.int8)

	for row in np.flatnonzero(counts > 1):
		covering = ind.consequents[coverage[row]]
		if np.any(covering != covering[0]):
			throw(f"Instance {row} is covered by rules with different consequents", InvariantViolation)
	return prediction


def _format_bound(value: float) -> str:
	return format(value, ".15g")


@dataclass(frozen=True)
class Condition:
	feature: int
	name: str
	lower: float | None
	upper: float | None

	def __str__(self):
		if self.lower is None:
			return f"{self.name} < {_format_bound(self.upper)}"
		if self.upper is None:
			return f"{self.name} >= {_format_bound(self.lower)}"
		return f"{_format_bound(self.lower)} <= {self.name} < {_format_bound(self.upper)}"

	def passes(self, value: float) -> bool:
		return (self.lower is None or self.lower <= value) and (self.upper is None or value < self.upper)


@dataclass(frozen=True)
class SimplifiedRule:
	conditions: tuple[Condition, ...]
	consequent: tuple[int, ...]

	@property
	def antecedent_text(self) -> str:
		return " AND ".join(str(c) for c in self.conditions) or "always"

	def covers(self, instance: Sequence[float]) -> bool:
		return all(c.passes(instance[c.feature]) for c in self.conditions)

	def __str__(self):
		return f"IF {self.antecedent_text} THEN {list(self.consequent)}"


def simplify_rule(rule: Rule, feature_names: Sequence[str] | None = None) -> SimplifiedRule:
	"""
	Reporting form of a rule: tautological feature-tests are dropped and
	half-tautological ones become one-sided comparisons.
	"""
	names = feature_names or [f"x{j + 1}" for j in range(rule.antecedent.num_features)]
	conditions = []
	for j, test in enumerate(rule.antecedent.tests):
		if test.is_tautological:
			continue
		conditions.append(
			Condition(
				feature=j,
				name=names[j],
				lower=None if test.lower == -math.inf else test.lower,
				upper=None if test.upper == math.inf else test.upper,
			)
		)
	return SimplifiedRule(tuple(conditions), rule.consequent)


def render_model(
	ind: Individual,
	default: DefaultRule,
	feature_names: Sequence[str] | None = None,
	label_names: Sequence[str] | None = None,
) -> str:
	labels = label_names or [f"label{j + 1}" for j in range(ind.num_labels)]

	def label_set(consequent):
		return "{" + ", ".join(name for name, bit in zip(labels, consequent) if bit) + "}"

	lines = []
	for i, rule in enumerate(ind.rules, start=1):
		simplified = simplify_rule(rule, feature_names)
		lines.append(f"rule {i}: IF {simplified.antecedent_text} THEN {label_set(rule.consequent)}")
	lines.append(f"default: {label_set(default.consequent)}")
	return "\n".join(lines)

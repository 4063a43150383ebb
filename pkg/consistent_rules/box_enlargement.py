# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from consistent_rules.exceptions import InvariantViolation, PreconditionError, throw
from consistent_rules.rule_model import Box, Rule, rules_pairwise_consistent


@dataclass(frozen=True)
class ExpansionOrder:
	"""Permutation of the feature indices; dimensions are widened in this order."""

	order: tuple[int, ...]

	def __post_init__(self):
		order = tuple(int(d) for d in self.order)
		if sorted(order) != list(range(len(order))):
			throw(f"Expansion order must be a permutation of 0..{len(order) - 1}, got {order}", PreconditionError)
		object.__setattr__(self, "order", order)

	@classmethod
	def random(cls, num_features: int, rng: np.random.Generator) -> "ExpansionOrder":
		return cls(tuple(rng.permutation(num_features).tolist()))

	def __iter__(self):
		return iter(self.order)

	def __len__(self):
		return len(self.order)


@dataclass(frozen=True)
class ExpansionStep:
	dimension: int
	obstructors: tuple[int, ...]
	lower: float
	upper: float

	def __str__(self):
		blockers = ", ".join(str(i) for i in self.obstructors) or "none"
		return f"dimension {self.dimension}: [{self.lower}, {self.upper}) obstructed by rules {blockers}"


def enlarge_box(
	rules: Sequence[Rule],
	seed: Sequence[float] | np.ndarray,
	order: ExpansionOrder | Sequence[int],
	trace: list[ExpansionStep] | None = None,
) -> Box:
	"""
	Largest box around `seed` that overlaps none of `rules`, widening one
	dimension at a time in `order`.

	Dimensions not yet processed are treated as the point interval at the seed.
	A rule obstructs dimension d when it overlaps the current box on every
	other dimension; the bound on d stops at the nearest obstructor face on
	each side of the seed. Appends one ExpansionStep per dimension to `trace`
	when given.
	"""
	seed = np.asarray(seed, dtype=np.float64)
	if not isinstance(order, ExpansionOrder):
		order = ExpansionOrder(tuple(order))
	num_features = seed.size
	if len(order) != num_features:
		throw(f"Expansion order has {len(order)} dimensions, seed has {num_features}", PreconditionError)

	if not rules:
		if trace is not None:
			trace.extend(ExpansionStep(d, (), -math.inf, math.inf) for d in order)
		return Box.full(num_features)

	rule_lower = np.array([r.antecedent.lower for r in rules])
	rule_upper = np.array([r.antecedent.upper for r in rules])
	if rule_lower.shape[1] != num_features:
		throw(f"Rules have {rule_lower.shape[1]} features, seed has {num_features}", PreconditionError)

	seed_inside = (rule_lower <= seed) & (seed < rule_upper)
	if np.any(seed_inside.all(axis=1)):
		throw("Seed is already covered by one of the rules", PreconditionError)
	if not rules_pairwise_consistent(rules):
		throw("Rules passed to box enlargement are not consistent", PreconditionError)

	lower = seed.copy()
	upper = seed.copy()
	processed = np.zeros(num_features, dtype=bool)
	for dim in order:
		per_dimension = np.where(
			processed,
			(rule_lower < upper) & (lower < rule_upper),
			seed_inside,
		)
		per_dimension[:, dim] = True
		obstructors = np.flatnonzero(per_dimension.all(axis=1))

		below = obstructors[rule_upper[obstructors, dim] <= seed[dim]]
		above = obstructors[rule_lower[obstructors, dim] > seed[dim]]
		if below.size + above.size != obstructors.size:
			throw(f"Rule straddles the seed on dimension {dim} after enlargement", InvariantViolation)

		lower[dim] = rule_upper[below, dim].max() if below.size else -math.inf
		upper[dim] = rule_lower[above, dim].min() if above.size else math.inf
		processed[dim] = True

		if trace is not None:
			trace.append(ExpansionStep(dim, tuple(obstructors.tolist()), float(lower[dim]), float(upper[dim])))

	return Box(tuple(lower.tolist()), tuple(upper.tolist()))

# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TypeVar

from consistent_rules.exceptions import PreconditionError, ValidationError, throw

T = TypeVar("T")


@dataclass(frozen=True)
class FitnessTuple:
	"""Objectives of one model: maximise `fscore`, minimise `size`."""

	fscore: float
	size: int

	def __post_init__(self):
		if not 0.0 <= self.fscore <= 1.0:
			throw(f"F-Score must lie in [0, 1], got {self.fscore}", ValidationError)
		if self.size < 1:
			throw(f"Model size must be at least 1, got {self.size}", ValidationError)


def dominates(a: FitnessTuple, b: FitnessTuple) -> bool:
	no_worse = a.fscore >= b.fscore and a.size <= b.size
	better = a.fscore > b.fscore or a.size < b.size
	return no_worse and better


def non_dominated_sort(pop: Sequence[FitnessTuple]) -> list[list[int]]:
	"""
	Fast non-dominated sorting.

	Returns the fronts as lists of population indices, best front first,
	each in ascending index order.
	"""
	dominated_by = [[] for _ in pop]
	domination_count = [0] * len(pop)
	fronts = [[]]
	for p, a in enumerate(pop):
		for q, b in enumerate(pop):
			if dominates(a, b):
				dominated_by[p].append(q)
			elif dominates(b, a):
				domination_count[p] += 1
		if domination_count[p] == 0:
			fronts[0].append(p)

	while fronts[-1]:
		following = []
		for p in fronts[-1]:
			for q in dominated_by[p]:
				domination_count[q] -= 1
				if domination_count[q] == 0:
					following.append(q)
		fronts.append(sorted(following))
	fronts.pop()
	return fronts


def crowding_distance(front: Sequence[FitnessTuple]) -> list[float]:
	if not front:
		throw("Crowding distance needs a non-empty front", PreconditionError)

	distance = [0.0] * len(front)
	for objective in (lambda f: f.fscore, lambda f: f.size):
		ranked = sorted(range(len(front)), key=lambda i: (objective(front[i]), i))
		distance[ranked[0]] = math.inf
		distance[ranked[-1]] = math.inf
		spread = objective(front[ranked[-1]]) - objective(front[ranked[0]])
		if spread == 0:
			continue
		for position in range(1, len(ranked) - 1):
			i = ranked[position]
			gap = objective(front[ranked[position + 1]]) - objective(front[ranked[position - 1]])
			distance[i] += gap / spread
	return distance


def select_indices(fitness: Sequence[FitnessTuple], target: int) -> list[int]:
	"""
	Indices of the `target` survivors in ascending order.

	Whole fronts are admitted first; the last partially admitted front keeps
	its members with the largest crowding distance, ties to the lower index.
	"""
	if target < 1 or len(fitness) < target:
		throw(f"Cannot select {target} survivors from {len(fitness)} individuals", PreconditionError)

	chosen = []
	for front in non_dominated_sort(fitness):
		if len(chosen) + len(front) <= target:
			chosen.extend(front)
			if len(chosen) == target:
				break
			continue
		distance = crowding_distance([fitness[i] for i in front])
		ranked = sorted(range(len(front)), key=lambda j: (-distance[j], front[j]))
		chosen.extend(front[j] for j in ranked[: target - len(chosen)])
		break
	return sorted(chosen)


def select_survivors(pop: Sequence[tuple[T, FitnessTuple]], target: int) -> list[T]:
	return [pop[i][0] for i in select_indices([fitness for _, fitness in pop], target)]

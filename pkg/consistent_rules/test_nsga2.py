# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from consistent_rules.exceptions import PreconditionError, ValidationError
from consistent_rules.nsga2 import (
	FitnessTuple,
	crowding_distance,
	dominates,
	non_dominated_sort,
	select_indices,
	select_survivors,
)
from consistent_rules.testing import RuleEngineTestCase


def brute_force_fronts(pop):
	"""Peel off the non-dominated members of what is left, one front at a time."""
	remaining = list(range(len(pop)))
	fronts = []
	while remaining:
		front = [i for i in remaining if not any(dominates(pop[j], pop[i]) for j in remaining)]
		fronts.append(front)
		remaining = [i for i in remaining if i not in front]
	return fronts


def random_population(rng: np.random.Generator, size: int) -> list[FitnessTuple]:
	# coarse grid so ties and duplicates are frequent
	return [
		FitnessTuple(float(rng.integers(0, 11)) / 10, int(rng.integers(1, 12)))
		for _ in range(size)
	]


fitness_tuples = st.builds(
	FitnessTuple,
	st.integers(0, 20).map(lambda v: v / 20),
	st.integers(1, 15),
)


class TestDominates(RuleEngineTestCase):
	def test_examples(self):
		self.assertTrue(dominates(FitnessTuple(0.9, 5), FitnessTuple(0.8, 7)))
		self.assertFalse(dominates(FitnessTuple(0.9, 5), FitnessTuple(0.9, 5)))
		self.assertFalse(dominates(FitnessTuple(0.9, 7), FitnessTuple(0.8, 5)))

	@given(fitness_tuples, fitness_tuples)
	def test_irreflexive_and_antisymmetric(self, a, b):
		self.assertFalse(dominates(a, a))
		self.assertFalse(dominates(a, b) and dominates(b, a))

	def test_fitness_validation(self):
		with self.assertRaises(ValidationError):
			FitnessTuple(1.5, 3)
		with self.assertRaises(ValidationError):
			FitnessTuple(0.5, 0)


class TestNonDominatedSort(RuleEngineTestCase):
	def test_example(self):
		pop = [FitnessTuple(0.9, 5), FitnessTuple(0.8, 3), FitnessTuple(0.7, 10)]
		self.assertEqual(non_dominated_sort(pop), [[0, 1], [2]])

	def test_identical(self):
		self.assertEqual(non_dominated_sort([FitnessTuple(0.5, 2)] * 4), [[0, 1, 2, 3]])

	def test_single(self):
		self.assertEqual(non_dominated_sort([FitnessTuple(0.5, 2)]), [[0]])

	def test_brute_force_oracle(self):
		rng = np.random.default_rng(99)
		for _ in range(500):
			pop = random_population(rng, int(rng.integers(1, 51)))
			self.assertEqual(non_dominated_sort(pop), brute_force_fronts(pop))

	@given(st.lists(fitness_tuples, min_size=1, max_size=50))
	def test_fronts_partition_population(self, pop):
		fronts = non_dominated_sort(pop)
		self.assertEqual(sorted(i for front in fronts for i in front), list(range(len(pop))))
		for earlier, later in zip(fronts, fronts[1:]):
			for q in later:
				self.assertTrue(any(dominates(pop[p], pop[q]) for p in earlier))


class TestCrowdingDistance(RuleEngineTestCase):
	def test_two_members(self):
		self.assertEqual(crowding_distance([FitnessTuple(0.1, 3), FitnessTuple(0.5, 2)]), [math.inf, math.inf])

	def test_one_member(self):
		self.assertEqual(crowding_distance([FitnessTuple(0.1, 3)]), [math.inf])

	def test_middle_member(self):
		front = [FitnessTuple(0.1, 10), FitnessTuple(0.5, 6), FitnessTuple(0.9, 2)]
		distance = crowding_distance(front)
		self.assertEqual(distance[0], math.inf)
		self.assertEqual(distance[2], math.inf)
		self.assertAlmostEqual(distance[1], 2.0, places=12)

	def test_empty(self):
		with self.assertRaises(PreconditionError):
			crowding_distance([])


class TestSelection(RuleEngineTestCase):
	def test_identity(self):
		pop = [("a", FitnessTuple(0.2, 1)), ("b", FitnessTuple(0.9, 9)), ("c", FitnessTuple(0.1, 5))]
		self.assertEqual(select_survivors(pop, 3), ["a", "b", "c"])

	def test_first_front_kept(self):
		pop = [("a", FitnessTuple(0.9, 5)), ("b", FitnessTuple(0.8, 3)), ("c", FitnessTuple(0.7, 10))]
		self.assertEqual(select_survivors(pop, 2), ["a", "b"])

	def test_crowding_tie_goes_to_earlier_index(self):
		# identical members: the two sorted extremes are infinite, the rest zero
		pop = [FitnessTuple(0.5, 5)] * 4
		self.assertEqual(select_indices(pop, 1), [0])
		self.assertEqual(select_indices(pop, 2), [0, 3])
		self.assertEqual(select_indices(pop, 3), [0, 1, 3])

	def test_partial_front_prefers_crowding(self):
		pop = [
			FitnessTuple(1.0, 1),
			FitnessTuple(0.1, 2),
			FitnessTuple(0.6, 7),
			FitnessTuple(0.5, 6),
			FitnessTuple(0.9, 10),
		]
		self.assertEqual(non_dominated_sort(pop), [[0], [1, 2, 3, 4]])

		# fscore spread 0.8, size spread 8
		distance = crowding_distance(pop[1:])
		self.assertEqual((distance[0], distance[3]), (math.inf, math.inf))
		self.assertAlmostEqual(distance[1], 0.4 / 0.8 + 4 / 8, places=12)
		self.assertAlmostEqual(distance[2], 0.5 / 0.8 + 5 / 8, places=12)

		self.assertEqual(select_indices(pop, 3), [0, 1, 4])
		# the less crowded member wins over the lower index
		self.assertEqual(select_indices(pop, 4), [0, 1, 3, 4])

	def test_too_few(self):
		with self.assertRaises(PreconditionError):
			select_indices([FitnessTuple(0.5, 1)], 2)

	@settings(deadline=None)
	@given(st.lists(fitness_tuples, min_size=1, max_size=40), st.data())
	def test_survivors_respect_fronts(self, pop, data):
		target = data.draw(st.integers(1, len(pop)))
		chosen = select_indices(pop, target)
		self.assertEqual(len(chosen), target)
		self.assertEqual(chosen, sorted(set(chosen)))
		rank = {i: r for r, front in enumerate(non_dominated_sort(pop)) for i in front}
		worst_chosen = max(rank[i] for i in chosen)
		self.assertTrue(all(rank[i] >= worst_chosen for i in range(len(pop)) if i not in chosen))

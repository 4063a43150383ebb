# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import math
import unittest
from pathlib import Path

import numpy as np
from loguru import logger

from consistent_rules.dataset import Dataset
from consistent_rules.rule_model import Box, Rule, boxes_overlap

FIXTURES = Path(__file__).with_name("fixtures")


def fixture_path(name: str) -> Path:
	return FIXTURES / name


class RuleEngineTestCase(unittest.TestCase):
	"""Base test case: silences the log output of the engine."""

	@classmethod
	def setUpClass(cls):
		super().setUpClass()
		logger.disable("consistent_rules")

	@classmethod
	def tearDownClass(cls):
		logger.enable("consistent_rules")
		super().tearDownClass()


def random_dataset(
	rng: np.random.Generator,
	num_instances: int = 60,
	num_features: int = 3,
	num_labels: int = 2,
	grid: int = 10,
) -> Dataset:
	"""Integer-valued features (so duplicate values occur) and labels correlated with them."""
	features = rng.integers(0, grid, size=(num_instances, num_features)).astype(np.float64)
	weights = rng.normal(size=(num_features, num_labels))
	scores = (features - features.mean(axis=0)) @ weights
	labels = (scores + rng.normal(scale=0.5, size=scores.shape) > 0).astype(np.int8)
	return Dataset(features, labels)


def random_box(rng: np.random.Generator, num_features: int, grid: int = 10) -> Box:
	lower, upper = [], []
	for _ in range(num_features):
		lo, up = sorted(rng.choice(grid + 1, size=2, replace=False).tolist())
		lower.append(-math.inf if lo == 0 and rng.random() < 0.3 else float(lo))
		upper.append(math.inf if up == grid and rng.random() < 0.3 else float(up))
	return Box(tuple(lower), tuple(upper))


def random_disjoint_rules(
	rng: np.random.Generator, num_features: int, count: int, num_labels: int = 2, attempts: int = 200
) -> list[Rule]:
	"""Up to `count` rules on an integer grid whose boxes pairwise do not overlap."""
	rules: list[Rule] = []
	for _ in range(attempts):
		if len(rules) == count:
			break
		box = random_box(rng, num_features)
		if any(boxes_overlap(box, rule.antecedent) for rule in rules):
			continue
		rules.append(Rule(box, tuple(rng.integers(0, 2, size=num_labels).tolist())))
	return rules

# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import json
import math
import tempfile
from pathlib import Path

import numpy as np

from consistent_rules.archive import (
	ModelArchive,
	archive_to_dict,
	dump_archive,
	dumps_archive,
	load_archive,
	loads_archive,
)
from consistent_rules.evolution import EvolutionConfig, run
from consistent_rules.exceptions import ValidationError
from consistent_rules.nsga2 import FitnessTuple
from consistent_rules.rule_model import Box, DefaultRule, Individual, Rule, model_consistent
from consistent_rules.testing import RuleEngineTestCase, random_dataset


def hand_archive() -> ModelArchive:
	first = Individual((Rule(Box((-math.inf, 0.1), (2.5, math.inf)), (1, 0)),))
	second = Individual(
		(
			Rule(Box((-math.inf, 0.1), (2.5, math.inf)), (1, 0)),
			Rule(Box((2.5, -math.inf), (math.inf, 1e-7)), (0, 1)),
		)
	)
	return ModelArchive(
		feature_names=("height", "weight"),
		label_names=("tall", "heavy"),
		default=DefaultRule((0, 0)),
		models=[first, second],
		fitness=[FitnessTuple(0.25, 1), FitnessTuple(1 / 3, 2)],
		best_index=1,
		settings={"t": 4, "dataset": "people.csv"},
	)


class TestArchive(RuleEngineTestCase):
	def test_round_trip_is_byte_identical(self):
		text = dumps_archive(hand_archive())
		self.assertEqual(dumps_archive(loads_archive(text)), text)

	def test_infinite_bounds_use_sentinels(self):
		document = archive_to_dict(hand_archive())
		rule = document["models"][0]["rules"][0]
		self.assertEqual(rule["lower"], ["-inf", 0.1])
		self.assertEqual(rule["upper"], [2.5, "+inf"])
		# strict JSON: no Infinity literals
		json.loads(dumps_archive(hand_archive()), parse_constant=self.fail)

	def test_loaded_values(self):
		archive = loads_archive(dumps_archive(hand_archive()))
		self.assertEqual(archive.best, hand_archive().models[1])
		self.assertEqual(archive.fitness[1].fscore, 1 / 3)
		self.assertEqual(archive.settings["dataset"], "people.csv")

	def test_evolved_population(self):
		dataset = random_dataset(np.random.default_rng(6), num_instances=50)
		result = run(dataset, EvolutionConfig(pop_size=6, max_generations=5, mutants_per_generation=4, t=5))
		archive = ModelArchive(
			dataset.feature_names, dataset.label_names, result.default, result.population, result.fitness, result.best_index
		)
		with tempfile.TemporaryDirectory() as tmp:
			path = Path(tmp) / "archive.json"
			dump_archive(archive, path)
			reloaded = load_archive(path)
		self.assertEqual(len(reloaded.models), 6)
		self.assertEqual(reloaded.models, result.population)
		self.assertTrue(all(model_consistent(model) for model in reloaded.models))

	def test_rejects_inconsistent_model(self):
		document = archive_to_dict(hand_archive())
		document["models"][1]["rules"][1]["lower"] = [0, 0]
		document["models"][1]["rules"][1]["upper"] = ["+inf", "+inf"]
		with self.assertRaises(ValidationError):
			loads_archive(json.dumps(document))

	def test_rejects_wrong_version(self):
		document = archive_to_dict(hand_archive())
		document["format_version"] = 99
		with self.assertRaises(ValidationError):
			loads_archive(json.dumps(document))

	def test_rejects_malformed(self):
		for text in ("not json", "[1, 2]", json.dumps({"format_version": 1})):
			with self.assertRaises(ValidationError):
				loads_archive(text)

	def test_rejects_bad_best_index(self):
		document = archive_to_dict(hand_archive())
		document["best_index"] = 2
		with self.assertRaises(ValidationError):
			loads_archive(json.dumps(document))

	def test_rejects_arity_mismatch(self):
		document = archive_to_dict(hand_archive())
		document["num_features"] = 3
		with self.assertRaises(ValidationError):
			loads_archive(json.dumps(document))

	def test_rejects_non_numeric_fields(self):
		for key in ("num_features", "best_index"):
			document = archive_to_dict(hand_archive())
			document[key] = "two"
			with self.assertRaises(ValidationError):
				loads_archive(json.dumps(document))
		document = archive_to_dict(hand_archive())
		document["models"][0]["fscore"] = "high"
		with self.assertRaises(ValidationError):
			loads_archive(json.dumps(document))

	def test_rejects_invalid_utf8(self):
		with tempfile.TemporaryDirectory() as tmp:
			path = Path(tmp) / "archive.json"
			path.write_bytes(b"{\"format_version\": \xff}")
			with self.assertRaises(ValidationError):
				load_archive(path)

	def test_missing_file(self):
		with self.assertRaises(OSError):
			load_archive("/nonexistent/archive.json")

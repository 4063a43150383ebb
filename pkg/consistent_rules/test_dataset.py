# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import os
import tempfile
from pathlib import Path

import numpy as np

from consistent_rules.dataset import (
	Dataset,
	FoldSplit,
	convert_arff,
	load_dataset,
	load_folds,
	read_numeric_table,
	save_dataset,
	save_folds,
	split_folds,
)
from consistent_rules.exceptions import DatasetParseError, ValidationError
from consistent_rules.testing import RuleEngineTestCase, fixture_path, random_dataset


class TestLoadDataset(RuleEngineTestCase):
	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.addCleanup(self.tmp.cleanup)

	def write(self, text: str) -> Path:
		path = Path(self.tmp.name) / "data.csv"
		path.write_text(text, encoding="utf-8")
		return path

	def test_three_rows(self):
		dataset = load_dataset(self.write("f1,f2,y\n1,2,0\n3.5,-4,1\n0,0,1\n"), 1)
		self.assertEqual(dataset.features.shape, (3, 2))
		self.assertEqual(dataset.labels.shape, (3, 1))
		self.assertEqual(dataset.feature_names, ("f1", "f2"))
		self.assertEqual(dataset.label_names, ("y",))
		np.testing.assert_array_equal(dataset.features[1], [3.5, -4.0])
		np.testing.assert_array_equal(dataset.labels[:, 0], [0, 1, 1])

	def test_label_value_two_names_cell(self):
		with self.assertRaises(DatasetParseError) as raised:
			load_dataset(self.write("f1,y\n1,0\n2,2\n"), 1)
		self.assertIn("row 2", str(raised.exception))
		self.assertIn("'y'", str(raised.exception))

	def test_non_numeric_cell(self):
		with self.assertRaises(DatasetParseError) as raised:
			load_dataset(self.write("f1,f2,y\n1,abc,0\n"), 1)
		self.assertIn("'f2'", str(raised.exception))

	def test_missing_value(self):
		with self.assertRaises(DatasetParseError):
			load_dataset(self.write("f1,f2,y\n1,,0\n"), 1)
		with self.assertRaises(DatasetParseError):
			load_dataset(self.write("f1,f2,y\n1,nan,0\n"), 1)

	def test_short_row(self):
		with self.assertRaises(DatasetParseError):
			load_dataset(self.write("f1,f2,y\n1,2,0\n1,2\n"), 1)

	def test_extra_column_on_every_row(self):
		with self.assertRaises(DatasetParseError) as raised:
			load_dataset(self.write("a,b,y\n1,2,3,0\n4,5,6,1\n"), 1)
		self.assertIn("more columns than the header", str(raised.exception))

	def test_invalid_utf8(self):
		path = Path(self.tmp.name) / "latin.csv"
		path.write_bytes(b"f1,y\n1,0\n\xff,1\n")
		with self.assertRaises(DatasetParseError):
			load_dataset(path, 1)

	def test_too_many_label_columns(self):
		with self.assertRaises(DatasetParseError):
			load_dataset(self.write("f1,y\n1,0\n"), 2)

	def test_empty_file(self):
		with self.assertRaises(DatasetParseError):
			load_dataset(self.write(""), 1)
		with self.assertRaises(DatasetParseError):
			load_dataset(self.write("f1,y\n"), 1)

	def test_parse_error_is_a_validation_error(self):
		self.assertTrue(issubclass(DatasetParseError, ValidationError))

	def test_fixture(self):
		dataset = load_dataset(fixture_path("toy.csv"), 2)
		self.assertEqual((dataset.num_instances, dataset.num_features, dataset.num_labels), (60, 3, 2))

	def test_read_numeric_table(self):
		values, columns = read_numeric_table(fixture_path("tiny.csv"))
		self.assertEqual(columns, ["a", "b", "y"])
		self.assertEqual(values.shape, (6, 3))

	def test_round_trip(self):
		rng = np.random.default_rng(3)
		features = rng.normal(size=(25, 4)) * 10.0 ** rng.integers(-5, 5, size=(25, 4))
		original = Dataset(features, rng.integers(0, 2, size=(25, 3)))
		path = Path(self.tmp.name) / "round.csv"
		save_dataset(original, path)
		reloaded = load_dataset(path, 3)
		np.testing.assert_array_equal(reloaded.features, original.features)
		np.testing.assert_array_equal(reloaded.labels, original.labels)
		self.assertEqual(reloaded.feature_names, original.feature_names)

	@staticmethod
	def emotions_path():
		return os.environ.get("CONSISTENT_RULES_EMOTIONS")

	def test_emotions_shape(self):
		path = self.emotions_path()
		if not path:
			self.skipTest("CONSISTENT_RULES_EMOTIONS is not set")
		dataset = load_dataset(path, 6)
		self.assertEqual((dataset.num_instances, dataset.num_features, dataset.num_labels), (593, 72, 6))


class TestDataset(RuleEngineTestCase):
	def test_read_only(self):
		dataset = Dataset([[1.0], [2.0]], [[0], [1]])
		with self.assertRaises(ValueError):
			dataset.features[0, 0] = 5.0

	def test_invalid_labels(self):
		with self.assertRaises(ValidationError):
			Dataset([[1.0]], [[2]])

	def test_row_mismatch(self):
		with self.assertRaises(ValidationError):
			Dataset([[1.0], [2.0]], [[1]])

	def test_feature_values_and_next_values(self):
		dataset = Dataset([[3.0, 1.0], [1.0, 1.0], [3.0, 2.0], [2.0, 5.0]], [[0], [1], [0], [1]])
		np.testing.assert_array_equal(dataset.feature_values[0], [1.0, 2.0, 3.0])
		np.testing.assert_array_equal(dataset.next_values[:, 0], [np.inf, 2.0, np.inf, 3.0])
		np.testing.assert_array_equal(dataset.next_values[:, 1], [2.0, 2.0, 5.0, np.inf])

	def test_feature_scale(self):
		dataset = Dataset([[0.0, 4.0], [10.0, 4.0]], [[0], [1]])
		np.testing.assert_array_equal(dataset.feature_scale, [10.0, 1.0])

	def test_subset_recomputes_values(self):
		dataset = Dataset([[1.0], [2.0], [3.0]], [[0], [1], [1]])
		part = dataset.subset([0, 2])
		np.testing.assert_array_equal(part.feature_values[0], [1.0, 3.0])
		self.assertEqual(part.label_names, dataset.label_names)
		with self.assertRaises(ValidationError):
			dataset.subset([])


class TestFolds(RuleEngineTestCase):
	def test_pigeonhole(self):
		dataset = random_dataset(np.random.default_rng(0), num_instances=10)
		split = split_folds(dataset, 10, np.random.default_rng(1))
		self.assertEqual(sorted(len(split.fold_indices(f)) for f in range(10)), [1] * 10)

	def test_size_balance(self):
		dataset = random_dataset(np.random.default_rng(0), num_instances=11)
		split = split_folds(dataset, 10, np.random.default_rng(1))
		self.assertEqual(sorted(len(split.fold_indices(f)) for f in range(10)), [1] * 9 + [2])

	def test_deterministic(self):
		dataset = random_dataset(np.random.default_rng(0), num_instances=37)
		first = split_folds(dataset, 5, np.random.default_rng(42))
		second = split_folds(dataset, 5, np.random.default_rng(42))
		self.assertEqual(first, second)

	def test_partition(self):
		split = FoldSplit(3, (0, 1, 2, 0, 1, 2, 0))
		train, test = split.partition(0)
		np.testing.assert_array_equal(test, [0, 3, 6])
		np.testing.assert_array_equal(train, [1, 2, 4, 5])

	def test_too_many_folds(self):
		dataset = random_dataset(np.random.default_rng(0), num_instances=4)
		with self.assertRaises(ValidationError):
			split_folds(dataset, 5, np.random.default_rng(0))

	def test_unbalanced_assignment(self):
		with self.assertRaises(ValidationError):
			FoldSplit(2, (0, 0, 0, 1))
		with self.assertRaises(ValidationError):
			FoldSplit(3, (0, 1, 0, 1))

	def test_save_and_load(self):
		dataset = random_dataset(np.random.default_rng(0), num_instances=23)
		split = split_folds(dataset, 4, np.random.default_rng(9))
		with tempfile.TemporaryDirectory() as tmp:
			path = Path(tmp) / "folds.csv"
			save_folds(split, path)
			self.assertEqual(path.read_text().splitlines()[0], "instance_index,fold_index")
			self.assertEqual(load_folds(path, 23), split)
			with self.assertRaises(ValidationError):
				load_folds(path, 24)

	def test_load_rejects_bad_fold_files(self):
		with tempfile.TemporaryDirectory() as tmp:
			path = Path(tmp) / "folds.csv"
			for text in ("instance_index,fold_index\n0,0\n1,a\n", "instance_index,fold_index\n0,0.5\n1,1\n", ""):
				path.write_text(text)
				with self.assertRaises(DatasetParseError):
					load_folds(path, 2)
			path.write_bytes(b"instance_index,fold_index\n0,0\n1,\xff\n")
			with self.assertRaises(DatasetParseError):
				load_folds(path, 2)


class TestConvertArff(RuleEngineTestCase):
	def test_convert(self):
		with tempfile.TemporaryDirectory() as tmp:
			csv_path = Path(tmp) / "tiny.csv"
			converted = convert_arff(fixture_path("tiny.arff"), csv_path, 2)
			self.assertEqual(converted.feature_names, ("a", "b"))
			self.assertEqual(converted.label_names, ("amazed", "happy"))

			reloaded = load_dataset(csv_path, 2)
			np.testing.assert_array_equal(reloaded.features, [[0.5, 1.25], [1.5, -2], [2.75, 3], [-1, 0]])
			np.testing.assert_array_equal(reloaded.labels, [[1, 0], [0, 1], [1, 1], [0, 0]])

	def test_label_count_out_of_range(self):
		with tempfile.TemporaryDirectory() as tmp:
			with self.assertRaises(DatasetParseError):
				convert_arff(fixture_path("tiny.arff"), Path(tmp) / "x.csv", 4)

	def test_fractional_label_rejected(self):
		with tempfile.TemporaryDirectory() as tmp:
			arff_path = Path(tmp) / "fractional.arff"
			arff_path.write_text(
				"@relation fractional\n@attribute x numeric\n@attribute y numeric\n@data\n1,1\n2,0.5\n", encoding="utf-8"
			)
			with self.assertRaises(DatasetParseError) as raised:
				convert_arff(arff_path, Path(tmp) / "x.csv", 1)
			self.assertIn("row 2", str(raised.exception))
			self.assertFalse((Path(tmp) / "x.csv").exists())

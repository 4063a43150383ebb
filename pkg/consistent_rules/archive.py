# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from loguru import logger

from consistent_rules import hooks
from consistent_rules.exceptions import ValidationError, log_error, throw
from consistent_rules.nsga2 import FitnessTuple
from consistent_rules.rule_model import Box, DefaultRule, Individual, Rule, model_consistent


@dataclass
class ModelArchive:
	"""A trained population: every model, its training fitness and the default rule."""

	feature_names: tuple[str, ...]
	label_names: tuple[str, ...]
	default: DefaultRule
	models: list[Individual]
	fitness: list[FitnessTuple]
	best_index: int = 0
	settings: dict = field(default_factory=dict)

	@property
	def num_features(self) -> int:
		return len(self.feature_names)

	@property
	def num_labels(self) -> int:
		return len(self.label_names)

	@property
	def best(self) -> Individual:
		return self.models[self.best_index]


def _encode_bound(value: float) -> float | str:
	if value == -math.inf:
		return hooks.negative_infinity
	if value == math.inf:
		return hooks.positive_infinity
	return value


def _decode_bound(value) -> float:
	if value == hooks.negative_infinity:
		return -math.inf
	if value == hooks.positive_infinity:
		return math.inf
	if isinstance(value, bool) or not isinstance(value, int | float):
		throw(f"Invalid rule bound {value!r}")
	return float(value)


def archive_to_dict(archive: ModelArchive) -> dict:
	return {
		"app": hooks.app_name,
		"format_version": hooks.archive_format_version,
		"num_features": archive.num_features,
		"num_labels": archive.num_labels,
		"feature_names": list(archive.feature_names),
		"label_names": list(archive.label_names),
		"default_rule": list(archive.default.consequent),
		"best_index": archive.best_index,
		"settings": archive.settings,
		"models": [
			{
				"fscore": fitness.fscore,
				"size": fitness.size,
				"rules": [
					{
						"lower": [_encode_bound(v) for v in rule.antecedent.lower],
						"upper": [_encode_bound(v) for v in rule.antecedent.upper],
						"consequent": list(rule.consequent),
					}
					for rule in model.rules
				],
			}
			for model, fitness in zip(archive.models, archive.fitness)
		],
	}


def archive_from_dict(document: dict) -> ModelArchive:
	try:
		if document.get("format_version") != hooks.archive_format_version:
			throw(f"Unsupported archive format version {document.get('format_version')!r}")
		num_features = int(document["num_features"])
		num_labels = int(document["num_labels"])

		models, fitness = [], []
		for position, entry in enumerate(document["models"]):
			rules = tuple(
				Rule(
					Box(
						tuple(_decode_bound(v) for v in rule["lower"]),
						tuple(_decode_bound(v) for v in rule["upper"]),
					),
					tuple(rule["consequent"]),
				)
				for rule in entry["rules"]
			)
			model = Individual(rules)
			if model.num_features != num_features or model.num_labels != num_labels:
				throw(f"Model {position} does not match the archive arities ({num_features}, {num_labels})")
			if not model_consistent(model):
				throw(f"Model {position} contains conflicting rules")
			models.append(model)
			fitness.append(FitnessTuple(float(entry["fscore"]), int(entry["size"])))

		archive = ModelArchive(
			feature_names=tuple(document["feature_names"]),
			label_names=tuple(document["label_names"]),
			default=DefaultRule(tuple(document["default_rule"])),
			models=models,
			fitness=fitness,
			best_index=int(document["best_index"]),
			settings=dict(document.get("settings") or {}),
		)
	except (KeyError, TypeError, ValueError) as e:
		throw(f"Malformed archive: missing or invalid field {e}")

	if not models:
		throw("Archive holds no models")
	if len(archive.feature_names) != num_features or len(archive.label_names) != num_labels:
		throw("Archive names do not match its arities")
	if len(archive.default.consequent) != num_labels:
		throw("Default rule does not match the label arity")
	if not 0 <= archive.best_index < len(models):
		throw(f"Best index {archive.best_index} outside the population")
	return archive


def dumps_archive(archive: ModelArchive) -> str:
	return json.dumps(archive_to_dict(archive), indent=1) + "\n"


def loads_archive(text: str) -> ModelArchive:
	try:
		document = json.loads(text)
	except json.JSONDecodeError as e:
		throw(f"Archive is not valid JSON: {e}")
	if not isinstance(document, dict):
		throw("Archive must be a JSON object")
	return archive_from_dict(document)


def dump_archive(archive: ModelArchive, path: str | Path) -> None:
	Path(path).write_text(dumps_archive(archive), encoding="utf-8")
	logger.info(f"Wrote {len(archive.models)} models to {path}")


def load_archive(path: str | Path) -> ModelArchive:
	try:
		try:
			text = Path(path).read_text(encoding="utf-8")
		except UnicodeDecodeError as e:
			throw(f"Archive is not valid UTF-8 text: {e}")
		return loads_archive(text)
	except ValidationError as e:
		log_error(hooks.archive_issue_title, f"{path}: {e}")
		raise

# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import json
from functools import cache
from pathlib import Path

from consistent_rules.evolution import EvolutionConfig, MutationWeights
from consistent_rules.exceptions import ValidationError, throw

SCHEMA_PATH = Path(__file__).with_name("experiment_settings.json")
LAYOUT_FIELDTYPES = ("Section Break", "Column Break")
TRUE_VALUES = ("1", "true", "yes", "on")
FALSE_VALUES = ("0", "false", "no", "off")


@cache
def get_fields() -> dict[str, dict]:
	"""Value fields of the settings schema keyed by fieldname, in schema order."""
	schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
	fields = {f["fieldname"]: f for f in schema["fields"] if f["fieldtype"] not in LAYOUT_FIELDTYPES}
	order = [name for name in schema["field_order"] if name in fields]
	return {name: fields[name] for name in order}


def coerce(fieldname: str, value):
	field = get_fields()[fieldname]
	if value is None or (isinstance(value, str) and not value.strip()):
		return None
	fieldtype = field["fieldtype"]
	if fieldtype == "Int":
		if isinstance(value, bool):
			return int(value)
		try:
			return int(str(value).strip())
		except ValueError:
			throw(f"Setting '{fieldname}' expects an integer, got {value!r}")
	if fieldtype == "Check":
		text = str(value).strip().lower()
		if text in TRUE_VALUES:
			return 1
		if text in FALSE_VALUES:
			return 0
		throw(f"Setting '{fieldname}' expects 0 or 1, got {value!r}")
	return str(value).strip()


class ExperimentSettings:
	"""
	Resolved experiment configuration.

	Field names, types and defaults come from `experiment_settings.json`.
	"""

	def __init__(self, **values):
		for fieldname, field in get_fields().items():
			setattr(self, fieldname, coerce(fieldname, field.get("default")))
		for key, value in values.items():
			self.set(key, value)

	def set(self, key: str, value) -> None:
		fieldname = key.strip().replace("-", "_")
		if fieldname not in get_fields():
			throw(f"Unknown setting '{key}'")
		setattr(self, fieldname, coerce(fieldname, value))

	def as_dict(self) -> dict:
		return {fieldname: getattr(self, fieldname) for fieldname in get_fields()}

	def validate(self, cross_validating: bool = False):
		self.validate_dataset()
		self.validate_counts()
		self.validate_weights()
		self.validate_seed()
		if cross_validating:
			self.validate_folds()

	def validate_dataset(self):
		"""Validate dataset location"""
		if not self.dataset:
			throw("Dataset path is required")

		if self.labels is None or self.labels < 1:
			throw("Label count is required and must be positive")

	def validate_counts(self):
		for fieldname in ("runs", "jobs", "pop_size", "generations", "mutants", "max_failed", "t"):
			value = getattr(self, fieldname)
			if value is None or value < 1:
				throw(f"{get_fields()[fieldname]['label']} must be a positive integer")

	def validate_weights(self):
		for fieldname in ("add_weight", "remove_weight", "substitute_weight"):
			value = getattr(self, fieldname)
			if value is None or value < 1:
				throw(f"{get_fields()[fieldname]['label']} must be a positive integer")

	def validate_seed(self):
		if self.seed is None or self.seed < 0:
			throw("Random seed must be a non-negative integer")

	def validate_folds(self):
		if self.folds is None or self.folds < 2:
			throw("Cross-validation needs at least 2 folds")

	def evolution_config(self, rng_seed: int | None = None) -> EvolutionConfig:
		return EvolutionConfig(
			pop_size=self.pop_size,
			max_generations=self.generations,
			mutants_per_generation=self.mutants,
			max_failed_attempts=self.max_failed,
			t=self.t,
			mutation_weights=MutationWeights(self.add_weight, self.remove_weight, self.substitute_weight),
			rng_seed=self.seed if rng_seed is None else rng_seed,
			check_invariants=bool(self.check_invariants),
		)


def load_settings(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentSettings:
	"""
	Settings from a `key = value` file, then command-line overrides.

	Blank lines and `#` comments are ignored; overrides whose value is None
	are skipped.
	"""
	settings = ExperimentSettings()
	if path is not None:
		for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
			line = line.split("#", 1)[0].strip()
			if not line:
				continue
			key, separator, value = line.partition("=")
			if not separator:
				throw(f"{path}, line {number}: expected 'key = value', got {line!r}")
			try:
				settings.set(key, value)
			except ValidationError as e:
				throw(f"{path}, line {number}: {e}")

	for key, value in (overrides or {}).items():
		if value is not None:
			settings.set(key, value)
	return settings


def dump_settings(settings: ExperimentSettings, path: str | Path) -> None:
	lines = [f"{key} = {'' if value is None else value}" for key, value in settings.as_dict().items()]
	Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

from typing import NoReturn

from loguru import logger


class RuleEngineError(Exception):
	exit_code = 3


class ValidationError(RuleEngineError):
	"""Invalid user input: settings, dataset files, archives."""

	exit_code = 1


class DatasetParseError(ValidationError):
	pass


class PreconditionError(RuleEngineError):
	"""An engine operation was called outside its contract."""


class InvariantViolation(RuleEngineError):
	"""A consistency guarantee of the engine was broken. Never expected."""


def throw(message: str, exc: type[RuleEngineError] = ValidationError) -> NoReturn:
	raise exc(message)


def log_error(title: str, message: str) -> None:
	"""
	Log a failed user-facing operation under a short title.
	"""
	logger.bind(title=title).error(f"{title}: {message}")

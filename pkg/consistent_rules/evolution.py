# Copyright (c) 2026, consistent_rules contributors
# For license information, please see license.txt

import enum
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from consistent_rules import hooks
from consistent_rules.dataset import Dataset
from consistent_rules.exceptions import InvariantViolation, PreconditionError, log_error, throw
from consistent_rules.metrics import default_rule, evaluate
from consistent_rules.nsga2 import FitnessTuple, select_indices
from consistent_rules.rule_model import DefaultRule, Individual, model_disjoint
from consistent_rules.rulegen import RuleGenConfig, create_rule, init_individual, uncovered_instances


class Mutation(enum.Enum):
	ADD = "add"
	REMOVE = "remove"
	SUBSTITUTE = "substitute"


class StopReason(str, enum.Enum):
	GENERATIONS_EXHAUSTED = "generations-exhausted"
	FAILED_ATTEMPTS = "failed-attempts"


@dataclass(frozen=True)
class MutationWeights:
	add: int = 1
	remove: int = 2
	substitute: int = 4

	def __post_init__(self):
		if min(self.add, self.remove, self.substitute) < 1:
			throw(f"Mutation weights must be positive integers, got {self}")

	@property
	def total(self) -> int:
		return self.add + self.remove + self.substitute


@dataclass(frozen=True)
class EvolutionConfig:
	pop_size: int = 80
	max_generations: int = 200
	mutants_per_generation: int = 40
	max_failed_attempts: int = 2000
	t: int = 128
	mutation_weights: MutationWeights = field(default_factory=MutationWeights)
	rng_seed: int = 0
	check_invariants: bool = True

	def __post_init__(self):
		for name in ("pop_size", "max_generations", "mutants_per_generation", "max_failed_attempts", "t"):
			if getattr(self, name) < 1:
				throw(f"{name} must be a positive integer, got {getattr(self, name)}")

	@property
	def rulegen(self) -> RuleGenConfig:
		return RuleGenConfig(self.t)


@dataclass(frozen=True)
class GenerationLog:
	generation: int
	fitness: tuple[FitnessTuple, ...]
	failed_attempts: int
	stop_reason: StopReason | None = None

	def to_record(self) -> dict:
		"""Summary written as one JSON line per generation."""
		scores = np.array([f.fscore for f in self.fitness])
		sizes = np.array([f.size for f in self.fitness])
		return {
			"generation": self.generation,
			"best_fscore": float(scores.max()),
			"median_fscore": float(np.median(scores)),
			"min_size": int(sizes.min()),
			"median_size": float(np.median(sizes)),
			"max_size": int(sizes.max()),
			"failed_attempts": self.failed_attempts,
			"stop_reason": self.stop_reason.value if self.stop_reason else None,
		}


@dataclass
class EvolutionResult:
	population: list[Individual]
	fitness: list[FitnessTuple]
	logs: list[GenerationLog]
	default: DefaultRule

	@property
	def best_index(self) -> int:
		return best_index(self.fitness)


def best_index(fitness: list[FitnessTuple]) -> int:
	"""Highest F-Score; ties go to the smaller model, then the lower index."""
	return min(range(len(fitness)), key=lambda i: (-fitness[i].fscore, fitness[i].size, i))


def pick_mutation(rng: np.random.Generator, weights: MutationWeights | None = None) -> Mutation:
	"""
	Uniform draw in [1, total weight]: the top `add` faces add a rule, the next
	`remove` faces remove one and the rest substitute. With the default 1/2/4
	weights, 7 adds, 5-6 remove and 1-4 substitute.
	"""
	weights = weights or MutationWeights()
	draw = int(rng.integers(1, weights.total + 1))
	if draw > weights.total - weights.add:
		return Mutation.ADD
	if draw > weights.substitute:
		return Mutation.REMOVE
	return Mutation.SUBSTITUTE


def mutate_add(
	ind: Individual, dataset: Dataset, cfg: RuleGenConfig, rng: np.random.Generator
) -> Individual | None:
	if uncovered_instances(ind.rules, dataset).size == 0:
		return None
	return Individual((*ind.rules, create_rule(ind.rules, dataset, cfg, rng)))


def mutate_remove(ind: Individual, rng: np.random.Generator) -> Individual | None:
	if ind.size == 1:
		return None
	shuffled = [ind.rules[i] for i in rng.permutation(ind.size)]
	return Individual(tuple(shuffled[:-1]))


def mutate_substitute(
	ind: Individual, dataset: Dataset, cfg: RuleGenConfig, rng: np.random.Generator
) -> Individual:
	removed = int(rng.integers(ind.size))
	reduced = ind.rules[:removed] + ind.rules[removed + 1 :]
	try:
		replacement = create_rule(reduced, dataset, cfg, rng)
	except PreconditionError:
		# the removed rule covered at least its own seed instance
		throw("Substitution found no uncovered instance after removing a rule", InvariantViolation)
	return Individual((*reduced, replacement))


def apply_mutation(
	mutation: Mutation, ind: Individual, dataset: Dataset, cfg: RuleGenConfig, rng: np.random.Generator
) -> Individual | None:
	if mutation is Mutation.ADD:
		return mutate_add(ind, dataset, cfg, rng)
	if mutation is Mutation.REMOVE:
		return mutate_remove(ind, rng)
	return mutate_substitute(ind, dataset, cfg, rng)


def _check(ind: Individual, cfg: EvolutionConfig) -> Individual:
	if cfg.check_invariants and not model_disjoint(ind):
		message = f"Individual with {ind.size} rules has overlapping rule boxes"
		log_error(hooks.evolution_issue_title, message)
		throw(message, InvariantViolation)
	return ind


def run(
	dataset: Dataset,
	cfg: EvolutionConfig,
	on_generation: Callable[[GenerationLog], None] | None = None,
	rng: np.random.Generator | None = None,
) -> EvolutionResult:
	"""
	Mutation-selection loop on a training partition.

	Every generation produces `mutants_per_generation` mutated clones of
	uniformly drawn parents from the pre-generation population, then keeps
	`pop_size` survivors by NSGA-II over (F-Score, rule count). Evolution stops
	after `max_generations`, or as soon as `max_failed_attempts` mutation
	attempts fail within one generation; the partial mutants of that
	generation are discarded.
	"""
	rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
	rulegen_cfg = cfg.rulegen
	default = default_rule(dataset)

	logger.info(
		f"Evolving {cfg.pop_size} individuals for up to {cfg.max_generations} generations "
		f"on {dataset.num_instances} instances (t={cfg.t})"
	)
	population = [_check(init_individual(dataset, rulegen_cfg, rng), cfg) for _ in range(cfg.pop_size)]
	fitness = [evaluate(ind, default, dataset) for ind in population]
	logs = []

	for generation in range(cfg.max_generations):
		mutants = []
		failed = 0
		while len(mutants) < cfg.mutants_per_generation and failed < cfg.max_failed_attempts:
			parent = population[int(rng.integers(len(population)))]
			mutant = apply_mutation(pick_mutation(rng, cfg.mutation_weights), parent, dataset, rulegen_cfg, rng)
			if mutant is None:
				failed += 1
				continue
			mutants.append(_check(mutant, cfg))

		if len(mutants) < cfg.mutants_per_generation:
			log = GenerationLog(generation, tuple(fitness), failed, StopReason.FAILED_ATTEMPTS)
			logs.append(log)
			if on_generation:
				on_generation(log)
			logger.info(f"Stopping at generation {generation}: {failed} failed mutation attempts")
			break

		pool = population + mutants
		pool_fitness = fitness + [evaluate(ind, default, dataset) for ind in mutants]
		survivors = select_indices(pool_fitness, cfg.pop_size)
		population = [pool[i] for i in survivors]
		fitness = [pool_fitness[i] for i in survivors]

		last = generation == cfg.max_generations - 1
		log = GenerationLog(generation, tuple(fitness), failed, StopReason.GENERATIONS_EXHAUSTED if last else None)
		logs.append(log)
		if on_generation:
			on_generation(log)
		record = log.to_record()
		logger.debug(
			f"generation {generation}: best F {record['best_fscore']:.4f}, "
			f"sizes {record['min_size']}-{record['max_size']}, {failed} failed attempts"
		)

	best = best_index(fitness)
	logger.info(f"Training-best model: F={fitness[best].fscore:.4f} with {fitness[best].size} rules")
	return EvolutionResult(population, fitness, logs, default)

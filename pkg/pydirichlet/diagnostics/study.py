"""Whether the boundary estimate constant stays put as the regularization ε goes to zero"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Protocol

import numpy as np

from pydirichlet.errors import InsufficientLevelsError

logger = logging.getLogger(__name__)

MIN_LEVELS = 4
BOUNDED_SPREAD = 4.0
"""max C_ε / min C_ε over the last MIN_LEVELS levels, at or below which the constant counts as bounded"""


class EstimateLevel(Protocol):
	@property
	def epsilon(self) -> float: ...

	@property
	def boundary_constant(self) -> float: ...


@dataclass(frozen=True)
class SyntheticLevel:
	epsilon: float
	boundary_constant: float


class Verdict(StrEnum):
	Bounded = 'BOUNDED'
	Growing = 'GROWING'


@dataclass(frozen=True)
class DeltaStudy:
	verdict: Verdict
	epsilons: tuple[float, ...]
	constants: tuple[float, ...]
	spread: float
	"""Over the last levels"""
	exponent: float
	"""Slope of log C_ε against log(1/ε) over all levels"""

	def to_dict(self) -> dict[str, Any]:
		return {
			'verdict': str(self.verdict),
			'epsilons': list(self.epsilons),
			'constants': list(self.constants),
			'spread': self.spread,
			'exponent': self.exponent,
		}


def delta_independence_study(levels: Sequence[EstimateLevel]) -> DeltaStudy:
	if len(levels) < MIN_LEVELS:
		raise InsufficientLevelsError(f'Need at least {MIN_LEVELS} ε levels, got {len(levels)}')
	epsilons = np.asarray([level.epsilon for level in levels], dtype=float)
	constants = np.asarray([level.boundary_constant for level in levels], dtype=float)
	tail = np.abs(constants[-MIN_LEVELS:])
	spread = float(tail.max() / tail.min()) if tail.min() > 0 else np.inf
	exponent = float(np.polyfit(np.log(1 / epsilons), np.log(np.maximum(np.abs(constants), np.finfo(float).tiny)), 1)[0])
	verdict = Verdict.Bounded if spread <= BOUNDED_SPREAD else Verdict.Growing
	logger.info('C_ε spread %.3g over the last %d levels, exponent %.3g: %s', spread, MIN_LEVELS, exponent, verdict)
	return DeltaStudy(verdict, tuple(epsilons.tolist()), tuple(constants.tolist()), spread, exponent)

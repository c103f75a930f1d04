"""Bordered matrices: a diagonal block, one border column and a corner entry. Once the corner is past a quadratic threshold in the border, the spectrum sits within ε of the diagonal plus one eigenvalue just above the corner."""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import GrowthConditionUnmetError, NonpositiveEpsilonError

if TYPE_CHECKING:
	from collections.abc import Sequence

	from pydirichlet.typedefs import FloatArray

logger = logging.getLogger(__name__)

ROUNDING_TOLERANCE = 1e-10
"""Allowance for rounding in the λ_n ≥ corner bound, relative to 1 + |corner|"""


def border_threshold(d: 'Sequence[float] | FloatArray', a: 'Sequence[float] | FloatArray', epsilon: float) -> float:
	"""Smallest corner entry for which the localization holds:
	(2n−3)/ε·Σ|a_i|² + (n−1)·Σ|d_i| + (n−2)ε/(2n−3)"""
	if epsilon <= 0:
		raise NonpositiveEpsilonError(f'ε must be positive, got {epsilon}')
	d = np.atleast_1d(np.asarray(d, dtype=float))
	a = np.atleast_1d(np.asarray(a, dtype=float))
	if d.shape != a.shape:
		raise ValueError(f'd and a need the same length, got {d.size} and {a.size}')
	n = d.size + 1
	return float(
		(2 * n - 3) / epsilon * np.sum(a**2) + (n - 1) * np.sum(np.abs(d)) + (n - 2) * epsilon / (2 * n - 3)
	)


def assemble_bordered(d: 'Sequence[float] | FloatArray', a: 'Sequence[float] | FloatArray', corner: float) -> 'FloatArray':
	"""d on the diagonal, a down the last column and along the last row, corner in the corner"""
	d = np.atleast_1d(np.asarray(d, dtype=float))
	a = np.atleast_1d(np.asarray(a, dtype=float))
	n = d.size + 1
	matrix = np.zeros((n, n))
	matrix[np.arange(n - 1), np.arange(n - 1)] = d
	matrix[:-1, -1] = a
	matrix[-1, :-1] = a
	matrix[-1, -1] = corner
	return matrix


@dataclass(frozen=True)
class BorderedMatrix:
	d: tuple[float, ...]
	a: tuple[float, ...]
	corner: float
	epsilon: float

	def __post_init__(self):
		if self.epsilon <= 0:
			raise NonpositiveEpsilonError(f'ε must be positive, got {self.epsilon}')
		if len(self.d) != len(self.a):
			raise ValueError(f'd and a need the same length, got {len(self.d)} and {len(self.a)}')

	@classmethod
	def at_threshold(cls, d: 'Sequence[float]', a: 'Sequence[float]', epsilon: float) -> 'BorderedMatrix':
		return cls(tuple(d), tuple(a), border_threshold(d, a, epsilon), epsilon)

	@property
	def order(self) -> int:
		return len(self.d) + 1

	@cached_property
	def threshold(self) -> float:
		return border_threshold(self.d, self.a, self.epsilon)

	@cached_property
	def matrix(self) -> 'FloatArray':
		return assemble_bordered(self.d, self.a, self.corner)


@dataclass(frozen=True)
class BorderLocalization:
	"""Eigenvalues of a bordered matrix, which one got paired with which d_α, and how much room each bound had left"""

	eigenvalues: tuple[float, ...]
	"""Ascending"""
	pairing: tuple[int, ...]
	"""pairing[α] is the index into eigenvalues that got paired with d_α"""
	deviations: tuple[float, ...]
	"""|d_α − λ_α|"""
	tangential_slacks: tuple[float, ...]
	"""ε − |d_α − λ_α|, positive when the bound holds strictly"""
	corner_excess: float
	"""λ_n − corner, which should be in [0, (n−1)ε)"""
	upper_slack: float
	"""(n−1)ε − (λ_n − corner)"""
	threshold: float
	growth_condition_met: bool
	passed: bool

	@property
	def largest(self) -> float:
		return self.eigenvalues[-1]

	def to_dict(self) -> dict[str, Any]:
		return {
			'eigenvalues': list(self.eigenvalues),
			'pairing': list(self.pairing),
			'deviations': list(self.deviations),
			'tangential_slacks': list(self.tangential_slacks),
			'corner_excess': self.corner_excess,
			'lower_slack': self.corner_excess,
			'upper_slack': self.upper_slack,
			'threshold': self.threshold,
			'growth_condition_met': self.growth_condition_met,
			'status': 'pass' if self.passed else 'fail',
		}


def border_localize(m: BorderedMatrix, *, assert_bounds: bool = True) -> BorderLocalization:
	"""Eigenvalues of m, checked against |d_α − λ_α| < ε and 0 ≤ λ_n − corner < (n−1)ε.

	The largest eigenvalue plays λ_n; the other n−1 are matched to d sorted-to-sorted, which on a line is the pairing minimizing the largest deviation.
	With assert_bounds=False the growth condition is not enforced and the report just says how it went."""
	threshold = m.threshold
	growth_met = m.corner >= threshold
	if assert_bounds and not growth_met:
		raise GrowthConditionUnmetError(
			f'Corner {m.corner} is below the threshold {threshold}', m.corner, threshold
		)
	n = m.order
	eigenvalues = np.linalg.eigvalsh(m.matrix)
	d = np.asarray(m.d, dtype=float)
	order = np.argsort(d, kind='stable')
	pairing = np.empty(n - 1, dtype=int)
	pairing[order] = np.arange(n - 1)
	deviations = np.abs(d - eigenvalues[pairing])
	tangential_slacks = m.epsilon - deviations
	corner_excess = float(eigenvalues[-1] - m.corner)
	upper_slack = (n - 1) * m.epsilon - corner_excess
	lower_ok = corner_excess >= -ROUNDING_TOLERANCE * (1 + abs(m.corner))
	passed = bool(np.all(tangential_slacks > 0) and lower_ok and upper_slack > 0)
	if growth_met and not passed:
		logger.warning('Bordered matrix localization failed above the threshold: %s', m)
	return BorderLocalization(
		tuple(eigenvalues.tolist()),
		tuple(pairing.tolist()),
		tuple(deviations.tolist()),
		tuple(tangential_slacks.tolist()),
		corner_excess,
		upper_slack,
		threshold,
		growth_met,
		passed,
	)


@dataclass(frozen=True)
class FuzzReport:
	instances: int
	failures: int
	min_tangential_slack: float
	min_upper_slack: float
	min_lower_slack: float
	worst: BorderedMatrix | None
	"""Instance with the smallest slack of any kind"""

	@property
	def passed(self) -> bool:
		return self.failures == 0

	def to_dict(self) -> dict[str, Any]:
		worst = self.worst
		return {
			'instances': self.instances,
			'failures': self.failures,
			'min_tangential_slack': self.min_tangential_slack,
			'min_upper_slack': self.min_upper_slack,
			'min_lower_slack': self.min_lower_slack,
			'worst': None if worst is None else {'d': list(worst.d), 'a': list(worst.a), 'epsilon': worst.epsilon},
			'status': 'pass' if self.passed else 'fail',
		}


def fuzz_localization(count: int, rng: np.random.Generator, max_order: int = 8) -> FuzzReport:
	"""Random bordered matrices with the corner exactly at the threshold, orders 2 … max_order, d and a standard normal, ε uniform in [0.05, 2)"""
	failures = 0
	slacks = [np.inf, np.inf, np.inf]
	worst, worst_slack = None, np.inf
	for _ in range(count):
		order = int(rng.integers(2, max_order + 1))
		d = rng.standard_normal(order - 1)
		a = rng.standard_normal(order - 1)
		epsilon = float(rng.uniform(0.05, 2.0))
		matrix = BorderedMatrix.at_threshold(d.tolist(), a.tolist(), epsilon)
		result = border_localize(matrix)
		failures += not result.passed
		instance = (min(result.tangential_slacks), result.upper_slack, result.corner_excess)
		slacks = [min(old, new) for old, new in zip(slacks, instance, strict=True)]
		if min(instance) < worst_slack:
			worst, worst_slack = matrix, min(instance)
	if failures:
		logger.warning('%d of %d bordered matrices broke the localization bounds', failures, count)
	return FuzzReport(count, failures, *(float(s) for s in slacks), worst)

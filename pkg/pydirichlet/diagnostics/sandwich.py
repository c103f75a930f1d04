"""Comparison principle check: the subsolution below u, and u below the solution h of the Poisson problem"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
	from pydirichlet.typedefs import GridField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SandwichReport:
	"""ū ≤ u ≤ h, node by node"""

	passed: bool
	tolerance: float
	lower_slack: float
	"""min(u − ū)"""
	lower_worst_node: int
	upper_slack: float
	"""min(h − u)"""
	upper_worst_node: int

	def to_dict(self) -> dict[str, Any]:
		return {
			'status': 'pass' if self.passed else 'fail',
			'tolerance': self.tolerance,
			'lower_slack': self.lower_slack,
			'lower_worst_node': self.lower_worst_node,
			'upper_slack': self.upper_slack,
			'upper_worst_node': self.upper_worst_node,
		}


def sandwich_check(
	u: 'GridField', lower: 'GridField', upper: 'GridField', tolerance: float = 1e-7
) -> SandwichReport:
	u, lower, upper = (np.asarray(field, dtype=float) for field in (u, lower, upper))
	if not u.shape == lower.shape == upper.shape:
		raise ValueError(f'Fields have different shapes: {u.shape}, {lower.shape}, {upper.shape}')
	below = u - lower
	above = upper - u
	lower_node = int(np.argmin(below))
	upper_node = int(np.argmin(above))
	passed = bool(below[lower_node] >= -tolerance and above[upper_node] >= -tolerance)
	if not passed:
		logger.info(
			'Sandwich fails: u − ū gets down to %g at node %d, h − u to %g at node %d',
			below[lower_node],
			lower_node,
			above[upper_node],
			upper_node,
		)
	return SandwichReport(passed, tolerance, float(below[lower_node]), lower_node, float(above[upper_node]), upper_node)

"""Structured grids on a single chart, and the finite difference operators on them.

Nodes are the inside points of a rectangular index box, stored in row-major order. Axes can wrap around (periodic), and a polar chart can continue its radial axis through the origin by reflection."""

import itertools
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse

if TYPE_CHECKING:
	from collections.abc import Sequence

	from pydirichlet.typedefs import FloatArray, Mask

	from .domains import Domain

logger = logging.getLogger(__name__)

type Stencil = Sequence[tuple[int, float]]
"""(step along the axis, coefficient) pairs"""

FIRST_DERIVATIVE_STENCILS: 'Sequence[Stencil]' = (
	((-1, -0.5), (1, 0.5)),
	((0, -1.5), (1, 2.0), (2, -0.5)),
	((0, 1.5), (-1, -2.0), (-2, 0.5)),
)
"""Central, then one-sided forward and backward, all second order; divided by h"""
SECOND_DERIVATIVE_STENCILS: 'Sequence[Stencil]' = (
	((-1, 1.0), (0, -2.0), (1, 1.0)),
	((0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)),
	((0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)),
)
"""Same, divided by h²"""


class Chart(StrEnum):
	Cartesian = 'cartesian'
	Polar = 'polar'


@dataclass(frozen=True)
class DifferenceOperators:
	first: tuple[scipy.sparse.csr_array, ...]
	"""∂_a, one per axis"""
	second: dict[tuple[int, int], scipy.sparse.csr_array]
	"""∂_a∂_b for a ≤ b"""
	missing: 'Mask'
	"""Nodes where some derivative had no stencil to use (their rows are zero)"""

	def second_derivative(self, a: int, b: int) -> scipy.sparse.csr_array:
		return self.second[(min(a, b), max(a, b))]


@dataclass(frozen=True, eq=False)
class ChartGrid:
	chart: Chart
	axes: tuple['FloatArray', ...]
	"""Chart coordinates along each axis, equally spaced"""
	inside: 'Mask'
	"""Which points of the index box belong to the domain"""
	periodic: tuple[bool, ...]
	reflect_origin: bool = False
	"""Polar charts only: index −1−j on the radial axis is ring j half a turn further round"""
	domain: 'Domain | None' = field(default=None, repr=False)
	_neighbours: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict, init=False, repr=False)

	@property
	def dimension(self) -> int:
		return len(self.axes)

	@property
	def shape(self) -> tuple[int, ...]:
		return tuple(len(axis) for axis in self.axes)

	@cached_property
	def spacing(self) -> tuple[float, ...]:
		return tuple(float(axis[1] - axis[0]) for axis in self.axes)

	@cached_property
	def multi_index(self) -> np.ndarray:
		"""(nodes, n) index into the box for every node"""
		return np.argwhere(self.inside)

	@property
	def size(self) -> int:
		return self.multi_index.shape[0]

	@cached_property
	def node_of(self) -> np.ndarray:
		"""Box-shaped array of node numbers, −1 outside the domain"""
		lookup = np.full(self.shape, -1, dtype=int)
		lookup[tuple(self.multi_index.T)] = np.arange(self.size)
		return lookup

	@cached_property
	def coords(self) -> 'FloatArray':
		"""Chart coordinates, (nodes, n)"""
		return np.stack([axis[self.multi_index[:, i]] for i, axis in enumerate(self.axes)], axis=-1)

	@cached_property
	def physical(self) -> 'FloatArray':
		"""Cartesian position of every node"""
		if self.domain is None:
			return self.coords
		return self.domain.to_physical(self.coords)

	def neighbour(self, offset: 'Sequence[int]') -> np.ndarray:
		"""For every node, the node at the given index offset, or −1 if that falls outside the domain"""
		offset = tuple(int(step) for step in offset)
		if offset in self._neighbours:
			return self._neighbours[offset]
		index = self.multi_index + np.asarray(offset)
		if self.reflect_origin:
			through = index[:, 0] < 0
			index[through, 0] = -index[through, 0] - 1
			index[through, 1] += self.shape[1] // 2
		for axis, wraps in enumerate(self.periodic):
			if wraps:
				index[:, axis] %= self.shape[axis]
		valid = np.all((index >= 0) & (index < np.asarray(self.shape)), axis=-1)
		result = np.full(self.size, -1, dtype=int)
		result[valid] = self.node_of[tuple(index[valid].T)]
		self._neighbours[offset] = result
		return result

	def axis_neighbour(self, axis: int, step: int) -> np.ndarray:
		offset = [0] * self.dimension
		offset[axis] = step
		return self.neighbour(offset)

	@cached_property
	def interior_mask(self) -> 'Mask':
		"""Nodes whose whole 3ⁿ neighbourhood is in the domain"""
		mask = np.ones(self.size, dtype=bool)
		for offset in itertools.product((-1, 0, 1), repeat=self.dimension):
			mask &= self.neighbour(offset) >= 0
		return mask

	@property
	def boundary_mask(self) -> 'Mask':
		return ~self.interior_mask

	@cached_property
	def boundary_nodes(self) -> np.ndarray:
		return np.flatnonzero(self.boundary_mask)

	@cached_property
	def interior_nodes(self) -> np.ndarray:
		return np.flatnonzero(self.interior_mask)

	def _stencil_matrix(self, axis: int, stencils: 'Sequence[Stencil]', scale: float):
		rows, cols, values = [], [], []
		assigned = np.zeros(self.size, dtype=bool)
		for stencil in stencils:
			neighbours = [self.axis_neighbour(axis, step) for step, _ in stencil]
			usable = ~assigned & np.all([n >= 0 for n in neighbours], axis=0)
			at = np.flatnonzero(usable)
			for (_, coefficient), n in zip(stencil, neighbours, strict=True):
				rows.append(at)
				cols.append(n[at])
				values.append(np.full(at.size, coefficient * scale))
			assigned |= usable
		matrix = scipy.sparse.csr_array(
			(np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size, self.size)
		)
		return matrix, ~assigned

	def _cross_matrix(self, a: int, b: int, first: tuple[scipy.sparse.csr_array, ...]):
		"""Four-point cross stencil where all four diagonal neighbours exist, ∂_a(∂_b) composed elsewhere"""
		rows, cols, values = [], [], []
		usable = np.ones(self.size, dtype=bool)
		corners = []
		for sa, sb in itertools.product((-1, 1), repeat=2):
			offset = [0] * self.dimension
			offset[a], offset[b] = sa, sb
			n = self.neighbour(offset)
			usable &= n >= 0
			corners.append((sa * sb, n))
		at = np.flatnonzero(usable)
		scale = 1 / (4 * self.spacing[a] * self.spacing[b])
		for sign, n in corners:
			rows.append(at)
			cols.append(n[at])
			values.append(np.full(at.size, sign * scale))
		cross = scipy.sparse.csr_array(
			(np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size, self.size)
		)
		composed = scipy.sparse.diags_array((~usable).astype(float)) @ (first[a] @ first[b])
		return scipy.sparse.csr_array(cross + composed)

	@cached_property
	def operators(self) -> DifferenceOperators:
		first, missing = [], np.zeros(self.size, dtype=bool)
		for axis, h in enumerate(self.spacing):
			matrix, lacking = self._stencil_matrix(axis, FIRST_DERIVATIVE_STENCILS, 1 / h)
			first.append(matrix)
			missing |= lacking
		first = tuple(first)
		second = {}
		for a, b in itertools.combinations_with_replacement(range(self.dimension), 2):
			if a == b:
				second[(a, a)], lacking = self._stencil_matrix(a, SECOND_DERIVATIVE_STENCILS, 1 / self.spacing[a] ** 2)
				missing |= lacking
			else:
				second[(a, b)] = self._cross_matrix(a, b, first)
		if missing.any():
			logger.warning('%d nodes have no difference stencil along some axis', int(missing.sum()))
		return DifferenceOperators(first, second, missing)

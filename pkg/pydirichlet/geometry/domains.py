"""Domain presets. Each one knows how to lay itself out on a chart and has a closed form for the distance to its boundary."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import UnsupportedDomainError

from .grid import Chart, ChartGrid

if TYPE_CHECKING:
	from pydirichlet.typedefs import FloatArray, TensorField

logger = logging.getLogger(__name__)

INSIDE_TOLERANCE = 1e-12


class Domain(ABC):
	name: str
	chart: Chart

	@property
	@abstractmethod
	def dimension(self) -> int: ...

	@abstractmethod
	def build_grid(self) -> ChartGrid: ...

	@abstractmethod
	def parameters(self) -> dict[str, Any]: ...

	def to_physical(self, coords: 'FloatArray') -> 'FloatArray':
		return np.asarray(coords, dtype=float)

	def distance(self, coords: 'FloatArray') -> 'FloatArray':
		"""σ at chart coordinates, positive inside"""
		raise UnsupportedDomainError(f'{self.name} has no distance-to-boundary formula')

	def distance_derivatives(self, coords: 'FloatArray') -> tuple['FloatArray', 'TensorField']:
		"""Chart partial derivatives ∂_iσ and ∂_i∂_jσ"""
		raise UnsupportedDomainError(f'{self.name} has no distance-to-boundary formula')

	@property
	def ball_radius(self) -> float | None:
		"""Radius if this is a ball centred at the origin"""
		return None


def _polar_to_physical(coords: np.ndarray) -> np.ndarray:
	r, theta = coords[:, 0], coords[:, 1]
	return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def _radial_derivatives(coords: np.ndarray, sign: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
	"""σ = ±r + const in a polar chart"""
	gradient = np.zeros_like(coords)
	gradient[:, 0] = sign
	return gradient, np.zeros((*coords.shape, coords.shape[1]))


def _sphere_derivatives(x: np.ndarray, sign: float) -> tuple[np.ndarray, np.ndarray]:
	"""σ = ±|x| + const in Cartesian coordinates; the origin gets zeros"""
	norm = np.linalg.norm(x, axis=-1)
	safe = np.where(norm > 0, norm, 1.0)
	unit = x / safe[:, None]
	n = x.shape[1]
	hessian = (np.eye(n) - unit[:, :, None] * unit[:, None, :]) / safe[:, None, None]
	at_origin = norm == 0
	unit[at_origin] = 0
	hessian[at_origin] = 0
	return sign * unit, sign * hessian


def _cartesian_grid(domain: 'Domain', lower: np.ndarray, upper: np.ndarray, shape, periodic=None) -> ChartGrid:
	periodic = tuple(periodic) if periodic is not None else (False,) * len(shape)
	axes = tuple(
		np.linspace(lo, hi, count, endpoint=not wraps)
		for lo, hi, count, wraps in zip(lower, upper, shape, periodic, strict=True)
	)
	mesh = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, len(shape))
	try:
		sigma = domain.distance(mesh)
		scale = float(np.max(np.abs(upper - lower)))
		inside = (sigma >= -INSIDE_TOLERANCE * scale).reshape(shape)
	except UnsupportedDomainError:
		inside = np.ones(shape, dtype=bool)
	return ChartGrid(Chart.Cartesian, axes, inside, periodic, domain=domain)


@dataclass(frozen=True)
class Disk(Domain):
	radius: float = 1.0
	resolution: int = 16
	"""Polar: number of rings inside the boundary ring. Cartesian: nodes from the centre to the rim along an axis"""
	chart: Chart = Chart.Polar
	n: int = 2
	name: str = field(default='disk', init=False)

	def __post_init__(self):
		if self.radius <= 0 or self.resolution < 2:
			raise ValueError(f'Disk needs a positive radius and resolution ≥ 2, got {self.radius}, {self.resolution}')
		if self.chart == Chart.Polar and self.n != 2:
			raise UnsupportedDomainError('Polar charts are only available in two dimensions')

	@property
	def dimension(self) -> int:
		return self.n

	@property
	def ball_radius(self) -> float:
		return self.radius

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'radius': self.radius, 'resolution': self.resolution, 'chart': str(self.chart), 'n': self.n}

	def build_grid(self) -> ChartGrid:
		m = self.resolution
		match self.chart:
			case Chart.Polar:
				h = self.radius / (m + 0.5)
				rings = (np.arange(m + 1) + 0.5) * h
				angles = np.arange(4 * m) * (2 * np.pi / (4 * m))
				inside = np.ones((m + 1, 4 * m), dtype=bool)
				return ChartGrid(Chart.Polar, (rings, angles), inside, (False, True), reflect_origin=True, domain=self)
			case Chart.Cartesian:
				bound = np.full(self.n, self.radius)
				return _cartesian_grid(self, -bound, bound, (2 * m + 1,) * self.n)

	def to_physical(self, coords):
		coords = np.asarray(coords, dtype=float)
		return _polar_to_physical(coords) if self.chart == Chart.Polar else coords

	def distance(self, coords):
		coords = np.asarray(coords, dtype=float)
		if self.chart == Chart.Polar:
			return self.radius - np.abs(coords[:, 0])
		return self.radius - np.linalg.norm(coords, axis=-1)

	def distance_derivatives(self, coords):
		coords = np.asarray(coords, dtype=float)
		if self.chart == Chart.Polar:
			return _radial_derivatives(coords, np.full(coords.shape[0], -1.0))
		return _sphere_derivatives(coords, -1.0)


@dataclass(frozen=True)
class Annulus(Domain):
	inner: float = 0.5
	outer: float = 1.0
	resolution: int = 16
	"""Radial intervals between the two circles"""
	name: str = field(default='annulus', init=False)
	chart: Chart = field(default=Chart.Polar, init=False)

	def __post_init__(self):
		if not 0 < self.inner < self.outer:
			raise ValueError(f'Annulus needs 0 < inner < outer, got {self.inner}, {self.outer}')
		if self.resolution < 2:
			raise ValueError(f'Annulus needs resolution ≥ 2, got {self.resolution}')

	@property
	def dimension(self) -> int:
		return 2

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'inner': self.inner, 'outer': self.outer, 'resolution': self.resolution}

	@property
	def angular_count(self) -> int:
		"""Keeps the cells near the outer circle roughly square"""
		h = (self.outer - self.inner) / self.resolution
		return max(8, 4 * int(np.ceil(np.pi * self.outer / (2 * h))))

	def build_grid(self) -> ChartGrid:
		rings = np.linspace(self.inner, self.outer, self.resolution + 1)
		count = self.angular_count
		angles = np.arange(count) * (2 * np.pi / count)
		inside = np.ones((rings.size, count), dtype=bool)
		return ChartGrid(Chart.Polar, (rings, angles), inside, (False, True), domain=self)

	def to_physical(self, coords):
		return _polar_to_physical(np.asarray(coords, dtype=float))

	def distance(self, coords):
		r = np.asarray(coords, dtype=float)[:, 0]
		return np.minimum(r - self.inner, self.outer - r)

	def distance_derivatives(self, coords):
		coords = np.asarray(coords, dtype=float)
		r = coords[:, 0]
		sign = np.where(r - self.inner <= self.outer - r, 1.0, -1.0)
		return _radial_derivatives(coords, sign)


@dataclass(frozen=True)
class Rectangle(Domain):
	"""A box, optionally periodic along some axes. The distance to the boundary is only defined when exactly one axis is not periodic (a slab), since otherwise the boundary has corners."""

	lower: tuple[float, ...] = (0.0, 0.0)
	upper: tuple[float, ...] = (1.0, 1.0)
	shape: tuple[int, ...] = (17, 17)
	periodic: tuple[bool, ...] = (False, False)
	name: str = field(default='rectangle', init=False)
	chart: Chart = field(default=Chart.Cartesian, init=False)

	def __post_init__(self):
		if not len(self.lower) == len(self.upper) == len(self.shape) == len(self.periodic):
			raise ValueError('lower, upper, shape and periodic need the same length')
		if any(lo >= hi for lo, hi in zip(self.lower, self.upper, strict=True)):
			raise ValueError(f'Empty box {self.lower} to {self.upper}')

	@property
	def dimension(self) -> int:
		return len(self.shape)

	def parameters(self) -> dict[str, Any]:
		return {
			'name': self.name,
			'lower': list(self.lower),
			'upper': list(self.upper),
			'shape': list(self.shape),
			'periodic': list(self.periodic),
		}

	def build_grid(self) -> ChartGrid:
		return _cartesian_grid(self, np.asarray(self.lower), np.asarray(self.upper), self.shape, self.periodic)

	def _slab_axis(self) -> int:
		open_axes = [axis for axis, wraps in enumerate(self.periodic) if not wraps]
		if len(open_axes) != 1:
			raise UnsupportedDomainError(
				f'Rectangle with {len(open_axes)} non-periodic axes has no smooth boundary distance (need exactly one)'
			)
		return open_axes[0]

	def distance(self, coords):
		axis = self._slab_axis()
		x = np.asarray(coords, dtype=float)[:, axis]
		return np.minimum(x - self.lower[axis], self.upper[axis] - x)

	def distance_derivatives(self, coords):
		axis = self._slab_axis()
		coords = np.asarray(coords, dtype=float)
		x = coords[:, axis]
		gradient = np.zeros_like(coords)
		gradient[:, axis] = np.where(x - self.lower[axis] <= self.upper[axis] - x, 1.0, -1.0)
		return gradient, np.zeros((*coords.shape, coords.shape[1]))


@dataclass(frozen=True)
class RoundedSquare(Domain):
	"""[−a, a]² with the corners rounded off by circles of radius c"""

	half_side: float = 1.0
	corner_radius: float = 0.25
	resolution: int = 16
	"""Nodes from the centre to an edge"""
	name: str = field(default='rounded_square', init=False)
	chart: Chart = field(default=Chart.Cartesian, init=False)

	def __post_init__(self):
		if not 0 < self.corner_radius <= self.half_side:
			raise ValueError(f'Need 0 < corner_radius ≤ half_side, got {self.corner_radius}, {self.half_side}')

	@property
	def dimension(self) -> int:
		return 2

	def parameters(self) -> dict[str, Any]:
		return {
			'name': self.name,
			'half_side': self.half_side,
			'corner_radius': self.corner_radius,
			'resolution': self.resolution,
		}

	def build_grid(self) -> ChartGrid:
		bound = np.full(2, self.half_side)
		return _cartesian_grid(self, -bound, bound, (2 * self.resolution + 1,) * 2)

	def _excess(self, coords: np.ndarray) -> np.ndarray:
		return np.abs(coords) - (self.half_side - self.corner_radius)

	def distance(self, coords):
		q = self._excess(np.asarray(coords, dtype=float))
		outside = np.linalg.norm(np.maximum(q, 0), axis=-1)
		return self.corner_radius - outside - np.minimum(q.max(axis=-1), 0)

	def distance_derivatives(self, coords):
		coords = np.asarray(coords, dtype=float)
		q = self._excess(coords)
		sign = np.where(coords < 0, -1.0, 1.0)
		corner = np.all(q > 0, axis=-1)
		gradient = np.zeros_like(coords)
		hessian = np.zeros((*coords.shape, 2))
		edge_axis = np.argmax(q, axis=-1)
		edge = np.flatnonzero(~corner)
		gradient[edge, edge_axis[edge]] = -sign[edge, edge_axis[edge]]
		if corner.any():
			corner_gradient, corner_hessian = _sphere_derivatives(q[corner] * sign[corner], -1.0)
			gradient[corner] = corner_gradient
			hessian[corner] = corner_hessian
		return gradient, hessian


DOMAIN_PRESETS: dict[str, type[Domain]] = {
	'disk': Disk,
	'annulus': Annulus,
	'rectangle': Rectangle,
	'rounded_square': RoundedSquare,
}


def make_domain(name: str, **params) -> Domain:
	try:
		cls = DOMAIN_PRESETS[name]
	except KeyError:
		raise UnsupportedDomainError(f'Unknown domain {name!r}, expected one of {sorted(DOMAIN_PRESETS)}') from None
	if 'chart' in params:
		params['chart'] = Chart(params['chart'])
	for key in ('lower', 'upper', 'shape', 'periodic'):
		if key in params:
			params[key] = tuple(params[key])
	return cls(**params)

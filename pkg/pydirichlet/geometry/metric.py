"""Metric presets, the tensor χ, and Christoffel symbols"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import MetricNotSPDError, UnsupportedDomainError

from .grid import Chart

if TYPE_CHECKING:
	from pydirichlet.typedefs import FloatArray, TensorField

	from .grid import ChartGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MetricField:
	g: 'TensorField'
	"""g_ij at every node"""
	chi: 'TensorField'
	"""χ_ij at every node"""
	christoffel_analytic: 'FloatArray | None' = None
	"""Γ^k_ij as [node, k, i, j], if the preset knows it in closed form"""
	name: str = 'euclidean'
	flat: bool = True
	"""Whether the metric is the Euclidean metric written in this chart"""
	parameters: dict[str, Any] = field(default_factory=dict)

	def __post_init__(self):
		g = np.asarray(self.g, dtype=float)
		if g.ndim != 3 or g.shape[1] != g.shape[2]:
			raise ValueError(f'Metric must be (nodes, n, n), got {g.shape}')
		smallest = np.linalg.eigvalsh(0.5 * (g + np.swapaxes(g, 1, 2))).min(axis=-1)
		if not np.all(smallest > 0):
			node = int(np.argmin(smallest))
			raise MetricNotSPDError(
				f'Metric {self.name} is not positive definite at node {node} (smallest eigenvalue {smallest[node]})',
				node,
			)
		if self.chi.shape != g.shape:
			raise ValueError(f'χ has shape {self.chi.shape}, the metric has {g.shape}')

	@property
	def dimension(self) -> int:
		return self.g.shape[1]

	@cached_property
	def inverse(self) -> 'TensorField':
		return np.linalg.inv(self.g)

	@cached_property
	def trace_chi(self) -> 'FloatArray':
		"""tr_g χ = g^{ij}χ_ij"""
		return np.einsum('nij,nij->n', self.inverse, self.chi)

	def with_chi(self, chi: 'TensorField', **chi_parameters) -> 'MetricField':
		return replace(self, chi=np.asarray(chi, dtype=float), parameters={**self.parameters, 'chi': chi_parameters})

	def to_dict(self) -> dict[str, Any]:
		return {'name': self.name, 'flat': self.flat, **self.parameters}


def euclidean_metric(grid: 'ChartGrid') -> MetricField:
	"""δ on a Cartesian chart, dr² + r²dθ² on a polar one"""
	count, n = grid.size, grid.dimension
	g = np.broadcast_to(np.eye(n), (count, n, n)).copy()
	gamma = np.zeros((count, n, n, n))
	if grid.chart == Chart.Polar:
		r = grid.coords[:, 0]
		g[:, 1, 1] = r**2
		gamma[:, 0, 1, 1] = -r
		gamma[:, 1, 0, 1] = gamma[:, 1, 1, 0] = 1 / r
	return MetricField(g, np.zeros_like(g), gamma, 'euclidean', True, {'name': 'euclidean'})


def conformal_metric(grid: 'ChartGrid', strength: float = 0.1) -> MetricField:
	"""e^{2w}δ with w = c|x|², on Cartesian charts"""
	if grid.chart != Chart.Cartesian:
		raise UnsupportedDomainError('The conformal metric preset is only defined on Cartesian charts')
	x = grid.coords
	count, n = x.shape
	w = strength * np.sum(x**2, axis=-1)
	dw = 2 * strength * x
	g = np.exp(2 * w)[:, None, None] * np.eye(n)
	delta = np.eye(n)
	gamma = (
		np.einsum('ik,nj->nkij', delta, dw)
		+ np.einsum('jk,ni->nkij', delta, dw)
		- np.einsum('ij,nk->nkij', delta, dw)
	)
	return MetricField(
		g, np.zeros_like(g), gamma, 'conformal', strength == 0, {'name': 'conformal', 'strength': strength}
	)


METRIC_PRESETS = {
	'euclidean': euclidean_metric,
	'conformal': conformal_metric,
}


def make_metric(grid: 'ChartGrid', name: str = 'euclidean', **params) -> MetricField:
	try:
		preset = METRIC_PRESETS[name]
	except KeyError:
		raise ValueError(f'Unknown metric {name!r}, expected one of {sorted(METRIC_PRESETS)}') from None
	return preset(grid, **params)


def make_chi(metric: MetricField, name: str = 'zero', scale: float = 1.0) -> MetricField:
	"""χ = 0, or χ = c·g"""
	match name:
		case 'zero':
			return metric.with_chi(np.zeros_like(metric.g), name='zero')
		case 'metric':
			return metric.with_chi(scale * metric.g, name='metric', scale=scale)
		case _:
			raise ValueError(f"Unknown χ preset {name!r}, expected 'zero' or 'metric'")


def christoffel(metric: MetricField, grid: 'ChartGrid', *, analytic: bool = True) -> 'FloatArray':
	"""Γ^k_ij = ½g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij), as [node, k, i, j].

	Closed-form symbols are used when the preset has them; otherwise (or with analytic=False) the metric is differentiated on the grid."""
	if analytic and metric.christoffel_analytic is not None:
		return metric.christoffel_analytic
	ops = grid.operators
	n = metric.dimension
	flat_g = metric.g.reshape(grid.size, n * n)
	# dg[node, l, i, j] = ∂_l g_ij
	dg = np.stack([(ops.first[axis] @ flat_g).reshape(grid.size, n, n) for axis in range(n)], axis=1)
	lowered = 0.5 * (np.einsum('nijl->nlij', dg) + np.einsum('njil->nlij', dg) - dg)
	gamma = np.einsum('nkl,nlij->nkij', metric.inverse, lowered)
	gamma[ops.missing] = np.nan
	return gamma

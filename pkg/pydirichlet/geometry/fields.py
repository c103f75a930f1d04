"""Derivatives of grid fields: gradients, covariant Hessians and what is built from them"""

import logging
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse

from pydirichlet.eigen import generalized_eigen_batched
from pydirichlet.errors import StencilOutOfDomainError

from .metric import christoffel

if TYPE_CHECKING:
	from pydirichlet.typedefs import FloatArray, GridField, Mask, TensorField

	from .grid import ChartGrid
	from .metric import MetricField

logger = logging.getLogger(__name__)


def _check_field(u: 'GridField', grid: 'ChartGrid') -> np.ndarray:
	u = np.asarray(u, dtype=float)
	if u.shape != (grid.size,):
		raise ValueError(f'Field has shape {u.shape}, grid has {grid.size} nodes')
	return u


def _require_stencils(grid: 'ChartGrid', require: 'Mask | None'):
	if require is None:
		return
	lacking = np.flatnonzero(np.asarray(require) & grid.operators.missing)
	if lacking.size:
		raise StencilOutOfDomainError(
			f'{lacking.size} requested nodes have no difference stencil, first at {grid.coords[lacking[0]].tolist()}',
			lacking.tolist(),
		)


def gradient(u: 'GridField', grid: 'ChartGrid') -> 'FloatArray':
	"""Chart partials ∂_i u, (nodes, n)"""
	u = _check_field(u, grid)
	return np.stack([d @ u for d in grid.operators.first], axis=-1)


def covariant_hessian(
	u: 'GridField', metric: 'MetricField', grid: 'ChartGrid', *, require: 'Mask | None' = None
) -> 'TensorField':
	"""∇_ij u = ∂_i∂_j u − Γ^l_ij ∂_l u. Nodes without a stencil come back as NaN, and raise if they are in require."""
	u = _check_field(u, grid)
	_require_stencils(grid, require)
	ops = grid.operators
	n = grid.dimension
	du = gradient(u, grid)
	gamma = christoffel(metric, grid)
	hessian = np.empty((grid.size, n, n))
	for a in range(n):
		for b in range(a, n):
			hessian[:, a, b] = hessian[:, b, a] = ops.second_derivative(a, b) @ u
	hessian -= np.einsum('nlij,nl->nij', gamma, du)
	hessian[ops.missing] = np.nan
	return hessian


def covariant_hessian_operators(metric: 'MetricField', grid: 'ChartGrid') -> dict[tuple[int, int], scipy.sparse.csr_array]:
	"""Sparse H_ab with H_ab @ u = ∇_ab u, for a ≤ b"""
	ops = grid.operators
	gamma = np.nan_to_num(christoffel(metric, grid))
	n = grid.dimension
	result = {}
	for a in range(n):
		for b in range(a, n):
			matrix = ops.second_derivative(a, b)
			for k in range(n):
				matrix = matrix - scipy.sparse.diags_array(gamma[:, k, a, b]) @ ops.first[k]
			result[(a, b)] = scipy.sparse.csr_array(matrix)
	return result


def gradient_norm(u: 'GridField', metric: 'MetricField', grid: 'ChartGrid') -> 'FloatArray':
	"""|∇u|_g = √(g^{ij}∂_i u ∂_j u)"""
	du = gradient(u, grid)
	return np.sqrt(np.einsum('ni,nij,nj->n', du, metric.inverse, du))


def laplacian(u: 'GridField', metric: 'MetricField', grid: 'ChartGrid') -> 'FloatArray':
	"""Δu = g^{ij}∇_ij u"""
	return np.einsum('nij,nij->n', metric.inverse, covariant_hessian(u, metric, grid))


def eigenvalue_field(
	u: 'GridField', metric: 'MetricField', grid: 'ChartGrid', *, nodes: np.ndarray | None = None
) -> 'FloatArray':
	"""λ(∇²u + χ; g), ascending, at the given nodes (interior nodes by default); NaN rows everywhere else"""
	nodes = grid.interior_nodes if nodes is None else np.asarray(nodes)
	tensor = covariant_hessian(u, metric, grid) + metric.chi
	values = np.full((grid.size, grid.dimension), np.nan)
	if nodes.size:
		values[nodes] = generalized_eigen_batched(tensor[nodes], metric.g[nodes])[0]
	return values

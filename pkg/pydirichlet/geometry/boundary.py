"""Distance to the boundary, distance to a point, principal curvatures of the boundary and the condition (−κ₁, …, −κ_{n−1}) ∈ Γ̄_∞."""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from pydirichlet.cones import ConeSpec, GardingCone, ProjectedCone, WholeSpace
from pydirichlet.eigen import generalized_eigen_batched
from pydirichlet.errors import UnsupportedDomainError

from .metric import christoffel, euclidean_metric

if TYPE_CHECKING:
	from pydirichlet.typedefs import FloatArray, Mask, NodeIndex, TensorField

	from .grid import ChartGrid
	from .metric import MetricField

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundaryGeometry:
	grid: 'ChartGrid'
	metric: 'MetricField'
	sigma: 'FloatArray'
	"""Distance to ∂M, zero on the boundary and positive inside"""
	sigma_gradient: 'FloatArray'
	"""∂_iσ"""
	sigma_hessian: 'TensorField'
	"""∇_ijσ (covariant)"""

	@cached_property
	def gradient_norm(self) -> 'FloatArray':
		"""|∇σ|_g"""
		return np.sqrt(np.einsum('ni,nij,nj->n', self.sigma_gradient, self.metric.inverse, self.sigma_gradient))

	@cached_property
	def inward_normal(self) -> 'FloatArray':
		"""g^{ij}∂_jσ / |∇σ|_g as chart vector components. Zero wherever ∇σ vanishes"""
		raised = np.einsum('nij,nj->ni', self.metric.inverse, self.sigma_gradient)
		norm = self.gradient_norm
		return np.divide(raised, norm[:, None], out=np.zeros_like(raised), where=norm[:, None] > 0)

	@cached_property
	def _path_graph(self) -> scipy.sparse.csr_array:
		"""Edges to all 3ⁿ − 1 neighbours, weighted by their g-length"""
		grid = self.grid
		rows, cols, weights = [], [], []
		spacing = np.asarray(grid.spacing)
		for offset in itertools.product((-1, 0, 1), repeat=grid.dimension):
			if not any(offset):
				continue
			neighbour = grid.neighbour(offset)
			at = np.flatnonzero(neighbour >= 0)
			step = np.asarray(offset) * spacing
			g = 0.5 * (self.metric.g[at] + self.metric.g[neighbour[at]])
			rows.append(at)
			cols.append(neighbour[at])
			weights.append(np.sqrt(np.einsum('i,nij,j->n', step, g, step)))
		return scipy.sparse.csr_array(
			(np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.size, grid.size)
		)

	def rho(self, anchor: 'NodeIndex') -> 'FloatArray':
		"""Distance to the anchor node: straight-line for flat metrics, shortest path through the grid otherwise"""
		if self.metric.flat:
			return np.linalg.norm(self.grid.physical - self.grid.physical[anchor], axis=-1)
		return scipy.sparse.csgraph.dijkstra(self._path_graph, directed=False, indices=anchor)

	def collar(self, anchor: 'NodeIndex', delta: float) -> 'Mask':
		"""Ω_δ = {ρ < δ}"""
		return self.rho(anchor) < delta

	def collar_gradient_ok(self, mask: 'Mask') -> bool:
		"""½ ≤ |∇σ|_g ≤ 2 on the masked nodes"""
		norm = self.gradient_norm[mask]
		return bool(np.all((norm >= 0.5) & (norm <= 2)))


def boundary_distance(grid: 'ChartGrid', metric: 'MetricField | None' = None) -> BoundaryGeometry:
	"""σ and its derivatives from the domain's closed form. σ is exactly zero at boundary nodes of charts that put the boundary on grid lines (polar disk, annulus, slabs)."""
	if grid.domain is None:
		raise UnsupportedDomainError('Grid has no domain attached, so there is no boundary distance')
	metric = metric or euclidean_metric(grid)
	sigma = grid.domain.distance(grid.coords)
	sigma_gradient, sigma_partials = grid.domain.distance_derivatives(grid.coords)
	gamma = christoffel(metric, grid)
	sigma_hessian = sigma_partials - np.einsum('nkij,nk->nij', gamma, sigma_gradient)
	return BoundaryGeometry(grid, metric, sigma, sigma_gradient, sigma_hessian)


def tangent_basis(normal_covector: 'FloatArray') -> 'FloatArray':
	"""(nodes, n, n−1): columns span the kernel of each covector"""
	_, _, vh = np.linalg.svd(normal_covector[:, None, :])
	return np.swapaxes(vh[:, 1:, :], 1, 2)


def principal_curvatures(
	grid: 'ChartGrid', metric: 'MetricField | None' = None, geometry: BoundaryGeometry | None = None
) -> 'FloatArray':
	"""κ₁ ≤ … ≤ κ_{n−1} at each boundary node (rows follow grid.boundary_nodes), measured against the inward normal, so a disk of radius R has κ = 1/R."""
	geometry = geometry or boundary_distance(grid, metric)
	nodes = grid.boundary_nodes
	basis = tangent_basis(geometry.sigma_gradient[nodes])
	second_form = -np.einsum('nia,nij,njb->nab', basis, geometry.sigma_hessian[nodes], basis)
	induced = np.einsum('nia,nij,njb->nab', basis, geometry.metric.g[nodes], basis)
	values, _ = generalized_eigen_batched(second_form, induced)
	return values / geometry.gradient_norm[nodes, None]


def gamma_infinity(cone: ConeSpec) -> ConeSpec:
	"""{λ′ : (λ′, λ_n) ∈ Γ for some λ_n}. Closed forms for Gårding cones and ℝⁿ, bisection on a lifted λ_n otherwise"""
	match cone:
		case GardingCone(dimension=n, order=1):
			return WholeSpace(n - 1)
		case GardingCone(dimension=n, order=k):
			return GardingCone(n - 1, k - 1)
		case WholeSpace(dimension=n):
			return WholeSpace(n - 1)
		case _:
			return ProjectedCone(cone)


@dataclass(frozen=True)
class BoundaryConeReport:
	cone: str
	passed: bool
	worst_node: int | None
	"""Grid node where −κ is furthest from (or least inside) Γ̄_∞"""
	worst_margin: float
	"""Signed distance of −κ to ∂Γ_∞ at the worst node, negative when it fails"""
	failing_nodes: int

	def to_dict(self) -> dict[str, Any]:
		return {
			'cone': self.cone,
			'status': 'pass' if self.passed else 'fail',
			'worst_node': self.worst_node,
			'worst_margin': self.worst_margin,
			'failing_nodes': self.failing_nodes,
		}


def check_boundary_cone_condition(
	kappa: 'FloatArray', cone: ConeSpec, nodes: np.ndarray | None = None
) -> BoundaryConeReport:
	"""(−κ₁, …, −κ_{n−1}) ∈ Γ̄_∞ at every boundary node"""
	projected = gamma_infinity(cone)
	kappa = np.atleast_2d(np.asarray(kappa, dtype=float))
	nodes = np.arange(kappa.shape[0]) if nodes is None else np.asarray(nodes)
	inside = projected.closure_mask(-kappa)
	margins = projected.signed_distance(-kappa)
	worst = int(np.argmin(margins)) if margins.size else None
	failing = int(np.count_nonzero(~inside))
	if failing:
		logger.info('Boundary cone condition fails at %d of %d boundary nodes', failing, kappa.shape[0])
	return BoundaryConeReport(
		projected.name,
		failing == 0,
		None if worst is None else int(nodes[worst]),
		float(margins[worst]) if worst is not None else np.inf,
		failing,
	)

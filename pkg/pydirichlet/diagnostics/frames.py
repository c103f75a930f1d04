"""Adapted frames at boundary nodes: g-orthonormal, last vector the inward normal, the tangential ones diagonalizing the subsolution's tangential block."""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from pydirichlet.eigen import generalized_eigen_batched
from pydirichlet.errors import FrameDegenerateError
from pydirichlet.geometry import tangent_basis

if TYPE_CHECKING:
	from pydirichlet.geometry import BoundaryGeometry
	from pydirichlet.typedefs import FloatArray, TensorField

logger = logging.getLogger(__name__)

DEGENERATE_NORMAL = 1e-12


@dataclass(frozen=True, eq=False)
class BoundaryFrames:
	nodes: np.ndarray
	"""Grid nodes the frames sit at"""
	vectors: 'TensorField'
	"""(nodes, n, n), columns E_1, …, E_{n−1}, E_n in chart components"""
	sigma_normal: 'FloatArray'
	"""∇_nσ = dσ(E_n)"""

	@property
	def normal(self) -> 'FloatArray':
		return self.vectors[:, :, -1]

	@property
	def tangential(self) -> 'TensorField':
		return self.vectors[:, :, :-1]

	def components(self, tensor: 'TensorField') -> 'TensorField':
		"""E_aᵀ T E_b for a (0,2)-tensor given at every grid node"""
		return np.einsum('nia,nij,njb->nab', self.vectors, tensor[self.nodes], self.vectors)

	def derivative(self, covector: 'FloatArray') -> 'FloatArray':
		"""w(E_a) for a covector (such as a chart gradient) given at every grid node"""
		return np.einsum('ni,nia->na', covector[self.nodes], self.vectors)


def boundary_frames(
	geometry: 'BoundaryGeometry', diagonalize: 'TensorField', nodes: np.ndarray | None = None
) -> BoundaryFrames:
	"""Frames at the given boundary nodes (all of them by default). Nodes where the tensor to diagonalize is not finite are dropped."""
	grid, metric = geometry.grid, geometry.metric
	nodes = grid.boundary_nodes if nodes is None else np.asarray(nodes)
	usable = np.all(np.isfinite(diagonalize[nodes]), axis=(1, 2))
	if not usable.all():
		logger.warning('Skipping %d boundary nodes without a usable Hessian', int(np.count_nonzero(~usable)))
		nodes = nodes[usable]
	covector = geometry.sigma_gradient[nodes]
	norm = geometry.gradient_norm[nodes]
	if np.any(norm < DEGENERATE_NORMAL):
		node = int(nodes[np.argmin(norm)])
		raise FrameDegenerateError(f'∇_nσ vanishes at boundary node {node}', node)
	g = metric.g[nodes]
	normal = np.einsum('nij,nj->ni', metric.inverse[nodes], covector) / norm[:, None]
	basis = tangent_basis(covector)
	block = np.einsum('nia,nij,njb->nab', basis, diagonalize[nodes], basis)
	induced = np.einsum('nia,nij,njb->nab', basis, g, basis)
	_, rotation = generalized_eigen_batched(block, induced)
	tangential = np.einsum('nia,nab->nib', basis, rotation)
	vectors = np.concatenate([tangential, normal[:, :, None]], axis=-1)
	return BoundaryFrames(nodes, vectors, norm)

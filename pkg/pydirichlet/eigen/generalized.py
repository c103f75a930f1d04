"""Eigenvalues of a symmetric A with respect to a metric g (A v = λ g v), and the derivative of F(A) = f(λ(A; g))."""

import logging
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg

from pydirichlet.errors import MetricNotSPDError
from pydirichlet.utils import map_node_chunks

if TYPE_CHECKING:
	from pydirichlet.cones import OperatorSpec
	from pydirichlet.typedefs import FloatArray

logger = logging.getLogger(__name__)

CLUSTER_TOLERANCE = 1e-8
"""Eigenvalues closer than this times the spectral radius count as repeated"""


def generalized_eigen(a: 'FloatArray', g: 'FloatArray') -> tuple['FloatArray', 'FloatArray']:
	"""Ascending eigenvalues of A with respect to g, and the g-orthonormal eigenvectors as columns"""
	a = np.asarray(a, dtype=float)
	g = np.asarray(g, dtype=float)
	try:
		return scipy.linalg.eigh(0.5 * (a + a.T), 0.5 * (g + g.T))
	except np.linalg.LinAlgError as ex:
		raise MetricNotSPDError(f'Metric is not positive definite: {ex}') from ex


def _batched_eigen(a: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
	lower = np.linalg.cholesky(g)
	half = np.linalg.solve(lower, a)
	reduced = np.linalg.solve(lower, np.swapaxes(half, -1, -2))
	reduced = 0.5 * (reduced + np.swapaxes(reduced, -1, -2))
	values, vectors = np.linalg.eigh(reduced)
	return values, np.linalg.solve(np.swapaxes(lower, -1, -2), vectors)


def generalized_eigen_batched(
	a: 'FloatArray', g: 'FloatArray', *, threads: int | None = None
) -> tuple['FloatArray', 'FloatArray']:
	"""Same as generalized_eigen, for stacks of shape (nodes, n, n). Cholesky of g, then an ordinary symmetric problem."""
	a = np.asarray(a, dtype=float)
	g = np.broadcast_to(np.asarray(g, dtype=float), a.shape)
	try:
		values, vectors = map_node_chunks(_batched_eigen, a, np.ascontiguousarray(g), threads=threads)
	except np.linalg.LinAlgError as ex:
		smallest = np.linalg.eigvalsh(g).min(axis=-1)
		node = int(np.argmin(smallest))
		raise MetricNotSPDError(
			f'Metric is not positive definite at node {node} (smallest eigenvalue {smallest[node]})', node
		) from ex
	return values, vectors


def eigenvalues_wrt_metric(a: 'FloatArray', g: 'FloatArray') -> 'FloatArray':
	"""Ascending λ(A) with respect to g, for a single matrix or a stack"""
	if np.ndim(a) == 2:
		return generalized_eigen(a, g)[0]
	return generalized_eigen_batched(a, g)[0]


def cluster_average(values: 'FloatArray', per_eigenvalue: 'FloatArray') -> 'FloatArray':
	"""Replaces per_eigenvalue[..., k] by its mean over the cluster of (ascending) eigenvalues that λ_k belongs to"""
	radius = np.abs(values).max(axis=-1, keepdims=True)
	gaps = np.diff(values, axis=-1) > CLUSTER_TOLERANCE * np.maximum(radius, np.finfo(float).tiny)
	labels = np.concatenate([np.zeros((*values.shape[:-1], 1), dtype=int), np.cumsum(gaps, axis=-1)], axis=-1)
	same = labels[..., :, None] == labels[..., None, :]
	return (same * per_eigenvalue[..., None, :]).sum(axis=-1) / same.sum(axis=-1)


def operator_derivative(op: 'OperatorSpec', a: 'FloatArray', g: 'FloatArray') -> 'FloatArray':
	"""F^{ij} = ∂F/∂a_ij for F(A) = f(λ(A; g)), that is Σ_k f_k v_k ⊗ v_k with f_k averaged over repeated eigenvalues. Works on single matrices and on stacks."""
	a = np.asarray(a, dtype=float)
	if a.ndim == 2:
		values, vectors = generalized_eigen(a, g)
	else:
		values, vectors = generalized_eigen_batched(a, g)
	gradient = cluster_average(values, op.gradient(values))
	return np.einsum('...ik,...k,...jk->...ij', vectors, gradient, vectors)


def dFdA(op: 'OperatorSpec', a: 'FloatArray', g: 'FloatArray') -> 'FloatArray':  # noqa: N802
	return operator_derivative(op, a, g)

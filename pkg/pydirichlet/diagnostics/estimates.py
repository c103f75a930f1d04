"""Checks of the a priori second derivative estimates on computed solutions: the boundary Laplacian bound, the mixed and double normal bounds, and the global Laplacian bound."""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.cones import unit_normal
from pydirichlet.eigen import generalized_eigen_batched, prepare_frame, verify_normal_estimate
from pydirichlet.errors import ConeViolationError
from pydirichlet.geometry import boundary_distance, covariant_hessian, gradient, gradient_norm

from .frames import BoundaryFrames, boundary_frames

if TYPE_CHECKING:
	from pydirichlet.eigen import NormalCertificate
	from pydirichlet.geometry import BoundaryGeometry
	from pydirichlet.solver import ChartProblem
	from pydirichlet.typedefs import GridField

logger = logging.getLogger(__name__)

GAP_CLAMP = 1e-6
"""Normal gaps ∇_n(u − ū) this far below zero (relative to 1 + their largest size) are rounding, and are set to 0"""


@dataclass(frozen=True)
class RatioRecord:
	value: float
	node: int
	"""Grid node where the maximum is attained"""
	position: tuple[float, ...]

	def to_dict(self) -> dict[str, Any]:
		return {'value': self.value, 'node': self.node, 'position': list(self.position)}


def _ratio_record(problem: 'ChartProblem', values: np.ndarray, nodes: np.ndarray) -> RatioRecord:
	index = int(np.nanargmax(values))
	node = int(nodes[index])
	return RatioRecord(float(values[index]), node, tuple(problem.grid.physical[node].tolist()))


@dataclass(frozen=True, eq=False)
class _Derivatives:
	hessian: np.ndarray
	sub_hessian: np.ndarray
	laplacian: np.ndarray
	gradient_norm: np.ndarray
	geometry: 'BoundaryGeometry'
	frames: BoundaryFrames


def _derivatives(problem: 'ChartProblem', u: 'GridField') -> _Derivatives:
	grid, metric = problem.grid, problem.metric
	hessian = covariant_hessian(u, metric, grid)
	sub_hessian = covariant_hessian(problem.subsolution, metric, grid)
	laplacian = np.einsum('nij,nij->n', metric.inverse, hessian)
	geometry = boundary_distance(grid, metric)
	finite = grid.boundary_nodes[np.all(np.isfinite(hessian[grid.boundary_nodes]), axis=(1, 2))]
	frames = boundary_frames(geometry, sub_hessian + metric.chi, finite)
	return _Derivatives(hessian, sub_hessian, laplacian, gradient_norm(u, metric, grid), geometry, frames)


@dataclass(frozen=True, eq=False)
class EstimateReport:
	sup_boundary_laplacian: float
	sup_laplacian: float
	sup_gradient: float
	boundary_ratio: RatioRecord
	"""sup_∂M Δu / (1 + sup|∇u|²)"""
	global_ratio: RatioRecord
	"""sup_M Δu / (1 + sup|∇u|²)"""
	mixed: RatioRecord
	"""max_α |∇_αn u| / (1 + sup|∇u|)"""
	normal: RatioRecord
	"""∇_nn u / (1 + Σ_α|𝔤_αn|²)"""
	tangential_identity_residual: float
	"""max |∇_α(u − φ) − (∇_ασ/∇_nσ)∇_n(u − φ)| on ∂M"""
	hessian_identity_residual: float
	"""max |∇_αβ(u − ū) − (∇_αβσ/∇_nσ)∇_n(u − ū)| on ∂M"""
	boundary_nodes: np.ndarray = field(repr=False)
	mixed_ratios: np.ndarray = field(repr=False)
	normal_ratios: np.ndarray = field(repr=False)

	@property
	def constants(self) -> dict[str, float]:
		return {
			'boundary': self.boundary_ratio.value,
			'global': self.global_ratio.value,
			'mixed': self.mixed.value,
			'normal': self.normal.value,
		}

	@property
	def finite(self) -> bool:
		return all(np.isfinite(value) for value in self.constants.values())

	def node_fields(self, size: int) -> dict[str, np.ndarray]:
		"""Per-node ratios spread over the whole grid (NaN away from the boundary), for CSV export"""
		mixed = np.full(size, np.nan)
		normal = np.full(size, np.nan)
		mixed[self.boundary_nodes] = self.mixed_ratios
		normal[self.boundary_nodes] = self.normal_ratios
		return {'mixed_ratio': mixed, 'normal_ratio': normal}

	def to_dict(self) -> dict[str, Any]:
		return {
			'sup_boundary_laplacian': self.sup_boundary_laplacian,
			'sup_laplacian': self.sup_laplacian,
			'sup_gradient': self.sup_gradient,
			'boundary_ratio': self.boundary_ratio.to_dict(),
			'global_ratio': self.global_ratio.to_dict(),
			'mixed_ratio': self.mixed.to_dict(),
			'normal_ratio': self.normal.to_dict(),
			'tangential_identity_residual': self.tangential_identity_residual,
			'hessian_identity_residual': self.hessian_identity_residual,
			'boundary_nodes_checked': int(self.boundary_nodes.size),
		}


def boundary_hessian_report(problem: 'ChartProblem', u: 'GridField') -> EstimateReport:
	grid, metric = problem.grid, problem.metric
	d = _derivatives(problem, u)
	frames = d.frames
	nodes = frames.nodes

	sup_gradient = float(np.nanmax(d.gradient_norm))
	boundary_laplacian = d.laplacian[nodes]
	interior = grid.interior_nodes
	scale = 1 + sup_gradient**2

	hessian_frame = frames.components(d.hessian)
	tensor_frame = frames.components(d.hessian + metric.chi)
	mixed_ratios = np.max(np.abs(hessian_frame[:, :-1, -1]), axis=-1) / (1 + sup_gradient)
	normal_ratios = hessian_frame[:, -1, -1] / (1 + np.sum(tensor_frame[:, :-1, -1] ** 2, axis=-1))

	sigma_derivative = frames.derivative(d.geometry.sigma_gradient)
	trace_derivative = frames.derivative(gradient(u - problem.phi, grid))
	tangential_residual = trace_derivative[:, :-1] - (
		sigma_derivative[:, :-1] / sigma_derivative[:, -1:]
	) * trace_derivative[:, -1:]

	gap = frames.derivative(gradient(u - problem.subsolution, grid))[:, -1]
	difference = frames.components(d.hessian - d.sub_hessian)[:, :-1, :-1]
	sigma_block = frames.components(d.geometry.sigma_hessian)[:, :-1, :-1]
	hessian_residual = difference - sigma_block * (gap / sigma_derivative[:, -1])[:, None, None]

	return EstimateReport(
		float(np.nanmax(boundary_laplacian)),
		float(np.nanmax(d.laplacian[interior])),
		sup_gradient,
		_ratio_record(problem, boundary_laplacian / scale, nodes),
		_ratio_record(problem, d.laplacian[interior] / scale, interior),
		_ratio_record(problem, mixed_ratios, nodes),
		_ratio_record(problem, normal_ratios, nodes),
		float(np.max(np.abs(tangential_residual), initial=0.0)),
		float(np.max(np.abs(hessian_residual), initial=0.0)),
		nodes,
		mixed_ratios,
		normal_ratios,
	)


@dataclass(frozen=True, eq=False)
class NodeCertificate:
	node: int
	normal_entry: float
	"""𝔤_nn"""
	rc: float
	certificate: 'NormalCertificate'

	@property
	def passed(self) -> bool:
		return self.normal_entry <= self.rc and self.certificate.passed

	def to_dict(self) -> dict[str, Any]:
		return {
			'node': self.node,
			'normal_entry': self.normal_entry,
			'R_c': self.rc,
			'margin': self.rc - self.normal_entry,
			'status': 'pass' if self.passed else 'fail',
			'certificate': self.certificate.to_dict(),
		}


@dataclass(frozen=True, eq=False)
class NormalAuditReport:
	certificates: list[NodeCertificate]

	@property
	def passed(self) -> bool:
		return all(c.passed for c in self.certificates)

	@property
	def worst(self) -> NodeCertificate | None:
		return min(self.certificates, key=lambda c: c.rc - c.normal_entry, default=None)

	def to_dict(self) -> dict[str, Any]:
		worst = self.worst
		return {
			'status': 'pass' if self.passed else 'fail',
			'nodes_checked': len(self.certificates),
			'worst_node': None if worst is None else worst.node,
			'worst_margin': None if worst is None else worst.rc - worst.normal_entry,
			'certificates': [c.to_dict() for c in self.certificates],
		}


def sample_nodes(nodes: np.ndarray, count: int | None) -> np.ndarray:
	"""Evenly spread subset, always the same one for the same input"""
	if count is None or nodes.size <= count:
		return nodes
	return nodes[np.unique(np.linspace(0, nodes.size - 1, count).round().astype(int))]


def normal_threshold_audit(
	problem: 'ChartProblem',
	u: 'GridField',
	*,
	max_nodes: int | None = 32,
	eps1: float | None = None,
	inflate_mixed: float = 1.0,
) -> NormalAuditReport:
	"""At sampled boundary nodes, builds the frame data (𝔤̲_αα, 𝔤_αn, ∇_αβσ, ∇_n(u − ū)), computes R_c and checks 𝔤_nn ≤ R_c along with the rest of the certificate.
	inflate_mixed scales the mixed entries, to watch R_c keep up with them."""
	grid, metric = problem.grid, problem.metric
	d = _derivatives(problem, u)
	frames = d.frames
	chosen = np.isin(frames.nodes, sample_nodes(frames.nodes, max_nodes))
	sub_frame = frames.components(d.sub_hessian + metric.chi)[chosen]
	tensor_frame = frames.components(d.hessian + metric.chi)[chosen]
	sigma_derivative = frames.derivative(d.geometry.sigma_gradient)[chosen, -1]
	sigma_block = frames.components(d.geometry.sigma_hessian)[chosen][:, :-1, :-1] / sigma_derivative[:, None, None]
	gaps = frames.derivative(gradient(u - problem.subsolution, grid))[chosen, -1]
	clamp = GAP_CLAMP * (1 + float(np.max(np.abs(gaps), initial=0.0)))
	tiny = (gaps < 0) & (gaps > -clamp)
	if tiny.any():
		logger.warning('Setting %d slightly negative normal gaps ∇_n(u − ū) to 0', int(np.count_nonzero(tiny)))
		gaps = np.where(tiny, 0.0, gaps)

	certificates = []
	for i, node in enumerate(frames.nodes[chosen]):
		psi_val = float(problem.psi[node])
		frame = prepare_frame(
			problem.operator,
			np.diag(sub_frame[i])[:-1],
			inflate_mixed * tensor_frame[i, :-1, -1],
			sigma_block[i],
			float(gaps[i]),
			psi_val,
			eps1,
		)
		certificate = verify_normal_estimate(problem.operator, frame, psi_val)
		certificates.append(NodeCertificate(int(node), float(tensor_frame[i, -1, -1]), certificate.rc, certificate))
	report = NormalAuditReport(certificates)
	logger.info('Normal estimate audit: %d nodes, %s', len(certificates), 'pass' if report.passed else 'fail')
	return report


def compute_beta0(problem: 'ChartProblem') -> float:
	"""½ min over boundary nodes of dist(ν_λ̲, ∂Γ_n), that is half the smallest component of the unit normal Df/|Df| at λ(𝔤̲)"""
	grid, metric = problem.grid, problem.metric
	nodes = grid.boundary_nodes
	tensor = covariant_hessian(problem.subsolution, metric, grid)[nodes] + metric.chi[nodes]
	finite = np.all(np.isfinite(tensor), axis=(1, 2))
	lam, _ = generalized_eigen_batched(tensor[finite], metric.g[nodes][finite])
	lam = lam[problem.operator.cone.interior_mask(lam)]
	if not lam.size:
		raise ConeViolationError('Subsolution is not admissible at any boundary node')
	return 0.5 * float(np.min(unit_normal(problem.operator, lam)))


@dataclass(frozen=True)
class GlobalLaplacianReport:
	sup_laplacian: RatioRecord
	sup_gradient: float
	ratio: float
	"""sup_M Δu / (1 + sup|∇u|²)"""
	trace_margin: float
	"""min over interior nodes of Δu + tr_g χ, which has to be positive since Γ ⊂ Γ₁"""

	@property
	def trace_positive(self) -> bool:
		return self.trace_margin > 0

	def to_dict(self) -> dict[str, Any]:
		return {
			'sup_laplacian': self.sup_laplacian.to_dict(),
			'sup_gradient': self.sup_gradient,
			'ratio': self.ratio,
			'trace_margin': self.trace_margin,
			'trace_positive': self.trace_positive,
		}


def global_laplacian_report(problem: 'ChartProblem', u: 'GridField') -> GlobalLaplacianReport:
	grid, metric = problem.grid, problem.metric
	interior = grid.interior_nodes
	laplacian = np.einsum('nij,nij->n', metric.inverse, covariant_hessian(u, metric, grid))[interior]
	sup_gradient = float(np.nanmax(gradient_norm(u, metric, grid)))
	record = _ratio_record(problem, laplacian, interior)
	trace_margin = float(np.min(laplacian + metric.trace_chi[interior]))
	if trace_margin <= 0:
		logger.warning('Δu + tr_g χ gets down to %g, u cannot be admissible', trace_margin)
	return GlobalLaplacianReport(record, sup_gradient, record.value / (1 + sup_gradient**2), trace_margin)


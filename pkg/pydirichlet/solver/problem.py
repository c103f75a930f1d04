"""The discrete Dirichlet problem f(λ(∇²u + χ; g)) = ψ in M, u = φ on ∂M, and a subsolution to start from."""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import ConeViolationError, UnsupportedDomainError
from pydirichlet.geometry import eigenvalue_field

from .expressions import Expression, Manufactured

if TYPE_CHECKING:
	from pydirichlet.cones import OperatorSpec
	from pydirichlet.geometry import ChartGrid, MetricField
	from pydirichlet.typedefs import FloatArray, GridField

logger = logging.getLogger(__name__)

SUBSOLUTION_LADDER = (0.0, *(2.0**k for k in range(-10, 31)))
"""Candidate curvatures A for ū = φ + A(|x|² − R²)/2, smallest first"""


@dataclass(frozen=True)
class SubsolutionCheck:
	admissible: bool
	margin: float
	"""min over interior nodes of f(λ(𝔤̲)) − ψ, −∞ if some node is not admissible"""
	worst_node: int
	strict: bool

	@property
	def passed(self) -> bool:
		return self.admissible and (self.margin > 0 if self.strict else self.margin >= 0)

	def to_dict(self) -> dict[str, Any]:
		return {
			'admissible': self.admissible,
			'margin': self.margin,
			'worst_node': self.worst_node,
			'strict': self.strict,
			'status': 'pass' if self.passed else 'fail',
		}


@dataclass(frozen=True, eq=False)
class ChartProblem:
	grid: 'ChartGrid'
	metric: 'MetricField'
	"""Also carries χ"""
	operator: 'OperatorSpec'
	psi: 'GridField'
	phi: 'GridField'
	"""Only the boundary values matter"""
	subsolution: 'GridField'
	strict: bool = True
	"""Whether ū is meant to be a strict subsolution, f(λ(𝔤̲)) > ψ"""
	exact: 'GridField | None' = None
	description: dict[str, Any] = field(default_factory=dict)
	"""What the problem was built from, for reports"""

	def __post_init__(self):
		for name in ('psi', 'phi', 'subsolution'):
			if np.shape(getattr(self, name)) != (self.grid.size,):
				raise ValueError(f'{name} has shape {np.shape(getattr(self, name))}, the grid has {self.grid.size} nodes')
		if self.operator.dimension != self.grid.dimension:
			raise ValueError(f'{self.operator.name} is {self.operator.dimension}-dimensional, the grid is {self.grid.dimension}')
		boundary = self.grid.boundary_mask
		gap = np.abs(self.subsolution[boundary] - self.phi[boundary])
		if gap.size and gap.max() > 0:
			raise ValueError(f'Subsolution differs from φ on the boundary by up to {gap.max()}')

	@property
	def interior(self) -> np.ndarray:
		return self.grid.interior_nodes

	@cached_property
	def subsolution_eigenvalues(self) -> 'FloatArray':
		return eigenvalue_field(self.subsolution, self.metric, self.grid)

	@cached_property
	def subsolution_values(self) -> 'FloatArray':
		"""f(λ(𝔤̲)) at interior nodes, NaN where 𝔤̲ is not admissible"""
		lam = self.subsolution_eigenvalues[self.interior]
		inside = self.operator.cone.interior_mask(lam)
		values = np.full(self.interior.size, np.nan)
		values[inside] = self.operator.value_unchecked(lam[inside])
		return values

	def check_subsolution(self) -> SubsolutionCheck:
		values = self.subsolution_values
		admissible = bool(np.all(np.isfinite(values)))
		gaps = np.where(np.isfinite(values), values - self.psi[self.interior], -np.inf)
		worst = int(np.argmin(gaps))
		return SubsolutionCheck(admissible, float(gaps[worst]), int(self.interior[worst]), self.strict)

	def require_admissible_subsolution(self):
		check = self.check_subsolution()
		if not check.admissible:
			node = check.worst_node
			raise ConeViolationError(
				f'Subsolution is not admissible at node {node} ({self.grid.physical[node].tolist()})',
				self.subsolution_eigenvalues[node],
				node,
			)
		if not check.passed:
			logger.warning('Subsolution falls short of ψ by %g at node %d', -check.margin, check.worst_node)
		return check

	def with_psi(self, psi: 'GridField') -> 'ChartProblem':
		return replace(self, psi=np.asarray(psi, dtype=float))


def ball_subsolution(
	grid: 'ChartGrid',
	metric: 'MetricField',
	operator: 'OperatorSpec',
	psi: 'GridField',
	phi: Expression,
	*,
	strict: bool = True,
) -> tuple['GridField', float]:
	"""ū = φ + A(|x|² − R²)/2 on a ball of radius R, with the smallest A on the ladder for which the discrete 𝔤̲ is admissible and f(λ(𝔤̲)) ≥ ψ (or > ψ) at every interior node.
	Boundary nodes get φ exactly, which matters on Cartesian charts where they sit inside the circle."""
	radius = grid.domain.ball_radius if grid.domain is not None else None
	if radius is None:
		raise UnsupportedDomainError('The built-in subsolution needs a ball domain, supply one for anything else')
	x = grid.physical
	base = phi.value(x)
	bowl = 0.5 * (np.sum(x**2, axis=-1) - radius**2)
	boundary = grid.boundary_mask
	interior = grid.interior_nodes
	for a in SUBSOLUTION_LADDER:
		candidate = base + a * bowl
		candidate[boundary] = base[boundary]
		lam = eigenvalue_field(candidate, metric, grid)[interior]
		if not np.all(operator.cone.interior_mask(lam)):
			continue
		gap = operator.value_unchecked(lam) - psi[interior]
		above = gap > 0 if strict else gap >= 0
		if np.all(above):
			logger.debug('Subsolution curvature A = %g, margin %g', a, gap.min())
			return candidate, a
	raise ConeViolationError(
		f'No A up to {SUBSOLUTION_LADDER[-1]} makes φ + A(|x|² − R²)/2 a subsolution for {operator.name}'
	)


def build_problem(
	grid: 'ChartGrid',
	metric: 'MetricField',
	operator: 'OperatorSpec',
	psi: Expression,
	phi: Expression,
	subsolution: Expression | None = None,
	exact: Expression | None = None,
	*,
	strict: bool = True,
) -> ChartProblem:
	"""Samples the expressions at the grid nodes. Without a subsolution expression the ball generator supplies one."""
	if operator.dimension != grid.dimension:
		raise ValueError(f'{operator.name} is {operator.dimension}-dimensional, the grid is {grid.dimension}')
	if isinstance(psi, Manufactured) and not metric.flat:
		raise UnsupportedDomainError('Manufactured right-hand sides need a flat metric')
	x = grid.physical
	psi_values = psi.value(x)
	phi_values = phi.value(x)
	description: dict[str, Any] = {'psi': psi.parameters(), 'phi': phi.parameters()}
	if subsolution is None:
		subsolution_values, curvature = ball_subsolution(grid, metric, operator, psi_values, phi, strict=strict)
		description['subsolution'] = {'name': 'ball', 'curvature': curvature}
	else:
		subsolution_values = subsolution.value(x)
		subsolution_values[grid.boundary_mask] = phi_values[grid.boundary_mask]
		description['subsolution'] = subsolution.parameters()
	if exact is not None:
		description['exact'] = exact.parameters()
	return ChartProblem(
		grid,
		metric,
		operator,
		psi_values,
		phi_values,
		subsolution_values,
		strict,
		None if exact is None else exact.value(x),
		description,
	)

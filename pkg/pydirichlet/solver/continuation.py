"""Degenerate right-hand sides, approached through ψ_ε = max(ψ, sup_∂Γ f + ε) for a decreasing sequence of ε"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.cones import sup_boundary_f
from pydirichlet.errors import InfiniteBoundarySupremumError, ScheduleTooAggressiveError
from pydirichlet.geometry import covariant_hessian, gradient_norm

from .newton import SolverOptions, newton_solve

if TYPE_CHECKING:
	from collections.abc import Sequence

	from pydirichlet.typedefs import GridField

	from .newton import SolutionField
	from .problem import ChartProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContinuationSchedule:
	epsilons: tuple[float, ...]
	tolerance: float | None = None
	"""Newton tolerance at every level, if different from the solver options"""

	def __post_init__(self):
		if not self.epsilons:
			raise ValueError('schedule must have at least one ε')
		if any(eps <= 0 for eps in self.epsilons):
			raise ValueError(f'schedule must be positive, got {list(self.epsilons)}')
		if any(later >= earlier for earlier, later in itertools.pairwise(self.epsilons)):
			raise ValueError(f'schedule must decrease, got {list(self.epsilons)}')

	def __len__(self) -> int:
		return len(self.epsilons)

	def to_dict(self) -> dict[str, Any]:
		return {'epsilons': list(self.epsilons), 'tolerance': self.tolerance}


def geometric_schedule(epsilon0: float, levels: int, ratio: float = 0.5) -> ContinuationSchedule:
	"""ε_k = ε₀·ratio^k for k = 0 … levels − 1"""
	return ContinuationSchedule(tuple(epsilon0 * ratio**k for k in range(levels)))


@dataclass(frozen=True)
class LevelSummary:
	"""What one ε level looked like: the quantities the a priori estimates are about"""

	epsilon: float
	iterations: int
	sup_laplacian: float
	"""sup over interior nodes of Δu"""
	sup_gradient: float
	"""sup |∇u|_g"""
	sup_boundary_laplacian: float
	"""sup over ∂M of Δu, one-sided differences"""
	cauchy_gap: float | None
	"""max |u_ε − u_ε′| against the previous level"""
	error: float | None
	"""max |u_ε − u_exact| if an exact solution is known"""

	@property
	def boundary_constant(self) -> float:
		"""C_ε = sup_∂M Δu / (1 + sup|∇u|²)"""
		return self.sup_boundary_laplacian / (1 + self.sup_gradient**2)

	def to_dict(self) -> dict[str, Any]:
		return {
			'epsilon': self.epsilon,
			'iterations': self.iterations,
			'sup_laplacian': self.sup_laplacian,
			'sup_gradient': self.sup_gradient,
			'sup_boundary_laplacian': self.sup_boundary_laplacian,
			'boundary_constant': self.boundary_constant,
			'cauchy_gap': self.cauchy_gap,
			'error': self.error,
		}


@dataclass(frozen=True, eq=False)
class ContinuationLevel:
	summary: LevelSummary
	problem: 'ChartProblem'
	"""The regularized problem solved at this level"""
	solution: 'SolutionField'

	@property
	def epsilon(self) -> float:
		return self.summary.epsilon

	@property
	def boundary_constant(self) -> float:
		return self.summary.boundary_constant


@dataclass(eq=False)
class ContinuationReport:
	sup_boundary: float
	"""sup_∂Γ f"""
	margin: float
	"""min f(λ(𝔤̲)) − sup_∂Γ f, which ε₀ has to stay below"""
	schedule: ContinuationSchedule
	levels: list[ContinuationLevel] = field(default_factory=list)

	@property
	def final(self) -> ContinuationLevel:
		return self.levels[-1]

	def to_dict(self) -> dict[str, Any]:
		return {
			'sup_boundary_f': self.sup_boundary,
			'margin': self.margin,
			'schedule': self.schedule.to_dict(),
			'levels': [level.summary.to_dict() for level in self.levels],
		}


def regularized_psi(psi: 'GridField', sup_boundary: float, epsilon: float) -> 'GridField':
	return np.maximum(psi, sup_boundary + epsilon)


def summarize_level(
	problem: 'ChartProblem', solution: 'SolutionField', epsilon: float, previous: 'GridField | None'
) -> LevelSummary:
	grid, metric = problem.grid, problem.metric
	u = solution.u
	laplacian = np.einsum('nij,nij->n', metric.inverse, covariant_hessian(u, metric, grid))
	return LevelSummary(
		epsilon,
		solution.stats.iterations,
		float(np.nanmax(laplacian[grid.interior_mask])),
		float(np.nanmax(gradient_norm(u, metric, grid))),
		float(np.nanmax(laplacian[grid.boundary_mask])),
		None if previous is None else float(np.max(np.abs(u - previous))),
		None if problem.exact is None else float(np.max(np.abs(u - problem.exact))),
	)


def continuation_solve(
	problem: 'ChartProblem',
	schedule: ContinuationSchedule | None = None,
	options: SolverOptions | None = None,
	*,
	default_levels: int = 8,
) -> ContinuationReport:
	"""Solves with ψ_ε for each ε in the schedule, each level warm-started from the one before. Without a schedule, ε₀ is half the subsolution margin and ε halves each level."""
	options = options or SolverOptions()
	supremum = sup_boundary_f(problem.operator)
	if not supremum.is_finite:
		raise InfiniteBoundarySupremumError(
			f'sup_∂Γ f = {supremum.value} for {problem.operator.name}, the regularization needs it finite'
		)
	check = problem.require_admissible_subsolution()
	margin = float(np.min(problem.subsolution_values)) - supremum.value
	if check.margin <= 0:
		raise ScheduleTooAggressiveError(
			f'ū is not a strict subsolution (f(λ(𝔤̲)) − ψ gets down to {check.margin}), no ε can work', 0.0, margin
		)
	if schedule is None:
		schedule = geometric_schedule(0.5 * check.margin, default_levels)
	epsilon0 = schedule.epsilons[0]
	if epsilon0 >= margin:
		raise ScheduleTooAggressiveError(
			f'ε₀ = {epsilon0} needs to stay below min f(λ(𝔤̲)) − sup_∂Γ f = {margin}',
			epsilon0,
			margin,
		)
	if schedule.tolerance is not None:
		options = replace(options, tolerance=schedule.tolerance)

	report = ContinuationReport(supremum.value, margin, schedule)
	u = None
	for epsilon in schedule.epsilons:
		level_problem = problem.with_psi(regularized_psi(problem.psi, supremum.value, epsilon))
		solution = newton_solve(level_problem, options, initial=u)
		summary = summarize_level(level_problem, solution, epsilon, u)
		logger.info(
			'ε = %g: %d iterations, sup Δu = %.4g, C_ε = %.4g',
			epsilon,
			summary.iterations,
			summary.sup_laplacian,
			summary.boundary_constant,
		)
		report.levels.append(ContinuationLevel(summary, level_problem, solution))
		u = solution.u
	return report


def epsilon_trajectory(report: ContinuationReport) -> 'Sequence[tuple[float, float]]':
	"""(ε, C_ε) pairs in schedule order"""
	return [(level.epsilon, level.boundary_constant) for level in report.levels]

"""Damped Newton iteration that never leaves the admissible set, and the Poisson problem for the upper barrier."""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from pydirichlet.eigen import cluster_average, generalized_eigen_batched
from pydirichlet.errors import (
	ConeViolationError,
	LinearSolveError,
	MaxIterationsError,
	NonellipticNodeError,
	StepCollapseError,
)
from pydirichlet.geometry import covariant_hessian, covariant_hessian_operators

if TYPE_CHECKING:
	from pydirichlet.settings import LinearSolverKind
	from pydirichlet.typedefs import FloatArray, GridField, TensorField

	from .problem import ChartProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
	tolerance: float = 1e-8
	"""Converged once max |residual| < tolerance·(1 + max |ψ|)"""
	max_iterations: int = 50
	damping: float = 1.0
	"""First step length the line search tries"""
	linear_solver: 'LinearSolverKind' = 'direct'
	linear_tolerance: float = 1e-10
	"""Relative, for GMRES"""
	gmres_restart: int = 50
	gmres_max_iterations: int = 2000
	min_step: float = 1e-8

	def __post_init__(self):
		if not 0 < self.damping <= 1:
			raise ValueError(f'damping must be in (0, 1], got {self.damping}')

	def to_dict(self) -> dict[str, Any]:
		return {
			'tolerance': self.tolerance,
			'max_iterations': self.max_iterations,
			'damping': self.damping,
			'linear_solver': self.linear_solver,
			'linear_tolerance': self.linear_tolerance,
		}


@dataclass(frozen=True)
class IterationRecord:
	iteration: int
	residual_max: float
	residual_rms: float
	step_norm: float
	"""max |δ|"""
	step: float
	"""Accepted t"""

	def to_dict(self) -> dict[str, Any]:
		return {
			'iteration': self.iteration,
			'residual_max': self.residual_max,
			'residual_rms': self.residual_rms,
			'step_norm': self.step_norm,
			'step': self.step,
		}


@dataclass
class SolverStats:
	iterations: int = 0
	converged: bool = False
	history: list[IterationRecord] = field(default_factory=list)
	linear_solver: str = 'direct'

	def to_dict(self) -> dict[str, Any]:
		return {
			'iterations': self.iterations,
			'converged': self.converged,
			'linear_solver': self.linear_solver,
			'history': [record.to_dict() for record in self.history],
		}


@dataclass(frozen=True, eq=False)
class Evaluation:
	"""Everything computed from one iterate"""

	tensor: 'TensorField'
	"""𝔤 = ∇²u + χ"""
	eigenvalues: 'FloatArray'
	"""λ(𝔤; g) at interior nodes, NaN elsewhere"""
	vectors: 'TensorField'
	admissible: np.ndarray
	"""Per interior node"""
	residual: 'GridField'
	"""f(λ) − ψ at admissible interior nodes, u − φ on the boundary, NaN at inadmissible nodes"""

	@property
	def all_admissible(self) -> bool:
		return bool(self.admissible.all())

	def interior_residual(self, problem: 'ChartProblem') -> np.ndarray:
		return self.residual[problem.interior]


def _rms(values: np.ndarray) -> float:
	return float(np.sqrt(np.mean(values**2))) if values.size else 0.0


def evaluate(problem: 'ChartProblem', u: 'GridField') -> Evaluation:
	grid, metric, op = problem.grid, problem.metric, problem.operator
	interior = problem.interior
	tensor = covariant_hessian(u, metric, grid) + metric.chi
	eigenvalues = np.full((grid.size, grid.dimension), np.nan)
	vectors = np.full((grid.size, grid.dimension, grid.dimension), np.nan)
	eigenvalues[interior], vectors[interior] = generalized_eigen_batched(tensor[interior], metric.g[interior])
	admissible = op.cone.interior_mask(eigenvalues[interior])
	residual = np.asarray(u, dtype=float) - problem.phi
	values = np.full(interior.size, np.nan)
	values[admissible] = op.value_unchecked(eigenvalues[interior][admissible])
	residual[interior] = values - problem.psi[interior]
	return Evaluation(tensor, eigenvalues, vectors, admissible, residual)


def _require_admissible(problem: 'ChartProblem', evaluation: Evaluation):
	if evaluation.all_admissible:
		return
	bad = problem.interior[np.flatnonzero(~evaluation.admissible)]
	node = int(bad[0])
	raise ConeViolationError(
		f'Iterate is not admissible at {bad.size} nodes, first at {problem.grid.physical[node].tolist()}',
		evaluation.eigenvalues[node],
		node,
	)


def residual(problem: 'ChartProblem', u: 'GridField') -> 'GridField':
	"""f(λ(𝔤; g)) − ψ at interior nodes, u − φ on the boundary"""
	evaluation = evaluate(problem, u)
	_require_admissible(problem, evaluation)
	return evaluation.residual


def _dirichlet_rows(problem: 'ChartProblem', interior_operator) -> scipy.sparse.csr_array:
	interior = problem.grid.interior_mask.astype(float)
	return scipy.sparse.csr_array(
		scipy.sparse.diags_array(interior) @ interior_operator + scipy.sparse.diags_array(1.0 - interior)
	)


def _contract(problem: 'ChartProblem', coefficients: 'TensorField') -> scipy.sparse.csr_array:
	"""Σ_ab c^{ab}∇_ab as one sparse matrix"""
	hessian_operators = covariant_hessian_operators(problem.metric, problem.grid)
	total = None
	for (a, b), matrix in hessian_operators.items():
		weight = coefficients[:, a, b] if a == b else coefficients[:, a, b] + coefficients[:, b, a]
		term = scipy.sparse.diags_array(np.nan_to_num(weight)) @ matrix
		total = term if total is None else total + term
	return _dirichlet_rows(problem, total)


def linearization(problem: 'ChartProblem', evaluation: Evaluation) -> scipy.sparse.csr_array:
	"""L v = F^{ab}∇_ab v at interior nodes, v at boundary nodes. F^{ab} = Σ_k f_k v_k^a v_k^b with g-orthonormal eigenvectors"""
	_require_admissible(problem, evaluation)
	interior = problem.interior
	lam = evaluation.eigenvalues[interior]
	derivative = cluster_average(lam, problem.operator.gradient(lam))
	if np.any(derivative <= 0):
		node = int(interior[np.flatnonzero(np.any(derivative <= 0, axis=-1))[0]])
		raise NonellipticNodeError(
			f'∂f/∂λ is not positive at node {node} (λ = {evaluation.eigenvalues[node].tolist()})', node
		)
	coefficients = np.zeros_like(evaluation.tensor)
	vectors = evaluation.vectors[interior]
	coefficients[interior] = np.einsum('nak,nk,nbk->nab', vectors, derivative, vectors)
	return _contract(problem, coefficients)


def solve_linear(
	matrix: scipy.sparse.csr_array, rhs: np.ndarray, options: SolverOptions
) -> np.ndarray:
	match options.linear_solver:
		case 'direct':
			try:
				solution = scipy.sparse.linalg.spsolve(scipy.sparse.csc_array(matrix), rhs)
			except RuntimeError as ex:
				raise LinearSolveError(f'Sparse LU failed: {ex}') from ex
		case 'gmres':
			diagonal = matrix.diagonal()
			if np.any(diagonal == 0):
				raise LinearSolveError('Jacobi preconditioner needs a nonzero diagonal')
			preconditioner = scipy.sparse.linalg.LinearOperator(matrix.shape, matvec=lambda v: v / diagonal)
			solution, info = scipy.sparse.linalg.gmres(
				matrix,
				rhs,
				rtol=options.linear_tolerance,
				atol=0.0,
				restart=options.gmres_restart,
				maxiter=options.gmres_max_iterations,
				M=preconditioner,
			)
			if info != 0:
				raise LinearSolveError(f'GMRES did not converge (info = {info})')
		case _:
			raise ValueError(f'Unknown linear solver {options.linear_solver!r}')
	if not np.all(np.isfinite(solution)):
		raise LinearSolveError('Linear solve produced non-finite values')
	return solution


@dataclass(frozen=True)
class NewtonStep:
	direction: 'GridField'
	expected_decrease: float
	"""Drop in max |residual| the linear model predicts for the full step"""


def newton_step(
	problem: 'ChartProblem', u: 'GridField', options: SolverOptions | None = None, evaluation: Evaluation | None = None
) -> NewtonStep:
	"""Solves L δ = −residual with δ = 0 on the boundary"""
	options = options or SolverOptions()
	evaluation = evaluation or evaluate(problem, u)
	matrix = linearization(problem, evaluation)
	rhs = -np.asarray(evaluation.residual)
	rhs[problem.grid.boundary_mask] = 0.0
	direction = solve_linear(matrix, rhs, options)
	return NewtonStep(direction, float(np.max(np.abs(evaluation.interior_residual(problem)), initial=0.0)))


@dataclass(frozen=True, eq=False)
class LineSearchResult:
	step: float
	u: 'GridField'
	evaluation: Evaluation
	halvings: int


def line_search_admissible(
	problem: 'ChartProblem',
	u: 'GridField',
	direction: 'GridField',
	options: SolverOptions | None = None,
	evaluation: Evaluation | None = None,
) -> LineSearchResult:
	"""Largest t in damping·{1, ½, ¼, …} with u + tδ admissible everywhere and a smaller rms residual (or already converged)"""
	options = options or SolverOptions()
	evaluation = evaluation or evaluate(problem, u)
	if not np.any(direction):
		return LineSearchResult(1.0, np.asarray(u, dtype=float), evaluation, 0)
	current = _rms(evaluation.interior_residual(problem))
	target = options.tolerance * (1 + float(np.max(np.abs(problem.psi))))
	t = options.damping
	halvings = 0
	worst_node = None
	while t >= options.min_step:
		candidate = u + t * direction
		trial = evaluate(problem, candidate)
		if trial.all_admissible:
			interior_residual = trial.interior_residual(problem)
			if _rms(interior_residual) < current or np.max(np.abs(interior_residual), initial=0.0) < target:
				return LineSearchResult(t, candidate, trial, halvings)
			worst_node = int(problem.interior[np.argmax(np.abs(interior_residual))])
			logger.debug('t = %g keeps admissibility but the residual does not go down', t)
		else:
			margins = problem.operator.cone.diagonal_margin(np.nan_to_num(trial.eigenvalues[problem.interior]))
			worst_node = int(problem.interior[np.argmin(margins)])
			logger.debug('t = %g leaves the cone at %d nodes', t, int(np.count_nonzero(~trial.admissible)))
		t /= 2
		halvings += 1
	raise StepCollapseError(f'Line search step fell below {options.min_step}', t, worst_node)


@dataclass(frozen=True, eq=False)
class SolutionField:
	u: 'GridField'
	tensor: 'TensorField'
	"""𝔤 = ∇²u + χ"""
	eigenvalues: 'FloatArray'
	residual: 'GridField'
	stats: SolverStats

	@property
	def max_residual(self) -> float:
		return float(np.nanmax(np.abs(self.residual)))

	def to_dict(self) -> dict[str, Any]:
		return {'max_residual': self.max_residual, **self.stats.to_dict()}


def newton_solve(
	problem: 'ChartProblem', options: SolverOptions | None = None, *, initial: 'GridField | None' = None
) -> SolutionField:
	"""Newton's method from ū (or from initial, which must be admissible and equal φ on the boundary) until max |residual| < tol·(1 + |ψ|∞)"""
	options = options or SolverOptions()
	u = np.array(problem.subsolution if initial is None else initial, dtype=float)
	boundary = problem.grid.boundary_mask
	u[boundary] = problem.phi[boundary]
	target = options.tolerance * (1 + float(np.max(np.abs(problem.psi))))
	stats = SolverStats(linear_solver=options.linear_solver)
	evaluation = evaluate(problem, u)
	_require_admissible(problem, evaluation)
	for iteration in range(options.max_iterations + 1):
		interior_residual = evaluation.interior_residual(problem)
		residual_max = float(np.max(np.abs(interior_residual), initial=0.0))
		if residual_max < target:
			stats.iterations = iteration
			stats.converged = True
			logger.info('Newton converged in %d iterations, max residual %.3g', iteration, residual_max)
			return SolutionField(u, evaluation.tensor, evaluation.eigenvalues, evaluation.residual, stats)
		if iteration == options.max_iterations:
			break
		step = newton_step(problem, u, options, evaluation)
		search = line_search_admissible(problem, u, step.direction, options, evaluation)
		u, evaluation = search.u, search.evaluation
		stats.history.append(
			IterationRecord(
				iteration + 1,
				residual_max,
				_rms(interior_residual),
				float(np.max(np.abs(step.direction), initial=0.0)),
				search.step,
			)
		)
		logger.info(
			'Newton iteration %d: max residual %.3g, step %g', iteration + 1, residual_max, search.step
		)
	stats.iterations = options.max_iterations
	final = float(np.max(np.abs(evaluation.interior_residual(problem)), initial=0.0))
	raise MaxIterationsError(
		f'Newton did not converge in {options.max_iterations} iterations (max residual {final:.3g})', final
	)


def laplace_beltrami(problem: 'ChartProblem') -> scipy.sparse.csr_array:
	"""Δ = g^{ab}∇_ab at interior nodes, identity rows on the boundary"""
	return _contract(problem, problem.metric.inverse)


def solve_poisson_h(problem: 'ChartProblem', options: SolverOptions | None = None) -> 'GridField':
	"""Δh + tr_g χ = 0 in M, h = φ on ∂M. By the maximum principle h sits above every admissible u with the same boundary values."""
	options = options or SolverOptions()
	rhs = -problem.metric.trace_chi.copy()
	boundary = problem.grid.boundary_mask
	rhs[boundary] = problem.phi[boundary]
	return solve_linear(laplace_beltrami(problem), rhs, options)

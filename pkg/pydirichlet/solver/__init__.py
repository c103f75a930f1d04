"""Newton's method for the Dirichlet problem, ε-continuation for degenerate right-hand sides, and the Poisson barrier."""

from .continuation import (
	ContinuationLevel,
	ContinuationReport,
	ContinuationSchedule,
	LevelSummary,
	continuation_solve,
	epsilon_trajectory,
	geometric_schedule,
	regularized_psi,
)
from .expressions import (
	EXPRESSION_CATALOG,
	Affine,
	Constant,
	CsvField,
	Expression,
	Manufactured,
	Quadratic,
	QuadraticForm,
	RadialExp,
	RadialPower,
	make_expression,
	make_manufactured,
	read_csv_field,
	read_csv_field_async,
)
from .newton import (
	Evaluation,
	IterationRecord,
	LineSearchResult,
	NewtonStep,
	SolutionField,
	SolverOptions,
	SolverStats,
	evaluate,
	laplace_beltrami,
	line_search_admissible,
	linearization,
	newton_solve,
	newton_step,
	residual,
	solve_linear,
	solve_poisson_h,
)
from .problem import ChartProblem, SubsolutionCheck, ball_subsolution, build_problem

__all__ = [
	'EXPRESSION_CATALOG',
	'Affine',
	'ChartProblem',
	'Constant',
	'ContinuationLevel',
	'ContinuationReport',
	'ContinuationSchedule',
	'CsvField',
	'Evaluation',
	'Expression',
	'IterationRecord',
	'LevelSummary',
	'LineSearchResult',
	'Manufactured',
	'NewtonStep',
	'Quadratic',
	'QuadraticForm',
	'RadialExp',
	'RadialPower',
	'SolutionField',
	'SolverOptions',
	'SolverStats',
	'SubsolutionCheck',
	'ball_subsolution',
	'build_problem',
	'continuation_solve',
	'epsilon_trajectory',
	'evaluate',
	'geometric_schedule',
	'laplace_beltrami',
	'line_search_admissible',
	'linearization',
	'make_expression',
	'make_manufactured',
	'newton_solve',
	'newton_step',
	'read_csv_field',
	'read_csv_field_async',
	'regularized_psi',
	'residual',
	'solve_linear',
	'solve_poisson_h',
]

"""Numerical lab for Dirichlet problems of degenerate fully nonlinear elliptic equations of Hessian type."""

__version__ = '0.0.1'

from .commands import RunConfig, parse_config, run, run_async
from .errors import ExitCode, LabError
from .settings import LabSettings
from .solver import ChartProblem, SolutionField, build_problem, continuation_solve, newton_solve, solve_poisson_h

__all__ = [
	'ChartProblem',
	'ExitCode',
	'LabError',
	'LabSettings',
	'RunConfig',
	'SolutionField',
	'build_problem',
	'continuation_solve',
	'newton_solve',
	'parse_config',
	'run',
	'run_async',
	'solve_poisson_h',
]

"""Dispatches a RunConfig to the solver and the audits, and turns what comes back into report.json and fields.csv"""

import asyncio
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.cones import check_structural_conditions, make_operator, sup_boundary_f
from pydirichlet.diagnostics import (
	barrier_probe,
	boundary_hessian_report,
	delta_independence_study,
	global_laplacian_report,
	normal_threshold_audit,
	sandwich_check,
)
from pydirichlet.diagnostics.study import MIN_LEVELS
from pydirichlet.eigen import BorderedMatrix, border_localize, fuzz_localization
from pydirichlet.errors import ConfigValidationError, ExitCode, LabError, OutputError
from pydirichlet.geometry import (
	check_boundary_cone_condition,
	fields_to_csv,
	make_chi,
	make_domain,
	make_metric,
	principal_curvatures,
)
from pydirichlet.settings import LabSettings
from pydirichlet.solver import (
	ContinuationReport,
	CsvField,
	SolverOptions,
	build_problem,
	continuation_solve,
	make_expression,
	make_manufactured,
	newton_solve,
	read_csv_field_async,
	solve_poisson_h,
)

from .config import ManufacturedConfig, config_to_dict
from .output import solution_fields, write_artifacts, write_artifacts_async

if TYPE_CHECKING:
	from collections.abc import Mapping

	from pydirichlet.solver import ChartProblem, SolutionField
	from pydirichlet.typedefs import FloatArray

	from .config import ClosedFormConfig, ProblemConfig, RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CommandOutcome:
	report: dict[str, Any]
	fields: str | None
	"""CSV text, for commands that produce grid fields"""
	exit_code: ExitCode = ExitCode.OK


def resolve_config(
	config: 'RunConfig', settings: LabSettings, *, out_dir: Path | None = None, seed: int | None = None
) -> 'RunConfig':
	"""Fills in everything the config leaves to the command line or the environment, so the manifest says exactly what ran"""
	solver = config.solver
	if solver.linear_solver is None:
		solver = solver.model_copy(update={'linear_solver': settings.linear_solver})
	return config.model_copy(
		update={
			'output_dir': out_dir or config.output_dir or settings.output_dir,
			'seed': seed if seed is not None else (config.seed if config.seed is not None else settings.seed),
			'samples': config.samples or settings.sample_budget,
			'solver': solver,
		}
	)


type CsvData = tuple[FloatArray, FloatArray]


def _expression(config: 'ClosedFormConfig', preloaded: 'Mapping[Path, CsvData] | None' = None):
	expression = make_expression(**config.model_dump())
	if isinstance(expression, CsvField) and preloaded and expression.path in preloaded:
		return replace(expression, data=preloaded[expression.path])
	return expression


def problem_from_config(
	config: 'ProblemConfig', preloaded: 'Mapping[Path, CsvData] | None' = None
) -> 'ChartProblem':
	"""Builds the problem. CSV fields found in preloaded are not read again.
	A problem the builders reject (an annulus turned inside out, an operator of the wrong dimension) is a config error."""
	try:
		return _build_problem(config, preloaded)
	except ValueError as ex:
		if isinstance(ex, LabError):
			raise
		raise ConfigValidationError([('problem', str(ex))]) from ex


def _build_problem(config: 'ProblemConfig', preloaded: 'Mapping[Path, CsvData] | None') -> 'ChartProblem':
	grid = make_domain(**config.domain.model_dump()).build_grid()
	metric = make_chi(make_metric(grid, **config.metric.model_dump()), config.chi.name, config.chi.scale)
	operator = make_operator(**config.operator.model_dump())
	exact = None if config.exact is None else _expression(config.exact, preloaded)
	if isinstance(config.psi, ManufacturedConfig):
		solution = _expression(config.psi.solution, preloaded)
		chi_scale = config.chi.scale if config.chi.name == 'metric' else 0.0
		psi = make_manufactured(solution, operator, chi_scale)
		exact = exact or solution
	else:
		psi = _expression(config.psi, preloaded)
	subsolution = None if config.subsolution is None else _expression(config.subsolution, preloaded)
	phi = _expression(config.phi, preloaded)
	return build_problem(grid, metric, operator, psi, phi, subsolution, exact, strict=config.strict)


def solver_options(config: 'RunConfig') -> SolverOptions:
	solver = config.solver
	return SolverOptions(
		tolerance=solver.tolerance,
		max_iterations=solver.max_iterations,
		damping=solver.damping,
		linear_solver=solver.linear_solver or 'direct',
		linear_tolerance=solver.linear_tolerance,
	)


def _max_error(problem: 'ChartProblem', u: np.ndarray) -> float | None:
	return None if problem.exact is None else float(np.max(np.abs(u - problem.exact)))


def _exact_fields(problem: 'ChartProblem', u: np.ndarray) -> dict[str, np.ndarray]:
	if problem.exact is None:
		return {}
	return {'exact': problem.exact, 'error': u - problem.exact}


def _solve(config: 'RunConfig', preloaded: 'Mapping[Path, CsvData] | None') -> CommandOutcome:
	assert config.problem is not None
	problem = problem_from_config(config.problem, preloaded)
	check = problem.require_admissible_subsolution()
	solution = newton_solve(problem, solver_options(config))
	report = {
		'problem': problem.description,
		'subsolution': check.to_dict(),
		'solution': solution.to_dict(),
		'max_error': _max_error(problem, solution.u),
	}
	return CommandOutcome(report, fields_to_csv(problem.grid, solution_fields(solution, _exact_fields(problem, solution.u))))


def _study(continuation: ContinuationReport) -> dict[str, Any] | None:
	if len(continuation.levels) < MIN_LEVELS:
		return None
	return delta_independence_study(continuation.levels).to_dict()


def _continue(config: 'RunConfig', problem: 'ChartProblem') -> ContinuationReport:
	schedule = None if config.schedule is None else config.schedule.to_schedule()
	default_levels = 8 if config.schedule is None else config.schedule.levels
	return continuation_solve(problem, schedule, solver_options(config), default_levels=default_levels)


def _continuation(config: 'RunConfig', preloaded: 'Mapping[Path, CsvData] | None') -> CommandOutcome:
	assert config.problem is not None
	problem = problem_from_config(config.problem, preloaded)
	continuation = _continue(config, problem)
	final = continuation.final.solution
	report = {
		'problem': problem.description,
		'continuation': continuation.to_dict(),
		'delta_study': _study(continuation),
		'max_error': _max_error(problem, final.u),
	}
	return CommandOutcome(report, fields_to_csv(problem.grid, solution_fields(final, _exact_fields(problem, final.u))))


def _poisson_h(config: 'RunConfig', preloaded: 'Mapping[Path, CsvData] | None') -> CommandOutcome:
	assert config.problem is not None
	problem = problem_from_config(config.problem, preloaded)
	h = solve_poisson_h(problem, solver_options(config))
	report = {
		'problem': problem.description,
		'min': float(np.min(h)),
		'max': float(np.max(h)),
		'max_error': _max_error(problem, h),
	}
	return CommandOutcome(report, fields_to_csv(problem.grid, {'h': h, **_exact_fields(problem, h)}))


def _check_cone(config: 'RunConfig') -> CommandOutcome:
	operator = make_operator(**config.operator_config.model_dump())
	seed = config.seed
	conditions = check_structural_conditions(operator, config.samples or 10_000, seed)
	report: dict[str, Any] = {
		'conditions': conditions.to_dict(),
		'sup_boundary_f': sup_boundary_f(operator, np.random.default_rng(seed)).to_dict(),
	}
	passed = conditions.passed
	fields = None
	if config.problem is not None:
		grid = make_domain(**config.problem.domain.model_dump()).build_grid()
		metric = make_metric(grid, **config.problem.metric.model_dump())
		kappa = principal_curvatures(grid, metric)
		boundary = check_boundary_cone_condition(kappa, operator.cone, grid.boundary_nodes)
		report['boundary_cone_condition'] = boundary.to_dict()
		passed = passed and boundary.passed
		spread = np.full((grid.size, kappa.shape[1]), np.nan)
		spread[grid.boundary_nodes] = kappa
		fields = fields_to_csv(grid, {'kappa': spread})
	return CommandOutcome(report, fields, ExitCode.OK if passed else ExitCode.ConditionFailed)


def _lemma_border(config: 'RunConfig') -> CommandOutcome:
	lemma = config.lemma
	assert lemma is not None
	if lemma.corner is None:
		matrix = BorderedMatrix.at_threshold(lemma.d, lemma.a, lemma.epsilon)
	else:
		matrix = BorderedMatrix(lemma.d, lemma.a, lemma.corner, lemma.epsilon)
	localization = border_localize(matrix, assert_bounds=False)
	report: dict[str, Any] = {
		'matrix': {'d': list(matrix.d), 'a': list(matrix.a), 'corner': matrix.corner, 'epsilon': matrix.epsilon},
		'localization': localization.to_dict(),
	}
	passed = localization.passed
	if lemma.fuzz:
		fuzz = fuzz_localization(lemma.fuzz, np.random.default_rng(config.seed), lemma.max_order)
		report['fuzz'] = fuzz.to_dict()
		passed = passed and fuzz.passed
	return CommandOutcome(report, None, ExitCode.OK if passed else ExitCode.ConditionFailed)


def _diagnose(config: 'RunConfig', preloaded: 'Mapping[Path, CsvData] | None') -> CommandOutcome:
	assert config.problem is not None
	problem = problem_from_config(config.problem, preloaded)
	options = solver_options(config)
	report: dict[str, Any] = {'problem': problem.description}
	solution: SolutionField
	if config.schedule is not None:
		continuation = _continue(config, problem)
		solved, solution = continuation.final.problem, continuation.final.solution
		report['continuation'] = continuation.to_dict()
		report['delta_study'] = _study(continuation)
	else:
		solved, solution = problem, newton_solve(problem, options)
		report['solution'] = solution.to_dict()
	u = solution.u
	report['max_error'] = _max_error(problem, u)

	diagnostics = config.diagnostics
	h = solve_poisson_h(problem, options)
	tolerance = diagnostics.sandwich_tolerance or 10 * options.tolerance
	sandwich = sandwich_check(u, problem.subsolution, h, tolerance)
	estimates = boundary_hessian_report(solved, u)
	audit = normal_threshold_audit(solved, u, max_nodes=diagnostics.max_nodes)
	global_report = global_laplacian_report(solved, u)
	report['sandwich'] = sandwich.to_dict()
	report['estimates'] = estimates.to_dict()
	report['normal_audit'] = audit.to_dict()
	report['global_laplacian'] = global_report.to_dict()

	extra = {'h': h, **_exact_fields(problem, u), **estimates.node_fields(problem.grid.size)}
	if diagnostics.barrier_delta is not None:
		anchor = diagnostics.barrier_anchor
		if anchor is None:
			anchor = int(problem.grid.boundary_nodes[0])
		probe = barrier_probe(solved, u, anchor, diagnostics.barrier_delta)
		report['barrier'] = probe.to_dict()
		extra['barrier'] = probe.values

	passed = sandwich.passed and audit.passed and global_report.trace_positive
	return CommandOutcome(
		report,
		fields_to_csv(problem.grid, solution_fields(solution, extra)),
		ExitCode.OK if passed else ExitCode.ConditionFailed,
	)


def _failure(config: 'RunConfig', ex: LabError) -> CommandOutcome:
	logger.error('%s failed: %s', config.command, ex)
	return CommandOutcome({'error': ex.to_dict()}, None, ex.exit_code)


def execute(config: 'RunConfig', preloaded: 'Mapping[Path, CsvData] | None' = None) -> CommandOutcome:
	"""Runs the command without writing anything. Lab errors become an error report with their exit code.
	preloaded holds CSV fields that were already read, keyed by path."""
	logger.info('Running %s', config.command)
	try:
		match config.command:
			case 'solve':
				return _solve(config, preloaded)
			case 'continuation':
				return _continuation(config, preloaded)
			case 'poisson-h':
				return _poisson_h(config, preloaded)
			case 'check-cone':
				return _check_cone(config)
			case 'lemma-border':
				return _lemma_border(config)
			case 'diagnose':
				return _diagnose(config, preloaded)
	except LabError as ex:
		return _failure(config, ex)
	raise ValueError(f'Unknown command {config.command!r}')


def _manifest(config: 'RunConfig') -> dict[str, Any]:
	from pydirichlet import __version__  # noqa: PLC0415

	return {'program': 'pydirichlet', 'version': __version__, 'config': config_to_dict(config)}


def _report(config: 'RunConfig', outcome: CommandOutcome) -> dict[str, Any]:
	status = 'ok' if outcome.exit_code == ExitCode.OK else 'error' if 'error' in outcome.report else 'fail'
	return {
		'command': config.command,
		'status': status,
		'exit_code': int(outcome.exit_code),
		'seed': config.seed,
		**outcome.report,
	}


def run(config: 'RunConfig', settings: LabSettings | None = None) -> ExitCode:
	"""Runs the command and writes manifest.json, report.json and (if there are grid fields) fields.csv. Returns the exit code."""
	config = resolve_config(config, settings or LabSettings())
	outcome = execute(config)
	assert config.output_dir is not None
	try:
		write_artifacts(config.output_dir, _manifest(config), _report(config, outcome), outcome.fields)
	except OutputError as ex:
		logger.error('%s', ex)
		return ExitCode.IO
	return outcome.exit_code


async def load_csv_fields_async(config: 'RunConfig') -> dict[Path, CsvData]:
	"""Reads every CSV field the problem refers to, concurrently"""
	paths = [] if config.problem is None else config.problem.csv_paths()
	loaded = await asyncio.gather(*(read_csv_field_async(path) for path in paths))
	return dict(zip(paths, loaded, strict=True))


async def run_async(config: 'RunConfig', settings: LabSettings | None = None) -> ExitCode:
	config = resolve_config(config, settings or LabSettings())
	try:
		preloaded = await load_csv_fields_async(config)
	except LabError as ex:
		outcome = _failure(config, ex)
	else:
		outcome = await asyncio.to_thread(execute, config, preloaded)
	assert config.output_dir is not None
	try:
		await write_artifacts_async(config.output_dir, _manifest(config), _report(config, outcome), outcome.fields)
	except OutputError as ex:
		logger.error('%s', ex)
		return ExitCode.IO
	return outcome.exit_code

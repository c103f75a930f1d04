import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pydirichlet.cones import LogSigmaN, MongeAmpere
from pydirichlet.diagnostics import Verdict, delta_independence_study
from pydirichlet.errors import InfiniteBoundarySupremumError, ScheduleTooAggressiveError, StepCollapseError
from pydirichlet.geometry import Chart, Disk, eigenvalue_field, euclidean_metric, make_chi
from pydirichlet.solver import (
	Constant,
	ContinuationSchedule,
	Quadratic,
	RadialExp,
	RadialPower,
	SolverOptions,
	build_problem,
	continuation_solve,
	epsilon_trajectory,
	evaluate,
	geometric_schedule,
	line_search_admissible,
	make_manufactured,
	newton_solve,
	newton_step,
	regularized_psi,
	residual,
	solve_poisson_h,
)


def _disk_problem(resolution, op, psi, phi, *, chart=Chart.Polar, chi_scale=None, **kwargs):
	grid = Disk(resolution=resolution, chart=chart).build_grid()
	metric = euclidean_metric(grid)
	metric = make_chi(metric) if chi_scale is None else make_chi(metric, 'metric', chi_scale)
	return build_problem(grid, metric, op, psi, phi, **kwargs)


def test_ball_subsolution_curvature(monge_ampere_problem, poisson_problem):
	assert monge_ampere_problem.description['subsolution'] == {'name': 'ball', 'curvature': 2.0}
	assert poisson_problem.description['subsolution']['curvature'] == 4.0
	check = monge_ampere_problem.check_subsolution()
	assert check.passed
	assert check.margin == pytest.approx(1.0)


def test_residual_vanishes_at_the_exact_solution(monge_ampere_problem):
	values = residual(monge_ampere_problem, monge_ampere_problem.exact)
	assert_allclose(values, 0.0, atol=1e-10)


def test_residual_at_the_subsolution_is_the_margin(monge_ampere_problem):
	values = residual(monge_ampere_problem, monge_ampere_problem.subsolution)
	boundary = monge_ampere_problem.grid.boundary_mask
	assert_allclose(values[boundary], 0.0)
	assert_allclose(values[monge_ampere_problem.interior], 1.0, atol=1e-10)


def test_newton_solves_monge_ampere(monge_ampere_problem):
	solution = newton_solve(monge_ampere_problem)
	assert solution.stats.converged
	assert np.max(np.abs(solution.u - monge_ampere_problem.exact)) < 1e-6
	assert solution.max_residual < 1e-8 * 2
	assert np.all(solution.eigenvalues[monge_ampere_problem.interior] > 0)


def test_linear_operator_converges_in_one_iteration(poisson_problem):
	solution = newton_solve(poisson_problem)
	assert solution.stats.iterations == 1
	assert solution.stats.history[0].step == 1.0
	assert_allclose(solution.u, poisson_problem.exact, atol=1e-9)


def test_gmres_agrees_with_direct(monge_ampere_problem):
	direct = newton_solve(monge_ampere_problem)
	iterative = newton_solve(monge_ampere_problem, SolverOptions(linear_solver='gmres'))
	assert iterative.stats.linear_solver == 'gmres'
	assert_allclose(iterative.u, direct.u, atol=1e-7)


@pytest.mark.slow
def test_manufactured_solution_converges_at_second_order():
	op = MongeAmpere(2)
	exact = RadialExp(c=1.0, s=1.0)
	errors = []
	for resolution in (16, 32, 64):
		problem = _disk_problem(resolution, op, make_manufactured(exact, op), exact, exact=exact)
		solution = newton_solve(problem)
		assert solution.stats.converged
		errors.append(np.max(np.abs(solution.u - problem.exact)))
	assert errors[-1] < 1e-3
	assert all(coarse / fine >= 3 for coarse, fine in itertools.pairwise(errors)), errors


def _shared_nodes(polar, cartesian, scale):
	"""Interior node pairs with the same physical point, the polar ones sitting on the lattice of spacing 1/scale"""

	def lattice(grid):
		scaled = grid.physical[grid.interior_nodes] * scale
		on_lattice = np.all(np.abs(scaled - np.rint(scaled)) < 1e-9, axis=-1)
		keys = np.rint(scaled[on_lattice]).astype(int)
		return {tuple(key): node for key, node in zip(keys.tolist(), grid.interior_nodes[on_lattice], strict=True)}

	polar_nodes = lattice(polar)
	cartesian_nodes = lattice(cartesian)
	shared = sorted(polar_nodes.keys() & cartesian_nodes.keys())
	return np.array([polar_nodes[key] for key in shared]), np.array([cartesian_nodes[key] for key in shared])


def test_eigenvalues_and_solutions_agree_across_charts():
	# rings of the resolution 8 polar disk sit at odd multiples of 1/17, on the resolution 17 lattice
	polar = Disk(resolution=8).build_grid()
	cartesian = Disk(resolution=17, chart=Chart.Cartesian).build_grid()
	h = polar.spacing[0]
	polar_nodes, cartesian_nodes = _shared_nodes(polar, cartesian, 17)
	assert len(polar_nodes) >= 4 * 8
	assert_allclose(polar.physical[polar_nodes], cartesian.physical[cartesian_nodes], atol=1e-12)

	fields = []
	for grid in (polar, cartesian):
		u = np.sum(grid.physical**2, axis=-1)
		fields.append(eigenvalue_field(u, make_chi(euclidean_metric(grid)), grid))
	assert_allclose(fields[0][polar_nodes], fields[1][cartesian_nodes], atol=10 * h**2)

	op = MongeAmpere(2)
	exact = RadialExp(c=1.0, s=1.0)
	solutions = [
		newton_solve(_disk_problem(resolution, op, make_manufactured(exact, op), exact, chart=chart)).u
		for resolution, chart in ((8, Chart.Polar), (17, Chart.Cartesian))
	]
	assert_allclose(solutions[0][polar_nodes], solutions[1][cartesian_nodes], atol=10 * h**2)


def test_solution_does_not_depend_on_the_chart():
	op = MongeAmpere(2)
	for chart in Chart:
		problem = _disk_problem(8, op, Constant(1.0), Quadratic(a=1.0), chart=chart, exact=Quadratic(a=1.0))
		solution = newton_solve(problem)
		assert np.max(np.abs(solution.u - problem.exact)) < 1e-8, chart


def test_poisson_barrier_with_chi():
	problem = _disk_problem(8, MongeAmpere(2), Constant(1.0), Constant(0.0), chi_scale=1.0)
	assert problem.description['subsolution']['curvature'] == pytest.approx(2.0**-10)
	h = solve_poisson_h(problem)
	r = problem.grid.coords[:, 0]
	assert_allclose(h, (1 - r**2) / 2, atol=1e-10)


def test_newton_step_from_the_subsolution(poisson_problem):
	step = newton_step(poisson_problem, poisson_problem.subsolution)
	assert step.expected_decrease == pytest.approx(4.0)
	assert_allclose(poisson_problem.subsolution + step.direction, poisson_problem.exact, atol=1e-9)
	assert_allclose(step.direction[poisson_problem.grid.boundary_mask], 0.0)


def test_line_search_takes_the_full_step_when_it_is_safe(poisson_problem):
	u = poisson_problem.subsolution
	result = line_search_admissible(poisson_problem, u, poisson_problem.exact - u)
	assert result.step == 1.0
	assert result.halvings == 0


def test_line_search_backs_off_to_stay_admissible(poisson_problem):
	grid = poisson_problem.grid
	u = poisson_problem.subsolution
	direction = poisson_problem.exact - u
	interior = poisson_problem.interior
	target = interior[np.argmin(np.linalg.norm(grid.physical[interior] - [0.5, 0.0], axis=-1))]
	direction[target] -= 0.2
	result = line_search_admissible(poisson_problem, u, direction)
	assert result.step < 1.0
	assert result.halvings >= 1
	assert result.step == pytest.approx(0.5**result.halvings)
	assert result.evaluation.all_admissible
	assert not evaluate(poisson_problem, u + direction).all_admissible


def test_line_search_zero_direction(poisson_problem):
	u = poisson_problem.subsolution
	result = line_search_admissible(poisson_problem, u, np.zeros_like(u))
	assert result.step == 1.0
	assert result.halvings == 0


def test_line_search_collapses_when_nothing_helps(poisson_problem):
	u = poisson_problem.subsolution
	r2 = np.sum(poisson_problem.grid.physical**2, axis=-1)
	with pytest.raises(StepCollapseError) as info:
		line_search_admissible(poisson_problem, u, r2 - 1.0, SolverOptions(min_step=1e-3))
	assert info.value.step < 1e-3


def test_schedule_validation():
	with pytest.raises(ValueError, match='schedule must decrease'):
		ContinuationSchedule((0.1, 0.2))
	with pytest.raises(ValueError, match='must be positive'):
		ContinuationSchedule((0.1, -0.1))
	with pytest.raises(ValueError):
		ContinuationSchedule(())
	assert geometric_schedule(0.1, 3).epsilons == pytest.approx((0.1, 0.05, 0.025))


def test_regularized_psi():
	assert_allclose(regularized_psi(np.array([0.0, 0.5, 2.0]), 0.0, 1.0), [1.0, 1.0, 2.0])


def test_first_epsilon_must_stay_below_the_margin(monge_ampere_problem):
	with pytest.raises(ScheduleTooAggressiveError) as info:
		continuation_solve(monge_ampere_problem, ContinuationSchedule((3.0,)))
	assert info.value.margin == pytest.approx(2.0)


def test_log_sigma_n_cannot_be_regularized():
	problem = _disk_problem(8, LogSigmaN(2), Constant(0.0), Constant(0.5))
	with pytest.raises(InfiniteBoundarySupremumError):
		continuation_solve(problem, ContinuationSchedule((0.1,)))


def test_single_level_continuation_matches_newton(monge_ampere_problem):
	report = continuation_solve(monge_ampere_problem, ContinuationSchedule((0.5,)))
	assert report.sup_boundary == 0.0
	assert len(report.levels) == 1
	level = report.final
	assert level.summary.cauchy_gap is None
	assert level.summary.error < 1e-6
	assert_allclose(level.solution.u, newton_solve(monge_ampere_problem).u, atol=1e-9)
	assert epsilon_trajectory(report) == [(0.5, level.boundary_constant)]


def test_degenerate_right_hand_side_is_approached_through_epsilon():
	a = 1 / (3 * math.sqrt(2))
	problem = _disk_problem(
		8,
		MongeAmpere(2),
		RadialPower(a=1.0, p=1.0),
		Constant(0.0),
		subsolution=Quadratic(a=2.0, c=-1.0),
		exact=RadialPower(a=a, p=3.0, c=-a),
	)
	report = continuation_solve(problem, geometric_schedule(0.1, 8))
	assert report.margin == pytest.approx(2.0)
	assert [level.epsilon for level in report.levels] == pytest.approx([0.1 * 2.0**-k for k in range(8)])
	assert all(level.solution.stats.converged for level in report.levels)
	h = problem.grid.spacing[0]
	assert report.final.summary.error <= 5 * (h**2 + 0.1 * 2.0**-7)
	assert report.final.summary.cauchy_gap < 1e-2
	assert all(math.isfinite(c) for _, c in epsilon_trajectory(report))
	assert delta_independence_study(report.levels).verdict == Verdict.Bounded

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pydirichlet.cones import MongeAmpere
from pydirichlet.diagnostics import (
	BarrierParams,
	SyntheticLevel,
	Verdict,
	barrier_ladder,
	barrier_probe,
	boundary_frames,
	boundary_hessian_report,
	compute_beta0,
	delta_independence_study,
	global_laplacian_report,
	normal_threshold_audit,
	sample_nodes,
	sandwich_check,
)
from pydirichlet.errors import CollarTooSmallError, ConeViolationError, InsufficientLevelsError, InvalidAnchorError
from pydirichlet.geometry import Disk, boundary_distance, covariant_hessian, euclidean_metric, make_chi
from pydirichlet.solver import Constant, Quadratic, QuadraticForm, build_problem, newton_solve, solve_poisson_h


@pytest.fixture(scope='module')
def monge_ampere_solution(monge_ampere_problem):
	return newton_solve(monge_ampere_problem).u


def test_sandwich_holds_for_the_solution(monge_ampere_problem, monge_ampere_solution):
	h = solve_poisson_h(monge_ampere_problem)
	assert_allclose(h, 0.5, atol=1e-10)
	report = sandwich_check(monge_ampere_solution, monge_ampere_problem.subsolution, h)
	assert report.passed
	assert report.lower_slack == pytest.approx(0.0, abs=1e-8)
	assert report.upper_slack == pytest.approx(0.0, abs=1e-8)


def test_sandwich_with_u_equal_to_h(monge_ampere_problem):
	h = solve_poisson_h(monge_ampere_problem)
	report = sandwich_check(h, monge_ampere_problem.subsolution, h)
	assert report.passed
	assert report.upper_slack == 0.0


def test_sandwich_points_at_the_bump(monge_ampere_problem, monge_ampere_solution):
	h = solve_poisson_h(monge_ampere_problem)
	node = int(monge_ampere_problem.interior[10])
	bumped = monge_ampere_solution.copy()
	bumped[node] += 1.0
	report = sandwich_check(bumped, monge_ampere_problem.subsolution, h)
	assert not report.passed
	assert report.upper_worst_node == node
	assert report.upper_slack < -0.5
	assert report.to_dict()['status'] == 'fail'


def test_sandwich_rejects_mismatched_shapes():
	with pytest.raises(ValueError, match='shapes'):
		sandwich_check(np.zeros(3), np.zeros(3), np.zeros(4))


def test_boundary_frames_are_orthonormal(monge_ampere_problem):
	grid, metric = monge_ampere_problem.grid, monge_ampere_problem.metric
	geometry = boundary_distance(grid, metric)
	frames = boundary_frames(geometry, covariant_hessian(monge_ampere_problem.subsolution, metric, grid))
	assert frames.nodes.size == grid.boundary_nodes.size
	gram = np.einsum('nia,nij,njb->nab', frames.vectors, metric.g[frames.nodes], frames.vectors)
	assert_allclose(gram, np.broadcast_to(np.eye(2), gram.shape), atol=1e-10)
	assert_allclose(frames.sigma_normal, 1.0)


def test_boundary_estimates_for_the_paraboloid(monge_ampere_problem, monge_ampere_solution):
	report = boundary_hessian_report(monge_ampere_problem, monge_ampere_solution)
	assert report.finite
	assert report.sup_gradient == pytest.approx(1.0, abs=1e-6)
	assert report.boundary_ratio.value == pytest.approx(1.0, abs=1e-6)
	assert report.mixed.value == pytest.approx(0.0, abs=1e-6)
	assert report.tangential_identity_residual < 1e-6
	assert report.hessian_identity_residual < 1e-5
	fields = report.node_fields(monge_ampere_problem.grid.size)
	assert np.isnan(fields['mixed_ratio'][monge_ampere_problem.interior]).all()


def test_beta0_for_a_round_subsolution(monge_ampere_problem):
	assert compute_beta0(monge_ampere_problem) == pytest.approx(1 / (2 * math.sqrt(2)))


def test_beta0_needs_an_admissible_subsolution():
	grid = Disk(resolution=8).build_grid()
	problem = build_problem(
		grid, make_chi(euclidean_metric(grid)), MongeAmpere(2), Constant(1.0), Constant(0.0), subsolution=Quadratic(a=-1.0)
	)
	with pytest.raises(ConeViolationError, match='not admissible'):
		compute_beta0(problem)


def test_normal_audit_passes_on_the_disk(monge_ampere_problem, monge_ampere_solution):
	report = normal_threshold_audit(monge_ampere_problem, monge_ampere_solution, max_nodes=8)
	assert len(report.certificates) == 8
	assert report.passed
	worst = report.worst
	assert worst is not None
	assert worst.normal_entry == pytest.approx(1.0, abs=1e-6)
	assert worst.rc >= worst.normal_entry
	assert report.to_dict()['status'] == 'pass'


def test_threshold_grows_with_the_mixed_entries():
	grid = Disk(resolution=8).build_grid()
	phi = QuadraticForm(q=((1.0, 0.0), (0.0, 2.0)))
	problem = build_problem(grid, make_chi(euclidean_metric(grid)), MongeAmpere(2), Constant(1.0), phi)
	u = newton_solve(problem).u
	plain = normal_threshold_audit(problem, u, max_nodes=16)
	inflated = normal_threshold_audit(problem, u, max_nodes=16, inflate_mixed=3.0)
	plain_rc = np.array([c.rc for c in plain.certificates])
	inflated_rc = np.array([c.rc for c in inflated.certificates])
	assert np.all(inflated_rc >= plain_rc - 1e-12)
	assert np.any(inflated_rc > plain_rc)


def test_global_laplacian(monge_ampere_problem, monge_ampere_solution):
	report = global_laplacian_report(monge_ampere_problem, monge_ampere_solution)
	assert report.trace_positive
	assert report.trace_margin == pytest.approx(2.0, abs=1e-6)
	assert report.ratio == pytest.approx(1.0, abs=1e-6)


def test_sample_nodes():
	nodes = np.arange(10, 20)
	assert_allclose(sample_nodes(nodes, None), nodes)
	chosen = sample_nodes(nodes, 3)
	assert chosen.size == 3
	assert chosen[0] == 10
	assert chosen[-1] == 19
	assert_allclose(sample_nodes(nodes, 3), chosen)


def test_barrier_params():
	with pytest.raises(ValueError, match='Nδ'):
		BarrierParams(200.0, 20.0, 2.0, 10.0, 1.0, 0.5, 2.0, 0.3)
	first = next(barrier_ladder(0.1, 2.0, 0.3))
	assert (first.a3, first.a2, first.a1, first.n) == (2.0, 20.0, 200.0, 10.0)
	assert first.t == pytest.approx(1.0)
	assert first.ordered


def test_barrier_probe(monge_ampere_problem, monge_ampere_solution):
	grid = monge_ampere_problem.grid
	anchor = int(grid.boundary_nodes[0])
	probe = barrier_probe(monge_ampere_problem, monge_ampere_solution, anchor, 0.4)
	assert probe.collar_nodes.size >= 3
	assert anchor in probe.collar_nodes
	assert probe.anchor_value == pytest.approx(0.0, abs=1e-6)
	assert probe.boundary_identity_residual < 1e-6
	assert probe.collar_gradient_ok
	assert probe.tried >= 1
	outside = np.setdiff1d(np.arange(grid.size), probe.collar_nodes)
	assert np.isnan(probe.values[outside]).all()


def test_barrier_probe_with_fixed_params(monge_ampere_problem, monge_ampere_solution):
	anchor = int(monge_ampere_problem.grid.boundary_nodes[0])
	params = BarrierParams(200.0, 20.0, 2.0, 10.0, 5.0, 0.4, 2.0, 0.3)
	probe = barrier_probe(monge_ampere_problem, monge_ampere_solution, anchor, 0.4, params)
	assert probe.tried == 1
	assert probe.params is params


def test_barrier_probe_errors(monge_ampere_problem, monge_ampere_solution):
	interior = int(monge_ampere_problem.interior[0])
	with pytest.raises(InvalidAnchorError, match='not a boundary node') as info:
		barrier_probe(monge_ampere_problem, monge_ampere_solution, interior, 0.4)
	assert info.value.node == interior
	assert isinstance(info.value, ValueError)
	anchor = int(monge_ampere_problem.grid.boundary_nodes[0])
	with pytest.raises(CollarTooSmallError):
		barrier_probe(monge_ampere_problem, monge_ampere_solution, anchor, 1e-3)


def test_delta_study_growing():
	levels = [SyntheticLevel(2.0**-k, 2.0**k) for k in range(6)]
	study = delta_independence_study(levels)
	assert study.verdict == Verdict.Growing
	assert study.exponent == pytest.approx(1.0)
	assert study.to_dict()['verdict'] == 'GROWING'


def test_delta_study_bounded():
	levels = [SyntheticLevel(2.0**-k, 1.0 + 2.0**-k) for k in range(6)]
	study = delta_independence_study(levels)
	assert study.verdict == Verdict.Bounded
	assert study.spread < 2


def test_delta_study_needs_enough_levels():
	with pytest.raises(InsufficientLevelsError):
		delta_independence_study([SyntheticLevel(0.1, 1.0), SyntheticLevel(0.05, 1.0), SyntheticLevel(0.025, 1.0)])

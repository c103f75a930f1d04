import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pydirichlet.cones import (
	GardingCone,
	LogSigmaN,
	Membership,
	MongeAmpere,
	NonMonotone,
	ProjectedCone,
	SigmaKRoot,
	SigmaQuotient,
	check_structural_conditions,
	concavity_gap,
	cone_contains,
	elementary_symmetric,
	estimate_boundary_supremum,
	estimate_concavity_epsilon,
	f_eval,
	f_grad,
	make_operator,
	sample_cone,
	sample_cone_boundary,
	sup_boundary_f,
	unit_normal,
)
from pydirichlet.errors import ConeViolationError


def test_f_eval_examples():
	assert f_eval(MongeAmpere(2), [1.0, 1.0]) == pytest.approx(1.0)
	assert f_eval(MongeAmpere(2), [1.0, 4.0]) == pytest.approx(2.0)
	assert f_eval(SigmaKRoot(3, 1), [1.0, 2.0, 3.0]) == pytest.approx(6.0)


def test_f_eval_outside_closure_raises():
	with pytest.raises(ConeViolationError) as info:
		f_eval(MongeAmpere(2), [3.0, -1.0])
	assert info.value.eigenvalues == [3.0, -1.0]


def test_f_eval_on_boundary_is_the_limit():
	assert f_eval(MongeAmpere(2), [1.0, 0.0]) == 0.0
	assert f_eval(LogSigmaN(2), [1.0, 0.0]) == -math.inf


def test_f_grad_examples():
	assert_allclose(f_grad(MongeAmpere(2), [1.0, 4.0]), [1.0, 0.25])
	assert_allclose(f_grad(MongeAmpere(3), [1.0, 1.0, 1.0]), [1 / 3] * 3)
	assert_allclose(f_grad(SigmaKRoot(3, 1), [5.0, -1.0, 0.5]), [1.0, 1.0, 1.0])


def test_f_grad_matches_central_differences(rng):
	op = SigmaQuotient(4, 3, 1)
	lam = sample_cone(op.cone, 20, rng)
	step = 1e-6
	for row in lam:
		numeric = [
			(op.value(row + step * e) - op.value(row - step * e)) / (2 * step) for e in np.eye(op.dimension)
		]
		assert_allclose(op.gradient(row), numeric, rtol=1e-5, atol=1e-8)


def test_elementary_symmetric():
	assert_allclose(elementary_symmetric([1.0, 2.0, 3.0], 3), [1.0, 6.0, 11.0, 6.0])


def test_cone_contains_examples():
	positive = GardingCone(2, 2)
	half_space = GardingCone(2, 1)
	assert cone_contains(positive, [3.0, -1.0]).membership == Membership.Outside
	assert cone_contains(half_space, [3.0, -1.0]).membership == Membership.Interior
	assert cone_contains(positive, [1.0, 0.0]).membership == Membership.Boundary
	assert cone_contains(half_space, [3.0, -1.0]).distance == pytest.approx(2 / math.sqrt(2))


def test_garding_cone_middle_order():
	cone = GardingCone(3, 2)
	assert cone_contains(cone, [1.0, 1.0, -0.4]).membership == Membership.Interior
	assert cone_contains(cone, [1.0, 1.0, -0.5]).membership == Membership.Boundary
	assert cone_contains(cone, [1.0, 1.0, -0.6]).membership == Membership.Outside


def test_sampled_points_are_inside_and_on_boundary(rng):
	cone = GardingCone(4, 3)
	assert cone.interior_mask(sample_cone(cone, 200, rng)).all()
	boundary = sample_cone_boundary(cone, 200, rng)
	assert_allclose(cone.diagonal_margin(boundary), 0.0, atol=1e-8)


def test_projected_cone_by_bisection():
	projected = ProjectedCone(GardingCone(2, 2))
	assert projected.dimension == 1
	assert cone_contains(projected, [0.5]).membership == Membership.Interior
	assert cone_contains(projected, [-0.5]).membership == Membership.Outside


def test_sup_boundary_f():
	assert sup_boundary_f(MongeAmpere(2)).value == 0.0
	assert sup_boundary_f(SigmaKRoot(3, 1)).value == 0.0
	supremum = sup_boundary_f(LogSigmaN(3))
	assert supremum.value == -math.inf
	assert supremum.analytic
	assert supremum.to_dict()['value'] == '-inf'


def test_sampled_boundary_supremum_agrees(rng):
	supremum, probe = estimate_boundary_supremum(MongeAmpere(2), rng)
	assert supremum.value == pytest.approx(0.0, abs=1e-3)
	assert not supremum.analytic
	assert probe.divergent == 0
	supremum, probe = estimate_boundary_supremum(LogSigmaN(2), rng)
	assert supremum.value == -math.inf
	assert probe.divergent == probe.samples


def test_sampled_boundary_supremum_steps_into_the_cone(rng):
	supremum, probe = estimate_boundary_supremum(SigmaKRoot(3, 1), rng)
	assert probe.divergent == 0
	assert 0 < supremum.value < 1e-8


def test_sigma_k_order_is_checked_up_front():
	with pytest.raises(ValueError, match='1 ≤ k ≤ n'):
		SigmaKRoot(2, 3)


def test_unit_normal():
	assert_allclose(unit_normal(SigmaKRoot(3, 1), [2.0, -1.0, 0.5]), np.ones(3) / math.sqrt(3))
	assert_allclose(unit_normal(MongeAmpere(2), [1.0, 1.0]), [1 / math.sqrt(2)] * 2)
	assert_allclose(unit_normal(MongeAmpere(2), [1.0, 4.0]), np.array([4.0, 1.0]) / math.sqrt(17))


def test_concavity_gap():
	op = MongeAmpere(2)
	gap = concavity_gap(op, [1.0, 4.0], [2.0, 2.0], beta0=0.1)
	assert gap.gap == pytest.approx(0.5)
	assert gap.filter_active
	assert gap.epsilon_hat == pytest.approx(0.5 / 2.25)
	same = concavity_gap(op, [1.0, 4.0], [1.0, 4.0], beta0=0.1)
	assert same.gap == pytest.approx(0.0, abs=1e-12)
	assert not same.filter_active
	assert same.epsilon_hat is None


def test_concavity_gap_needs_positive_beta0():
	with pytest.raises(ValueError, match='β₀'):
		concavity_gap(MongeAmpere(2), [1.0, 4.0], [2.0, 2.0], beta0=0.0)


def test_estimate_concavity_epsilon(rng):
	op = SigmaKRoot(3, 2)
	lam = sample_cone(op.cone, 500, rng)
	mu = sample_cone(op.cone, 500, rng)
	epsilon = estimate_concavity_epsilon(op, lam, mu, beta0=0.2)
	assert epsilon is not None
	assert epsilon >= -1e-10
	assert estimate_concavity_epsilon(op, lam, lam, beta0=0.2) is None


@pytest.mark.slow
@pytest.mark.parametrize('op', [MongeAmpere(2), MongeAmpere(3), SigmaKRoot(3, 2)])
def test_structural_conditions_pass_for_the_zoo(op):
	report = check_structural_conditions(op, sample_budget=10_000, seed=0)
	assert report.passed, [check.to_dict() for check in report.failures]
	assert report['ellipticity'].samples == 10_000


def test_structural_conditions_pass_for_the_trace():
	report = check_structural_conditions(SigmaKRoot(3, 1), sample_budget=10_000, seed=1)
	assert report.passed
	assert report['concavity_midpoint'].margin == pytest.approx(0.0, abs=1e-9)


def test_log_sigma_n_skips_the_origin_bound():
	report = check_structural_conditions(LogSigmaN(2), sample_budget=500, seed=0)
	assert report.passed
	assert report['lower_bound_at_origin'].informational


def test_non_monotone_fails_ellipticity_with_witness():
	report = check_structural_conditions(NonMonotone(), sample_budget=500, seed=0)
	assert not report.passed
	ellipticity = report['ellipticity']
	assert not ellipticity.passed
	assert ellipticity.witness is not None
	assert ellipticity.witness['value'] == pytest.approx(-1.0)
	assert report.to_dict()['status'] == 'fail'


def test_make_operator():
	assert make_operator('sigma_k', n=3, k=2) == SigmaKRoot(3, 2)
	assert make_operator('monge_ampere', n=2).cone == GardingCone(2, 2)
	with pytest.raises(ValueError, match='sigma_k'):
		make_operator('monge_ampre', n=2)

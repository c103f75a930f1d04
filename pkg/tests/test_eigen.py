import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pydirichlet.cones import MongeAmpere, SigmaKRoot
from pydirichlet.eigen import (
	BorderedMatrix,
	BoundaryFrameData,
	border_localize,
	border_threshold,
	dFdA,
	eigenvalues_wrt_metric,
	fuzz_localization,
	generalized_eigen,
	generalized_eigen_batched,
	prepare_frame,
	rc_threshold,
	search_r0,
	search_step1,
	verify_normal_estimate,
)
from pydirichlet.errors import (
	GrowthConditionUnmetError,
	InvalidFrameError,
	MetricNotSPDError,
	NonpositiveEpsilonError,
	Step1FailureError,
)


def _random_spd(rng, n):
	m = rng.standard_normal((n, n))
	return m @ m.T + n * np.eye(n)


def test_generalized_eigen_examples():
	values, _ = generalized_eigen(2 * np.eye(2), np.eye(2))
	assert_allclose(values, [2.0, 2.0])
	values, vectors = generalized_eigen(np.diag([2.0, 4.0]), 2 * np.eye(2))
	assert_allclose(values, [1.0, 2.0])
	assert_allclose(vectors.T @ (2 * np.eye(2)) @ vectors, np.eye(2), atol=1e-12)


def test_generalized_eigen_matches_characteristic_roots(rng):
	a = rng.standard_normal((4, 4))
	a = a + a.T
	g = _random_spd(rng, 4)
	values, _ = generalized_eigen(a, g)
	roots = np.sort(np.linalg.eigvals(np.linalg.solve(g, a)).real)
	assert_allclose(values, roots, rtol=1e-9, atol=1e-10)


def test_batched_agrees_with_single(rng):
	a = rng.standard_normal((50, 3, 3))
	a = a + np.swapaxes(a, 1, 2)
	g = np.stack([_random_spd(rng, 3) for _ in range(50)])
	values, vectors = generalized_eigen_batched(a, g, threads=4)
	for i in range(50):
		assert_allclose(values[i], generalized_eigen(a[i], g[i])[0], rtol=1e-9, atol=1e-10)
		assert_allclose(a[i] @ vectors[i], g[i] @ vectors[i] * values[i], atol=1e-8)
	assert_allclose(eigenvalues_wrt_metric(a, g), values)


def test_indefinite_metric_is_rejected():
	with pytest.raises(MetricNotSPDError):
		generalized_eigen(np.eye(2), np.diag([1.0, -1.0]))
	with pytest.raises(MetricNotSPDError) as info:
		generalized_eigen_batched(np.stack([np.eye(2)] * 3), np.stack([np.eye(2), np.eye(2), -np.eye(2)]))
	assert info.value.node == 2


def test_dfda_examples():
	assert_allclose(dFdA(SigmaKRoot(2, 1), np.diag([3.0, -1.0]), np.eye(2)), np.eye(2), atol=1e-12)
	assert_allclose(dFdA(MongeAmpere(2), np.eye(2), np.eye(2)), 0.5 * np.eye(2), atol=1e-12)
	assert_allclose(dFdA(MongeAmpere(2), np.diag([1.0, 4.0]), np.eye(2)), np.diag([1.0, 0.25]), atol=1e-12)


def test_dfda_matches_finite_differences(rng):
	op = MongeAmpere(3)
	g = _random_spd(rng, 3)
	a = _random_spd(rng, 3)
	direction = rng.standard_normal((3, 3))
	direction = direction + direction.T
	step = 1e-6

	def value(matrix):
		return float(op.value(generalized_eigen(matrix, g)[0]))

	numeric = (value(a + step * direction) - value(a - step * direction)) / (2 * step)
	assert np.sum(dFdA(op, a, g) * direction) == pytest.approx(numeric, rel=1e-6)


def test_border_threshold_examples():
	assert border_threshold([0.0], [1.0], 0.5) == pytest.approx(2.0)
	assert border_threshold([0.5, -0.5], [1.0, 2.0], 0.3) == pytest.approx(52.1)
	assert border_threshold([0.0, 0.0], [0.0, 0.0], 0.3) == pytest.approx(0.1)


def test_border_threshold_rejects_nonpositive_epsilon():
	with pytest.raises(NonpositiveEpsilonError):
		border_threshold([0.0], [1.0], 0.0)
	with pytest.raises(NonpositiveEpsilonError):
		BorderedMatrix((0.0,), (1.0,), 2.0, -1.0)


def test_border_localize_two_by_two():
	result = border_localize(BorderedMatrix.at_threshold([0.0], [1.0], 0.5))
	assert_allclose(result.eigenvalues, [1 - math.sqrt(2), 1 + math.sqrt(2)])
	assert result.passed
	assert result.growth_condition_met
	assert result.threshold == pytest.approx(2.0)
	assert result.deviations[0] == pytest.approx(math.sqrt(2) - 1)
	assert result.corner_excess == pytest.approx(math.sqrt(2) - 1)
	assert result.upper_slack == pytest.approx(0.5 - (math.sqrt(2) - 1))


def test_border_localize_pairs_sorted_diagonal():
	result = border_localize(BorderedMatrix.at_threshold([2.0, -1.0, 0.5], [0.1, 0.2, -0.3], 0.2))
	assert result.passed
	assert result.pairing == (2, 0, 1)


def test_border_localize_below_threshold():
	matrix = BorderedMatrix((0.0,), (1.0,), 1.0, 0.5)
	with pytest.raises(GrowthConditionUnmetError) as info:
		border_localize(matrix)
	assert info.value.threshold == pytest.approx(2.0)
	report = border_localize(matrix, assert_bounds=False)
	assert not report.growth_condition_met
	assert not report.passed


@pytest.mark.slow
def test_fuzz_localization_at_threshold(rng):
	report = fuzz_localization(10_000, rng, max_order=8)
	assert report.passed
	assert report.instances == 10_000
	assert report.failures == 0
	assert report.min_tangential_slack > 0
	assert report.min_upper_slack > 0
	assert report.worst is not None


def _frame(**overrides):
	values = {
		'tangential': (1.0,),
		'mixed': (1.0,),
		'sigma_hessian': ((0.0,),),
		'normal_gap': 2.0,
		'eps0': 0.4,
		'r0_big': 5.0,
		'eps1': 0.01,
		'r0': 1.0,
	}
	return BoundaryFrameData(**(values | overrides))


def test_rc_threshold_example():
	assert rc_threshold(_frame()) == pytest.approx(28.05)


def test_rc_threshold_without_mixed_entries_ignores_eps0_term():
	assert rc_threshold(_frame(mixed=(0.0,))) == pytest.approx(8.05)
	assert rc_threshold(_frame(mixed=(0.0,), eps0=0.1)) == pytest.approx(1.0125 + 5.0 + 2.0)


def test_rc_threshold_rejects_negative_gap():
	with pytest.raises(InvalidFrameError):
		rc_threshold(_frame(normal_gap=-0.1))


def test_normal_certificate_for_the_trace():
	op = SigmaKRoot(2, 1)
	frame = prepare_frame(op, [1.0], [0.0], [[1.0]], 0.5, 0.0)
	certificate = verify_normal_estimate(op, frame, 0.0)
	assert certificate.passed
	assert certificate.eps1_guard_ok
	assert certificate.sigma_cone_ok
	assert certificate.comparison_ok
	assert certificate.shifted_value_margin > 1


def test_normal_certificate_with_larger_mixed_entries():
	op = SigmaKRoot(2, 1)
	small = verify_normal_estimate(op, prepare_frame(op, [1.0], [1.0], [[1.0]], 0.5, 0.0), 0.0)
	large = verify_normal_estimate(op, prepare_frame(op, [1.0], [3.0], [[1.0]], 0.5, 0.0), 0.0)
	assert large.rc > small.rc
	assert small.passed
	assert large.passed


def test_normal_certificate_flags_large_eps1():
	op = SigmaKRoot(2, 1)
	frame = prepare_frame(op, [1.0], [0.0], [[1.0]], 0.5, 0.0, eps1=1.0)
	certificate = verify_normal_estimate(op, frame, 0.0)
	assert not certificate.eps1_guard_ok
	assert not certificate.passed
	assert any('ε₀/8' in note for note in certificate.notes)


def test_search_step1_walks_the_ladders():
	assert search_step1(MongeAmpere(2), [1.0], 1.0) == (0.5, 2.0)
	with pytest.raises(Step1FailureError):
		search_step1(MongeAmpere(2), [-1.0], 0.0)


def test_search_r0():
	assert search_r0(SigmaKRoot(2, 1), [[-1.0]], 0.5) == 1.0
	assert search_r0(MongeAmpere(2), [[-1.0]], 0.5) is None

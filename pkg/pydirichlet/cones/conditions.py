"""Sampled checks of the structural conditions on f: ellipticity, concavity, growth along rays and the family of statements equivalent to it."""

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from .cone import sample_cone

if TYPE_CHECKING:
	from pydirichlet.typedefs import Eigenvalues

	from .operators import OperatorSpec

logger = logging.getLogger(__name__)

RAY_SCALE = 1e8
"""t used in place of t → ∞ along rays"""
GROWTH_FAMILY = (
	'growth_at_infinity',
	'ray_bounded_below',
	'ray_slope_nonnegative',
	'pairing_nonnegative',
	'euler_nonnegative',
	'pairing_positive',
)
"""Checks which are all equivalent to one another for elliptic concave f, so they should pass or fail together"""


@dataclass
class ConditionCheck:
	name: str
	description: str
	passed: bool
	margin: float | None
	"""Smallest sampled value of whatever has to be nonnegative (or positive), None if nothing was sampled"""
	witness: dict[str, Any] | None = None
	informational: bool = False
	"""Reported, but does not count towards ConditionReport.passed"""
	samples: int = 0

	def to_dict(self) -> dict[str, Any]:
		return {
			'name': self.name,
			'description': self.description,
			'status': 'pass' if self.passed else 'fail',
			'margin': self.margin,
			'witness': self.witness,
			'informational': self.informational,
			'samples': self.samples,
		}


@dataclass
class ConditionReport:
	operator: dict[str, Any]
	samples: int
	seed: int | None
	checks: list[ConditionCheck] = field(default_factory=list)

	@property
	def passed(self) -> bool:
		return all(check.passed for check in self.checks if not check.informational)

	@property
	def failures(self) -> list[ConditionCheck]:
		return [check for check in self.checks if not check.passed and not check.informational]

	def __getitem__(self, name: str) -> ConditionCheck:
		for check in self.checks:
			if check.name == name:
				return check
		raise KeyError(name)

	def to_dict(self) -> dict[str, Any]:
		return {
			'operator': self.operator,
			'samples': self.samples,
			'seed': self.seed,
			'status': 'pass' if self.passed else 'fail',
			'checks': [check.to_dict() for check in self.checks],
		}


def _sampled_check(
	name: str,
	description: str,
	values: np.ndarray,
	tolerance: np.ndarray | float,
	witnesses: Mapping[str, np.ndarray],
	*,
	strict: bool = False,
) -> ConditionCheck:
	values = np.where(np.isnan(values), -np.inf, values)
	slack = values if strict else values + tolerance
	ok = slack > 0 if strict else slack >= 0
	worst = int(np.argmin(slack))
	passed = bool(np.all(ok))
	witness = None
	if not passed:
		witness = {key: np.asarray(vectors[worst]).tolist() for key, vectors in witnesses.items()}
		witness['value'] = float(values[worst])
		logger.info('%s failed, witness %s', name, witness)
	return ConditionCheck(name, description, passed, float(np.min(values)), witness, samples=values.size)


def _fd_gradient(op: 'OperatorSpec', lam: np.ndarray) -> np.ndarray:
	step = 1e-4 * op.cone.diagonal_margin(lam)
	step = np.where(np.isfinite(step), step, 1e-4 * (1 + np.linalg.norm(lam, axis=-1)))
	columns = []
	for i in range(lam.shape[-1]):
		offset = np.zeros_like(lam)
		offset[:, i] = step
		columns.append((op.value_unchecked(lam + offset) - op.value_unchecked(lam - offset)) / (2 * step))
	return np.stack(columns, axis=-1)


def check_structural_conditions(
	op: 'OperatorSpec', sample_budget: int = 10_000, seed: int | None = 0
) -> ConditionReport:
	"""Samples Γ and tests everything f is supposed to satisfy. Failures end up in the report with a witness instead of being raised."""
	rng = np.random.default_rng(seed)
	n = op.dimension
	lam = sample_cone(op.cone, sample_budget, rng)
	mu = sample_cone(op.cone, sample_budget, rng)
	f_lam = op.value(lam)
	f_mu = op.value(mu)
	grad = op.gradient(lam)
	pair = {'lambda': lam, 'mu': mu}
	report = ConditionReport(op.parameters(), sample_budget, seed)
	checks = report.checks

	checks.append(
		_sampled_check('ellipticity', 'f_i(λ) > 0 for every i', grad.min(axis=-1), 0.0, {'lambda': lam}, strict=True)
	)
	midpoint_gap = op.value(0.5 * (lam + mu)) - 0.5 * (f_lam + f_mu)
	checks.append(
		_sampled_check(
			'concavity_midpoint',
			'f(½λ + ½μ) ≥ ½f(λ) + ½f(μ)',
			midpoint_gap,
			1e-10 * (1 + np.abs(f_lam) + np.abs(f_mu)),
			pair,
		)
	)
	tangent_gap = np.sum(grad * (mu - lam), axis=-1) - (f_mu - f_lam)
	checks.append(
		_sampled_check('tangent_inequality', 'Σ f_i(λ)(μ_i − λ_i) ≥ f(μ) − f(λ)', tangent_gap, 1e-10, pair)
	)

	fd = _fd_gradient(op, lam)
	scale = np.abs(grad).max(axis=-1)
	relative_error = np.abs(fd - grad).max(axis=-1) / np.where(scale > 0, scale, 1.0)
	checks.append(
		_sampled_check(
			'gradient_consistency',
			'Df agrees with central differences of f to relative 1e-6',
			1e-6 - relative_error,
			0.0,
			{'lambda': lam},
		)
	)

	permutations = np.argsort(rng.random((sample_budget, n)), axis=-1)
	permuted = np.take_along_axis(lam, permutations, axis=-1)
	value_error = np.abs(op.value(permuted) - f_lam) / (1 + np.abs(f_lam))
	gradient_error = np.abs(op.gradient(permuted) - np.take_along_axis(grad, permutations, axis=-1)).max(axis=-1) / (
		1 + scale
	)
	checks.append(
		_sampled_check(
			'permutation_equivariance',
			'f(Pλ) = f(λ) and Df(Pλ) = P·Df(λ)',
			1e-10 - np.maximum(value_error, gradient_error),
			0.0,
			{'lambda': lam, 'permutation': permutations},
		)
	)

	with np.errstate(over='ignore', invalid='ignore'):
		f_far = op.value(RAY_SCALE * lam)
	checks.append(
		_sampled_check('growth_at_infinity', 'lim_{t→∞} f(tλ) > f(μ)', f_far - f_mu, 0.0, pair, strict=True)
	)
	checks.append(
		_sampled_check(
			'ray_bounded_below',
			'lim_{t→∞} f(tλ) > −∞ (f does not decrease along the ray)',
			np.where(np.isfinite(f_far), f_far - f_lam, -np.inf),
			1e-10 * (1 + np.abs(f_lam)),
			{'lambda': lam},
		)
	)
	checks.append(
		_sampled_check(
			'ray_slope_nonnegative',
			'limsup_{t→∞} f(tλ)/t ≥ 0',
			f_far / RAY_SCALE,
			1e-10 * (1 + np.abs(f_lam)),
			{'lambda': lam},
		)
	)
	pairing_terms = grad * mu
	pairing = pairing_terms.sum(axis=-1)
	checks.append(
		_sampled_check(
			'pairing_nonnegative',
			'Σ f_i(λ)μ_i ≥ 0',
			pairing,
			1e-10 * np.abs(pairing_terms).sum(axis=-1),
			pair,
		)
	)
	euler_terms = grad * lam
	checks.append(
		_sampled_check(
			'euler_nonnegative',
			'Σ f_i(λ)λ_i ≥ 0',
			euler_terms.sum(axis=-1),
			1e-10 * np.abs(euler_terms).sum(axis=-1),
			{'lambda': lam},
		)
	)
	checks.append(_sampled_check('pairing_positive', 'Σ f_i(λ)μ_i > 0', pairing, 0.0, pair, strict=True))

	if op.extends_to_closure:
		f_origin = float(op.value(np.zeros(n)))
		checks.append(
			_sampled_check(
				'lower_bound_at_origin',
				'f(λ) ≥ f(0) when f extends continuously to the closure of Γ',
				f_lam - f_origin,
				1e-10 * (1 + np.abs(f_lam)),
				{'lambda': lam},
			)
		)
	else:
		checks.append(
			ConditionCheck(
				'lower_bound_at_origin',
				'f(λ) ≥ f(0), skipped since f does not extend continuously to the closure of Γ',
				passed=True,
				margin=None,
				informational=True,
			)
		)

	checks.append(_partial_uniform_ellipticity(lam, grad))
	checks.append(_growth_family_consistency(checks))
	return report


def _partial_uniform_ellipticity(lam: np.ndarray, grad: np.ndarray) -> ConditionCheck:
	"""θ = min f_j/Σf_i over sampled λ and the entries λ_j ≤ 0; for the positive cone there are none"""
	description = 'f_j(λ) ≥ θ Σ f_i(λ) whenever λ_j ≤ 0'
	ratios = grad / grad.sum(axis=-1, keepdims=True)
	candidates = np.where(lam <= 0, ratios, np.inf)
	count = int(np.count_nonzero(lam <= 0))
	if not count:
		return ConditionCheck('partial_uniform_ellipticity', description, True, None, informational=True)
	flat = int(np.argmin(candidates))
	row = flat // lam.shape[-1]
	theta = float(candidates.flat[flat])
	return ConditionCheck(
		'partial_uniform_ellipticity',
		description,
		theta > 0,
		theta,
		{'lambda': lam[row].tolist(), 'value': theta},
		informational=True,
		samples=count,
	)


def _growth_family_consistency(checks: list[ConditionCheck]) -> ConditionCheck:
	family = [check for check in checks if check.name in GROWTH_FAMILY]
	passing = [check.name for check in family if check.passed]
	failing = [check.name for check in family if not check.passed]
	consistent = not passing or not failing
	witness = None
	if not consistent:
		first_failure = next(check for check in family if not check.passed)
		witness = {'passing': passing, 'failing': failing, 'first_failure': first_failure.witness}
	return ConditionCheck(
		'growth_equivalences',
		'growth at infinity and its equivalent forms agree with each other',
		consistent,
		None,
		witness,
	)


@dataclass(frozen=True)
class ConcavityGap:
	gap: float
	"""Σ f_i(λ)(μ_i − λ_i) − (f(μ) − f(λ)), never negative for concave f"""
	normal_distance: float
	"""|ν_μ − ν_λ|"""
	filter_active: bool
	"""normal_distance ≥ β₀, so the gap is supposed to be bounded away from zero"""
	epsilon_hat: float | None
	"""gap / (1 + Σ f_i(λ)) when the filter is active"""

	def to_dict(self) -> dict[str, Any]:
		return {
			'gap': self.gap,
			'normal_distance': self.normal_distance,
			'filter_active': self.filter_active,
			'epsilon_hat': self.epsilon_hat,
		}


def concavity_gap(op: 'OperatorSpec', lam: 'Eigenvalues', mu: 'Eigenvalues', beta0: float) -> ConcavityGap:
	if beta0 <= 0:
		raise ValueError(f'β₀ must be positive, got {beta0}')
	lam = np.asarray(lam, dtype=float)
	mu = np.asarray(mu, dtype=float)
	grad_lam = op.gradient(lam)
	grad_mu = op.gradient(mu)
	gap = float(np.dot(grad_lam, mu - lam) - (op.value(mu) - op.value(lam)))
	normal_distance = float(
		np.linalg.norm(grad_mu / np.linalg.norm(grad_mu) - grad_lam / np.linalg.norm(grad_lam))
	)
	active = normal_distance >= beta0
	epsilon_hat = gap / (1 + float(grad_lam.sum())) if active else None
	return ConcavityGap(gap, normal_distance, active, epsilon_hat)


def estimate_concavity_epsilon(
	op: 'OperatorSpec', lam: 'Eigenvalues', mu: 'Eigenvalues', beta0: float
) -> float | None:
	"""Smallest ε̂ over the (λ, μ) pairs of a sample whose normals differ by at least β₀, None if no pair gets through the filter"""
	lam = np.atleast_2d(np.asarray(lam, dtype=float))
	mu = np.atleast_2d(np.asarray(mu, dtype=float))
	grad_lam = op.gradient(lam)
	grad_mu = op.gradient(mu)
	nu_lam = grad_lam / np.linalg.norm(grad_lam, axis=-1, keepdims=True)
	nu_mu = grad_mu / np.linalg.norm(grad_mu, axis=-1, keepdims=True)
	active = np.linalg.norm(nu_mu - nu_lam, axis=-1) >= beta0
	if not np.any(active):
		return None
	gap = np.sum(grad_lam * (mu - lam), axis=-1) - (op.value(mu) - op.value(lam))
	return float(np.min(gap[active] / (1 + grad_lam[active].sum(axis=-1))))

"""Symmetric functions f on cones, with gradients and boundary suprema. The zoo is what configs can ask for by name."""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import ConeViolationError
from pydirichlet.utils import extended_real_to_json

from .cone import ConeSpec, GardingCone, elementary_symmetric, elementary_symmetric_deleted, membership_tolerance

if TYPE_CHECKING:
	from pydirichlet.typedefs import Eigenvalues, FloatArray

logger = logging.getLogger(__name__)

BOUNDARY_STEPS = (1e-6, 1e-12)
"""Relative step sizes into Γ used when sup_∂Γ f has no closed form"""


@dataclass(frozen=True)
class BoundarySupremum:
	"""sup over λ₀ ∈ ∂Γ of limsup_{λ→λ₀} f(λ), which may well be −∞"""

	value: float
	analytic: bool
	"""False if this was estimated by sampling ∂Γ"""

	@property
	def is_finite(self) -> bool:
		return math.isfinite(self.value)

	def to_dict(self) -> dict[str, Any]:
		return {'value': extended_real_to_json(self.value), 'analytic': self.analytic}


class OperatorSpec(ABC):
	"""A symmetric function f: Γ → ℝ. Subclasses implement _value and _gradient on stacks of λ that are already known to be in Γ̄."""

	name: str
	cone: ConeSpec
	extends_to_closure: bool = True
	"""f extends continuously to Γ̄ (so f(0) makes sense)"""

	@property
	def dimension(self) -> int:
		return self.cone.dimension

	@abstractmethod
	def _value(self, lam: np.ndarray) -> np.ndarray: ...

	@abstractmethod
	def _gradient(self, lam: np.ndarray) -> np.ndarray: ...

	def analytic_boundary_supremum(self) -> float | None:
		"""Known value of sup_∂Γ f, or None if it has to be sampled"""
		return None

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'n': self.dimension}

	def _require(self, lam: 'Eigenvalues', *, interior: bool) -> np.ndarray:
		lam = np.asarray(lam, dtype=float)
		if lam.shape[-1] != self.dimension:
			raise ValueError(f'{self.name} expects λ of length {self.dimension}, got {lam.shape[-1]}')
		distance = self.cone.signed_distance(lam)
		tolerance = membership_tolerance(lam)
		bad = distance <= tolerance if interior else distance < -tolerance
		if np.any(bad):
			flat_bad = np.flatnonzero(bad)
			first = flat_bad[0]
			offender = lam.reshape(-1, self.dimension)[first]
			where = 'Γ' if interior else 'the closure of Γ'
			raise ConeViolationError(
				f'λ = {offender.tolist()} is not in {where} for {self.name} ({flat_bad.size} offending)',
				offender,
				int(first) if lam.ndim > 1 else None,
			)
		return lam

	def value(self, lam: 'Eigenvalues') -> 'FloatArray':
		return self._value(self._require(lam, interior=False))

	def gradient(self, lam: 'Eigenvalues') -> 'FloatArray':
		return self._gradient(self._require(lam, interior=True))

	def value_unchecked(self, lam: 'Eigenvalues') -> 'FloatArray':
		"""f without the membership check, for callers that have already masked out bad nodes"""
		return self._value(np.asarray(lam, dtype=float))

	def gradient_unchecked(self, lam: 'Eigenvalues') -> 'FloatArray':
		return self._gradient(np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class SigmaKRoot(OperatorSpec):
	"""f = σ_k^{1/k} on Γ_k"""

	n: int
	k: int
	name: str = 'sigma_k'

	def __post_init__(self):
		if not 1 <= self.k <= self.n:
			raise ValueError(f'sigma_k needs 1 ≤ k ≤ n, got k={self.k}, n={self.n}')

	@property
	def cone(self) -> ConeSpec:  # type: ignore[override]
		return GardingCone(self.n, self.k)

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'n': self.n, 'k': self.k}

	def analytic_boundary_supremum(self) -> float:
		return 0.0

	def _value(self, lam: np.ndarray) -> np.ndarray:
		sigma = elementary_symmetric(lam, self.k)[..., self.k]
		return np.maximum(sigma, 0.0) ** (1.0 / self.k)

	def _gradient(self, lam: np.ndarray) -> np.ndarray:
		if self.k == 1:
			return np.ones_like(lam)
		sigma_k = elementary_symmetric(lam, self.k)[..., self.k]
		deleted = elementary_symmetric_deleted(lam, self.k - 1)[..., self.k - 1]
		return (sigma_k ** (1.0 / self.k - 1.0) / self.k)[..., None] * deleted


class MongeAmpere(SigmaKRoot):
	"""f = (Π λ_i)^{1/n} on the positive cone"""

	def __init__(self, n: int):
		super().__init__(n, n, 'monge_ampere')

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'n': self.n}

	def _value(self, lam: np.ndarray) -> np.ndarray:
		return np.prod(np.maximum(lam, 0.0), axis=-1) ** (1.0 / self.n)

	def _gradient(self, lam: np.ndarray) -> np.ndarray:
		return self._value(lam)[..., None] / (self.n * lam)


@dataclass(frozen=True)
class LogSigmaN(OperatorSpec):
	"""f = log σ_n on the positive cone, which goes to −∞ at the boundary"""

	n: int
	name: str = 'log_sigma_n'
	extends_to_closure: bool = False

	@property
	def cone(self) -> ConeSpec:  # type: ignore[override]
		return GardingCone(self.n, self.n)

	def analytic_boundary_supremum(self) -> float:
		return -math.inf

	def _value(self, lam: np.ndarray) -> np.ndarray:
		with np.errstate(divide='ignore'):
			return np.log(np.maximum(lam, 0.0)).sum(axis=-1)

	def _gradient(self, lam: np.ndarray) -> np.ndarray:
		return 1.0 / lam


@dataclass(frozen=True)
class SigmaQuotient(OperatorSpec):
	"""f = (σ_k / σ_l)^{1/(k−l)} on Γ_k, for 0 ≤ l < k ≤ n"""

	n: int
	k: int
	l: int  # noqa: E741
	name: str = 'sigma_quotient'

	def __post_init__(self):
		if not 0 <= self.l < self.k <= self.n:
			raise ValueError(f'sigma_quotient needs 0 ≤ l < k ≤ n, got k={self.k}, l={self.l}, n={self.n}')

	@property
	def cone(self) -> ConeSpec:  # type: ignore[override]
		return GardingCone(self.n, self.k)

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'n': self.n, 'k': self.k, 'l': self.l}

	def analytic_boundary_supremum(self) -> float:
		return 0.0

	def _value(self, lam: np.ndarray) -> np.ndarray:
		sigma = elementary_symmetric(lam, self.k)
		numerator = np.maximum(sigma[..., self.k], 0.0)
		denominator = sigma[..., self.l]
		safe = np.where(denominator > 0, denominator, 1.0)
		return np.where(denominator > 0, (numerator / safe) ** (1.0 / (self.k - self.l)), 0.0)

	def _gradient(self, lam: np.ndarray) -> np.ndarray:
		sigma = elementary_symmetric(lam, self.k)
		deleted = elementary_symmetric_deleted(lam, self.k)
		sigma_k, sigma_l = sigma[..., self.k], sigma[..., self.l]
		d_sigma_k = deleted[..., self.k - 1]
		d_sigma_l = deleted[..., self.l - 1] if self.l > 0 else np.zeros_like(lam)
		quotient = sigma_k / sigma_l
		d_quotient = (d_sigma_k * sigma_l[..., None] - sigma_k[..., None] * d_sigma_l) / (sigma_l**2)[..., None]
		power = 1.0 / (self.k - self.l)
		return (power * quotient ** (power - 1.0))[..., None] * d_quotient


@dataclass(frozen=True)
class NonMonotone(OperatorSpec):
	"""f(λ) = λ_1 − λ_2 on the positive cone. Fails ellipticity on purpose, it exists to make the condition checks fail."""

	n: int = 2
	name: str = 'non_monotone'

	@property
	def cone(self) -> ConeSpec:  # type: ignore[override]
		return GardingCone(self.n, self.n)

	def _value(self, lam: np.ndarray) -> np.ndarray:
		return lam[..., 0] - lam[..., 1]

	def _gradient(self, lam: np.ndarray) -> np.ndarray:
		gradient = np.zeros_like(lam)
		gradient[..., 0] = 1.0
		gradient[..., 1] = -1.0
		return gradient


OPERATOR_ZOO: dict[str, Callable[..., OperatorSpec]] = {
	'sigma_k': SigmaKRoot,
	'monge_ampere': MongeAmpere,
	'log_sigma_n': LogSigmaN,
	'sigma_quotient': SigmaQuotient,
	'non_monotone': NonMonotone,
}


def make_operator(name: str, **params: int) -> OperatorSpec:
	try:
		constructor = OPERATOR_ZOO[name]
	except KeyError:
		raise ValueError(f'Unknown operator {name!r}, the zoo has: {", ".join(OPERATOR_ZOO)}') from None
	return constructor(**params)


def f_eval(op: OperatorSpec, lam: 'Eigenvalues') -> 'FloatArray':
	"""f(λ) for λ ∈ Γ̄; on ∂Γ this is the boundary limit (so −∞ for log σ_n)"""
	return op.value(lam)


def f_grad(op: OperatorSpec, lam: 'Eigenvalues') -> 'FloatArray':
	return op.gradient(lam)


def unit_normal(op: OperatorSpec, lam: 'Eigenvalues') -> 'FloatArray':
	"""ν_λ = Df(λ)/|Df(λ)|"""
	gradient = op.gradient(lam)
	return gradient / np.linalg.norm(gradient, axis=-1, keepdims=True)


@dataclass(frozen=True)
class BoundaryProbe:
	"""How the sampled estimate of sup_∂Γ f was reached"""

	samples: int
	divergent: int = 0
	points: list[list[float]] = field(default_factory=list)


def estimate_boundary_supremum(
	op: OperatorSpec, rng: np.random.Generator, samples: int = 256
) -> tuple[BoundarySupremum, BoundaryProbe]:
	"""Samples ∂Γ and steps into Γ from each point along the diagonal, which points inward for every cone containing Γ_n.
	Steps are τ(1 + |λ|) for τ in BOUNDARY_STEPS. If f falls by more than 1 between the two steps at every point, the supremum is −∞."""
	from .cone import sample_cone_boundary  # noqa: PLC0415

	boundary = sample_cone_boundary(op.cone, samples, rng)
	scale = 1 + np.linalg.norm(boundary, axis=-1, keepdims=True)
	near, nearer = (op.value_unchecked(boundary + tau * scale) for tau in BOUNDARY_STEPS)
	divergent = (nearer - near) < -1.0
	probe = BoundaryProbe(samples, int(divergent.sum()), boundary[:3].tolist())
	if np.all(divergent):
		return BoundarySupremum(-math.inf, analytic=False), probe
	return BoundarySupremum(float(np.max(nearer[~divergent])), analytic=False), probe


def sup_boundary_f(op: OperatorSpec, rng: np.random.Generator | None = None) -> BoundarySupremum:
	analytic = op.analytic_boundary_supremum()
	if analytic is not None:
		return BoundarySupremum(analytic, analytic=True)
	supremum, probe = estimate_boundary_supremum(op, rng or np.random.default_rng(0))
	logger.info(
		'No closed form for sup_∂Γ f of %s, sampled %d boundary points: %s', op.name, probe.samples, supremum.value
	)
	return supremum

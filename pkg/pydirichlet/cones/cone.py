"""Cones Γ ⊂ ℝⁿ that are open, convex, symmetric under permutations, have their vertex at the origin and contain the positive cone.

Everything here works on stacks of λ: the last axis is the n eigenvalues, anything before it is a batch."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from math import comb
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
	from pydirichlet.typedefs import Eigenvalues, FloatArray

logger = logging.getLogger(__name__)

MEMBERSHIP_TOLERANCE = 1e-12
"""Interior iff the signed distance is more than this times (1 + |λ|)"""
PROJECTION_LIFT = 1e8
"""Γ_∞ membership appends λ_n = PROJECTION_LIFT·(1 + |λ′|)"""


class Membership(StrEnum):
	Interior = 'interior'
	Boundary = 'boundary'
	Outside = 'outside'


@dataclass(frozen=True)
class MembershipResult:
	membership: Membership
	distance: float
	"""Signed distance to ∂Γ, negative outside"""

	@property
	def in_closure(self) -> bool:
		return self.membership != Membership.Outside

	def to_dict(self) -> dict[str, Any]:
		return {'membership': str(self.membership), 'distance': self.distance}


def membership_tolerance(lam: 'Eigenvalues') -> 'FloatArray':
	return MEMBERSHIP_TOLERANCE * (1 + np.linalg.norm(lam, axis=-1))


def elementary_symmetric(lam: 'Eigenvalues', k: int) -> 'FloatArray':
	"""σ_0(λ), …, σ_k(λ) along a new last axis"""
	lam = np.asarray(lam, dtype=float)
	out = np.zeros((*lam.shape[:-1], k + 1))
	out[..., 0] = 1.0
	for i in range(lam.shape[-1]):
		x = lam[..., i]
		for j in range(min(i + 1, k), 0, -1):
			out[..., j] += x * out[..., j - 1]
	return out


def elementary_symmetric_deleted(lam: 'Eigenvalues', k: int) -> 'FloatArray':
	"""σ_j(λ|i), i.e. σ_j of λ with the i-th entry removed, shape (..., n, k + 1)"""
	lam = np.asarray(lam, dtype=float)
	return np.stack(
		[elementary_symmetric(np.delete(lam, i, axis=-1), k) for i in range(lam.shape[-1])],
		axis=-2,
	)


class ConeSpec(ABC):
	"""A cone is known by its dimension and by how far λ can be pushed down the diagonal before it leaves Γ̄."""

	dimension: int
	name: str = 'cone'

	@abstractmethod
	def diagonal_margin(self, lam: 'Eigenvalues') -> 'FloatArray':
		"""sup{s : λ − s·1 ∈ Γ̄}, which is positive inside, zero on ∂Γ and negative outside.

		Since Γ̄ + Γ_n ⊂ Γ̄, the Euclidean distance to ∂Γ lies between |margin| and √n·|margin|."""

	def signed_distance(self, lam: 'Eigenvalues') -> 'FloatArray':
		"""Euclidean distance to ∂Γ, negative outside. Subclasses override this where the distance has a closed form, otherwise the diagonal margin stands in for it."""
		return self.diagonal_margin(lam)

	def parameters(self) -> dict[str, Any]:
		return {'name': self.name, 'dimension': self.dimension}

	def _check_shape(self, lam: 'Eigenvalues') -> np.ndarray:
		lam = np.asarray(lam, dtype=float)
		if lam.shape[-1] != self.dimension:
			raise ValueError(f'{self.name} lives in dimension {self.dimension}, got λ of length {lam.shape[-1]}')
		return lam

	def interior_mask(self, lam: 'Eigenvalues') -> np.ndarray:
		lam = self._check_shape(lam)
		return self.signed_distance(lam) > membership_tolerance(lam)

	def closure_mask(self, lam: 'Eigenvalues') -> np.ndarray:
		lam = self._check_shape(lam)
		return self.signed_distance(lam) >= -membership_tolerance(lam)

	def classify(self, lam: 'Eigenvalues') -> MembershipResult:
		lam = self._check_shape(lam)
		if lam.ndim != 1:
			raise ValueError('classify takes a single λ, use interior_mask/closure_mask for stacks')
		distance = float(self.signed_distance(lam))
		tolerance = float(membership_tolerance(lam))
		if distance > tolerance:
			membership = Membership.Interior
		elif distance >= -tolerance:
			membership = Membership.Boundary
		else:
			membership = Membership.Outside
		return MembershipResult(membership, distance)


@dataclass(frozen=True)
class GardingCone(ConeSpec):
	"""Γ_k = {λ : σ_1(λ) > 0, …, σ_k(λ) > 0}. Γ_1 is a half space, Γ_n the positive cone."""

	dimension: int
	order: int

	def __post_init__(self):
		if self.dimension < 1 or not 1 <= self.order <= self.dimension:
			raise ValueError(f'Γ_k needs 1 ≤ k ≤ n, got n={self.dimension}, k={self.order}')

	@property
	def name(self) -> str:  # type: ignore[override]
		if self.order == self.dimension:
			return 'positive'
		return f'garding_{self.order}'

	def parameters(self) -> dict[str, Any]:
		return {'name': 'garding', 'dimension': self.dimension, 'order': self.order}

	def diagonal_margin(self, lam: 'Eigenvalues') -> 'FloatArray':
		lam = self._check_shape(lam)
		n, k = self.dimension, self.order
		if k == 1:
			return lam.sum(axis=-1) / n
		if k == n:
			return lam.min(axis=-1)
		# σ_k(λ − t·1) = Σ_j (−t)^j C(n−k+j, j) σ_{k−j}(λ) is hyperbolic in the direction 1, so its roots are real and Γ_k is where they are all positive
		sigma = elementary_symmetric(lam, k)
		coefficients = np.stack(
			[(-1) ** j * comb(n - k + j, j) * sigma[..., k - j] for j in range(k + 1)], axis=-1
		)
		monic = coefficients[..., :-1] / coefficients[..., -1:]
		companion = np.zeros((*lam.shape[:-1], k, k))
		companion[..., np.arange(1, k), np.arange(k - 1)] = 1.0
		companion[..., :, k - 1] = -monic
		roots = np.linalg.eigvals(companion)
		return roots.real.min(axis=-1)

	def signed_distance(self, lam: 'Eigenvalues') -> 'FloatArray':
		lam = self._check_shape(lam)
		n, k = self.dimension, self.order
		if k == 1:
			return lam.sum(axis=-1) / np.sqrt(n)
		if k == n:
			smallest = lam.min(axis=-1)
			outside = -np.linalg.norm(np.minimum(lam, 0.0), axis=-1)
			return np.where(smallest > 0, smallest, outside)
		return self.diagonal_margin(lam)


@dataclass(frozen=True)
class WholeSpace(ConeSpec):
	"""ℝⁿ itself, which is what projecting Γ_1 gives"""

	dimension: int
	name = 'whole_space'

	def diagonal_margin(self, lam: 'Eigenvalues') -> 'FloatArray':
		lam = self._check_shape(lam)
		return np.full(lam.shape[:-1], np.inf)


@dataclass(frozen=True)
class ProjectedCone(ConeSpec):
	"""Γ_∞ = {λ′ ∈ ℝ^{n−1} : (λ′, λ_n) ∈ Γ for some λ_n}, decided by lifting λ′ with a large last entry.

	Works for any base cone by bisection; geometry.gamma_infinity hands back closed forms where they are known."""

	base: ConeSpec
	iterations: int = 200

	@property
	def dimension(self) -> int:  # type: ignore[override]
		return self.base.dimension - 1

	@property
	def name(self) -> str:  # type: ignore[override]
		return f'projected_{self.base.name}'

	def parameters(self) -> dict[str, Any]:
		return {'name': 'projected', 'base': self.base.parameters()}

	def _lift(self, lam: np.ndarray, shift: np.ndarray, lift: np.ndarray) -> np.ndarray:
		return np.concatenate([lam - shift[:, None], lift[:, None]], axis=-1)

	def diagonal_margin(self, lam: 'Eigenvalues') -> 'FloatArray':
		lam = self._check_shape(lam)
		flat = lam.reshape(-1, self.dimension)
		lift = PROJECTION_LIFT * (1 + np.linalg.norm(flat, axis=-1))
		low = flat.min(axis=-1) - 1.0
		high = flat.max(axis=-1) + 2 * lift
		unbounded = self.base.diagonal_margin(self._lift(flat, high, lift)) >= 0
		for _ in range(self.iterations):
			middle = 0.5 * (low + high)
			inside = self.base.diagonal_margin(self._lift(flat, middle, lift)) >= 0
			low = np.where(inside, middle, low)
			high = np.where(inside, high, middle)
		margin = np.where(unbounded, np.inf, 0.5 * (low + high))
		return margin.reshape(lam.shape[:-1])


def cone_contains(cone: ConeSpec, lam: 'Eigenvalues') -> MembershipResult:
	"""Interior, boundary (within tolerance) or outside, with the signed distance"""
	return cone.classify(lam)


def sample_cone(cone: ConeSpec, count: int, rng: np.random.Generator) -> 'FloatArray':
	"""Random points of Γ with magnitudes spread over two decades, each at least a small positive margin inside"""
	n = cone.dimension
	scale = 10 ** rng.uniform(-1, 1, size=count)
	z = rng.normal(size=(count, n)) * scale[:, None]
	margin = cone.diagonal_margin(z)
	margin = np.where(np.isfinite(margin), margin, 0.0)
	shift = np.maximum(0.0, -margin) + rng.uniform(0.05, 1.0, size=count) * scale
	return z + shift[:, None]


def sample_cone_boundary(cone: ConeSpec, count: int, rng: np.random.Generator) -> 'FloatArray':
	"""Random points of ∂Γ, found by sliding random vectors along the diagonal"""
	z = rng.normal(size=(count, cone.dimension)) * (10 ** rng.uniform(-1, 1, size=count))[:, None]
	margin = cone.diagonal_margin(z)
	if not np.all(np.isfinite(margin)):
		raise ValueError(f'{cone.name} has no boundary to sample')
	return z - margin[:, None]

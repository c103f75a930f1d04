"""The matrices used to bound the double normal derivative at a boundary point, and the certificate that the bound holds there.

Everything is written in an adapted frame at one boundary point: indices 1…n−1 are tangential (with the subsolution's tangential block diagonal), index n is the inward normal."""

import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import InvalidFrameError, Step1FailureError

from .bordered import BorderedMatrix, border_localize

if TYPE_CHECKING:
	from pydirichlet.cones import OperatorSpec
	from pydirichlet.typedefs import FloatArray

logger = logging.getLogger(__name__)

EPSILON0_LADDER = tuple(2.0**-i for i in range(31))
R0_LADDER = tuple(2.0**i for i in range(61))
R0_SMALL_LADDER = tuple(2.0**i for i in range(-20, 41))
"""Candidates for r₀, smallest first"""


@dataclass(frozen=True)
class BoundaryFrameData:
	tangential: tuple[float, ...]
	"""Diagonal of the subsolution's tangential block 𝔤̲_αα"""
	mixed: tuple[float, ...]
	"""Mixed entries 𝔤_αn of the solution"""
	sigma_hessian: tuple[tuple[float, ...], ...]
	"""∇_αβσ, tangential block of the Hessian of the boundary distance"""
	normal_gap: float
	"""∇_n(u − ū), nonnegative by the maximum principle"""
	eps0: float
	r0_big: float
	"""R₀"""
	eps1: float
	r0: float
	r0_found: bool = True
	"""False if no r₀ on the ladder puts B + ε₁I(r₀/ε₁) in Γ (the boundary does not satisfy the cone condition), in which case r₀ = 0"""

	@property
	def n(self) -> int:
		return len(self.tangential) + 1

	def to_dict(self) -> dict[str, Any]:
		return {
			'tangential': list(self.tangential),
			'mixed': list(self.mixed),
			'sigma_hessian': [list(row) for row in self.sigma_hessian],
			'normal_gap': self.normal_gap,
			'eps0': self.eps0,
			'R0': self.r0_big,
			'eps1': self.eps1,
			'r0': self.r0,
			'r0_found': self.r0_found,
		}


def identity_scaled(n: int, r: float) -> 'FloatArray':
	"""I(r): identity with r in the corner"""
	matrix = np.eye(n)
	matrix[-1, -1] = r
	return matrix


def lower_matrix(b: BoundaryFrameData, r: float) -> 'FloatArray':
	"""A̲(R): subsolution tangential diagonal, solution mixed entries in the border, R in the corner"""
	n = b.n
	matrix = np.zeros((n, n))
	matrix[np.arange(n - 1), np.arange(n - 1)] = b.tangential
	matrix[:-1, -1] = b.mixed
	matrix[-1, :-1] = b.mixed
	matrix[-1, -1] = r
	return matrix


def full_matrix(b: BoundaryFrameData, r: float) -> 'FloatArray':
	"""A(R): the solution's own tangential block 𝔤̲_αβ + ∇_n(u − ū)∇_αβσ, mixed entries, R in the corner"""
	matrix = lower_matrix(b, r)
	matrix[:-1, :-1] += b.normal_gap * np.asarray(b.sigma_hessian, dtype=float)
	return matrix


def sigma_matrix(b: BoundaryFrameData) -> 'FloatArray':
	"""B: ∇_αβσ padded with a zero row and column"""
	n = b.n
	matrix = np.zeros((n, n))
	matrix[:-1, :-1] = b.sigma_hessian
	return matrix


def shifted_lower_matrix(b: BoundaryFrameData, r: float) -> 'FloatArray':
	"""H̲(R) = A̲(R) − ε₁∇_n(u − ū)·I(r₀/ε₁)"""
	return lower_matrix(b, r) - b.eps1 * b.normal_gap * identity_scaled(b.n, b.r0 / b.eps1)


def _in_cone(op: 'OperatorSpec', lam: np.ndarray) -> bool:
	return bool(op.cone.interior_mask(lam))


def search_step1(op: 'OperatorSpec', tangential: 'FloatArray', psi: float) -> tuple[float, float]:
	"""(ε₀, R₀) with (𝔤̲_11 − ε₀, …, 𝔤̲_(n−1)(n−1) − ε₀, R₀) ∈ Γ and f of it ≥ ψ.
	ε₀ is halved from 1, and for each ε₀ R₀ doubles from 1."""
	tangential = np.asarray(tangential, dtype=float)
	for eps0 in EPSILON0_LADDER:
		for r0_big in R0_LADDER:
			lam = np.append(tangential - eps0, r0_big)
			if _in_cone(op, lam) and float(op.value(lam)) >= psi:
				return eps0, r0_big
	raise Step1FailureError(
		f'No (ε₀, R₀) on the search ladder works for tangential entries {tangential.tolist()} and ψ = {psi}'
	)


def search_r0(op: 'OperatorSpec', sigma_hessian: 'FloatArray', eps1: float) -> float | None:
	"""Smallest r₀ on the ladder with B + ε₁I(r₀/ε₁) ∈ Γ, None if there is none"""
	sigma_hessian = np.atleast_2d(np.asarray(sigma_hessian, dtype=float))
	tangential = np.linalg.eigvalsh(sigma_hessian + eps1 * np.eye(sigma_hessian.shape[0]))
	for r0 in R0_SMALL_LADDER:
		if _in_cone(op, np.append(tangential, r0)):
			return r0
	return None


def prepare_frame(
	op: 'OperatorSpec',
	tangential: 'FloatArray',
	mixed: 'FloatArray',
	sigma_hessian: 'FloatArray',
	normal_gap: float,
	psi: float,
	eps1: float | None = None,
) -> BoundaryFrameData:
	"""Runs the (ε₀, R₀) search, picks ε₁ with ε₁∇_n(u − ū) < ε₀/8 unless one is given, and searches for r₀"""
	eps0, r0_big = search_step1(op, tangential, psi)
	if eps1 is None:
		eps1 = eps0 / (16 * (1 + max(normal_gap, 0.0)))
	r0 = search_r0(op, sigma_hessian, eps1)
	if r0 is None:
		logger.debug('No r₀ puts B + ε₁I(r₀/ε₁) in the cone, using r₀ = 0')
	return BoundaryFrameData(
		tuple(np.asarray(tangential, dtype=float).tolist()),
		tuple(np.atleast_1d(np.asarray(mixed, dtype=float)).tolist()),
		tuple(tuple(row) for row in np.atleast_2d(np.asarray(sigma_hessian, dtype=float)).tolist()),
		float(normal_gap),
		eps0,
		r0_big,
		eps1,
		0.0 if r0 is None else r0,
		r0 is not None,
	)


def rc_threshold(b: BoundaryFrameData) -> float:
	"""R_c = 8(2n−3)/ε₀·Σ|𝔤_αn|² + (n−1)Σ(|𝔤̲_αα| + ε₀/8) + (n−2)ε₀/(8(2n−3)) + R₀ + r₀∇_n(u − ū)"""
	if b.normal_gap < 0:
		raise InvalidFrameError(f'∇_n(u − ū) = {b.normal_gap} is negative, the sandwich ū ≤ u must have failed')
	n = b.n
	mixed = np.asarray(b.mixed, dtype=float)
	tangential = np.asarray(b.tangential, dtype=float)
	return float(
		8 * (2 * n - 3) / b.eps0 * np.sum(mixed**2)
		+ (n - 1) * np.sum(np.abs(tangential) + b.eps0 / 8)
		+ (n - 2) * b.eps0 / (8 * (2 * n - 3))
		+ b.r0_big
		+ b.r0 * b.normal_gap
	)


@dataclass
class NormalCertificate:
	frame: BoundaryFrameData
	psi: float
	rc: float
	eps1_guard_ok: bool
	"""ε₁∇_n(u − ū) < ε₀/8"""
	sigma_cone_ok: bool
	"""B + ε₁I(r₀/ε₁) ∈ Γ"""
	shifted_in_cone: bool
	"""λ(H̲(R_c)) ∈ Γ"""
	shifted_value_margin: float
	"""f(λ(H̲(R_c))) − ψ"""
	localization: dict[str, Any]
	localization_ok: bool
	"""Lemma applied to H̲(R_c) with ε = ε₀/8: tangential eigenvalues above 𝔤̲_αα − ε₀/4, the last one at least the corner"""
	comparison_ok: bool | None
	"""f(λ(A(R_c))) ≥ f(λ(H̲(R_c))), None if A(R_c) is not admissible. Only binding when sigma_cone_ok, since A(R_c) − H̲(R_c) lies in Γ̄ exactly then"""
	notes: list[str] = field(default_factory=list)

	@property
	def passed(self) -> bool:
		return (
			self.eps1_guard_ok
			and self.shifted_in_cone
			and self.shifted_value_margin > 0
			and self.localization_ok
			and (self.comparison_ok is not False or not self.sigma_cone_ok)
		)

	def to_dict(self) -> dict[str, Any]:
		return {
			'status': 'pass' if self.passed else 'fail',
			'frame': self.frame.to_dict(),
			'psi': self.psi,
			'R_c': self.rc,
			'eps1_guard_ok': self.eps1_guard_ok,
			'sigma_cone_ok': self.sigma_cone_ok,
			'shifted_in_cone': self.shifted_in_cone,
			'shifted_value_margin': self.shifted_value_margin,
			'localization_ok': self.localization_ok,
			'localization': self.localization,
			'comparison_ok': self.comparison_ok,
			'notes': self.notes,
		}


def verify_normal_estimate(op: 'OperatorSpec', b: BoundaryFrameData, psi_val: float) -> NormalCertificate:
	"""Assembles H̲(R_c) and checks that it is admissible with f above ψ, and that its eigenvalues localize as the bordered matrix lemma says they should."""
	notes = []
	tangential = np.asarray(b.tangential, dtype=float)
	step1 = np.append(tangential - b.eps0, b.r0_big)
	if not (_in_cone(op, step1) and float(op.value(step1)) >= psi_val):
		eps0, r0_big = search_step1(op, tangential, psi_val)
		notes.append(f'(ε₀, R₀) = ({b.eps0}, {b.r0_big}) did not work, searched again and got ({eps0}, {r0_big})')
		b = replace(b, eps0=eps0, r0_big=r0_big)

	rc = rc_threshold(b)
	eps1_guard_ok = b.eps1 * b.normal_gap < b.eps0 / 8
	if not eps1_guard_ok:
		notes.append(f'ε₁∇_n(u − ū) = {b.eps1 * b.normal_gap} is not below ε₀/8 = {b.eps0 / 8}')

	sigma_eigenvalues = np.linalg.eigvalsh(sigma_matrix(b) + b.eps1 * identity_scaled(b.n, b.r0 / b.eps1))
	sigma_cone_ok = _in_cone(op, sigma_eigenvalues)
	if not sigma_cone_ok:
		notes.append('B + ε₁I(r₀/ε₁) is not in the cone, the boundary cone condition does not hold here')

	shifted = shifted_lower_matrix(b, rc)
	shifted_eigenvalues = np.linalg.eigvalsh(shifted)
	shifted_in_cone = _in_cone(op, shifted_eigenvalues)
	shifted_value_margin = float(op.value_unchecked(shifted_eigenvalues)) - psi_val if shifted_in_cone else -np.inf

	localization = border_localize(
		BorderedMatrix(
			tuple(np.diag(shifted)[:-1].tolist()), tuple(shifted[:-1, -1].tolist()), float(shifted[-1, -1]), b.eps0 / 8
		),
		assert_bounds=False,
	)
	localization_ok = (
		localization.passed
		and bool(np.all(np.sort(localization.eigenvalues[:-1]) > np.sort(tangential) - b.eps0 / 4))
		and localization.largest >= float(shifted[-1, -1]) - 1e-10 * (1 + abs(rc))
	)
	if not shifted_in_cone:
		notes.append(f'λ(H̲(R_c)) = {shifted_eigenvalues.tolist()} is not in the cone')

	comparison_ok = None
	full_eigenvalues = np.linalg.eigvalsh(full_matrix(b, rc))
	if _in_cone(op, full_eigenvalues) and shifted_in_cone:
		comparison_ok = float(op.value(full_eigenvalues)) >= float(op.value(shifted_eigenvalues)) - 1e-10 * (1 + rc)
	else:
		notes.append('A(R_c) is not admissible, skipped the comparison with H̲(R_c)')

	return NormalCertificate(
		b,
		psi_val,
		rc,
		eps1_guard_ok,
		sigma_cone_ok,
		shifted_in_cone,
		shifted_value_margin,
		localization.to_dict(),
		localization_ok,
		comparison_ok,
		notes,
	)

"""The barrier for the mixed second derivatives, evaluated on the collar Ω_δ around a boundary node x₀.

Ψ̃ = A₁√b₁(ū − u) − A₂√b₁ρ² + A₃√b₁(Nσ² − tσ) + (1/√b₁)Σ_τ|∇_τw|² + 𝒯w with w = u − φ,
where 𝒯w = ±(∇_αw − η∇_nw) and η = ∇_ασ/∇_nσ. The frame vectors E_a are those of x₀, held constant over the collar.
A parameter choice works if Ψ̃ ≤ 0 all over the collar, and Ψ̃(x₀) = 0 holds up to discretization."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import CollarTooSmallError, InvalidAnchorError
from pydirichlet.geometry import boundary_distance, covariant_hessian, gradient, gradient_norm

from .estimates import compute_beta0
from .frames import boundary_frames

if TYPE_CHECKING:
	from collections.abc import Iterator

	from pydirichlet.geometry import BoundaryGeometry
	from pydirichlet.solver import ChartProblem
	from pydirichlet.typedefs import GridField, NodeIndex

logger = logging.getLogger(__name__)

MIN_COLLAR_NODES = 3
A3_LADDER = (2.0, 10.0, 100.0)
STEP_LADDER = (10.0, 100.0)
"""A₂/A₃ and A₁/A₂"""
N_LADDER = (10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class BarrierParams:
	a1: float
	a2: float
	a3: float
	n: float
	t: float
	delta: float
	b1: float
	"""1 + sup|∇u|²"""
	beta0: float

	def __post_init__(self):
		if self.n * self.delta - self.t > 0:
			raise ValueError(f'Need Nδ ≤ t, got N = {self.n}, δ = {self.delta}, t = {self.t}')

	@property
	def ordered(self) -> bool:
		"""A₁ > A₂ > A₃ > 1"""
		return self.a1 > self.a2 > self.a3 > 1

	def to_dict(self) -> dict[str, Any]:
		return {
			'A1': self.a1,
			'A2': self.a2,
			'A3': self.a3,
			'N': self.n,
			't': self.t,
			'delta': self.delta,
			'b1': self.b1,
			'beta0': self.beta0,
			'ordered': self.ordered,
		}


@dataclass(frozen=True, eq=False)
class _BarrierTerms:
	"""Each piece of Ψ̃ over the collar nodes, before the constants are applied"""

	lower: np.ndarray
	"""√b₁(ū − u)"""
	rho_squared: np.ndarray
	"""√b₁ρ²"""
	sigma: np.ndarray
	"""√b₁σ"""
	sigma_squared: np.ndarray
	"""√b₁σ²"""
	fixed: np.ndarray
	"""(1/√b₁)Σ_τ|∇_τw|² + 𝒯w"""

	def value(self, params: BarrierParams) -> np.ndarray:
		return (
			params.a1 * self.lower
			- params.a2 * self.rho_squared
			+ params.a3 * (params.n * self.sigma_squared - params.t * self.sigma)
			+ self.fixed
		)


@dataclass(frozen=True, eq=False)
class BarrierProbe:
	anchor: int
	delta: float
	collar_nodes: np.ndarray = field(repr=False)
	params: BarrierParams
	"""First ladder entry with Ψ̃ ≤ 0 on the collar (the best one if none works), or the one given"""
	holds: bool
	max_value: float
	"""max Ψ̃ over the collar without x₀"""
	anchor_value: float
	"""Ψ̃(x₀)"""
	boundary_identity_residual: float
	"""max |𝒯w| over the boundary nodes of the collar, where it should vanish"""
	collar_gradient_ok: bool
	tried: int
	values: np.ndarray = field(repr=False)
	"""Ψ̃ on every grid node, NaN outside the collar"""

	def to_dict(self) -> dict[str, Any]:
		return {
			'status': 'pass' if self.holds else 'fail',
			'anchor': self.anchor,
			'delta': self.delta,
			'collar_nodes': int(self.collar_nodes.size),
			'params': self.params.to_dict(),
			'max_value': self.max_value,
			'anchor_value': self.anchor_value,
			'boundary_identity_residual': self.boundary_identity_residual,
			'collar_gradient_ok': self.collar_gradient_ok,
			'ladder_entries_tried': self.tried,
		}


def barrier_ladder(delta: float, b1: float, beta0: float) -> 'Iterator[BarrierParams]':
	"""A₃ first, then A₂, A₁ and N, smallest values first; t is always Nδ"""
	for a3, step2, step1, n in itertools.product(A3_LADDER, STEP_LADDER, STEP_LADDER, N_LADDER):
		a2 = step2 * a3
		yield BarrierParams(step1 * a2, a2, a3, n, n * delta, delta, b1, beta0)


def _barrier_terms(
	problem: 'ChartProblem', u: np.ndarray, geometry: 'BoundaryGeometry', anchor: int, collar: np.ndarray
) -> tuple[_BarrierTerms, np.ndarray, float]:
	grid, metric = problem.grid, problem.metric
	sub_hessian = covariant_hessian(problem.subsolution, metric, grid)
	frames = boundary_frames(geometry, sub_hessian + metric.chi, np.asarray([anchor]))
	if not frames.nodes.size:
		raise InvalidAnchorError(f'Subsolution Hessian is not finite at anchor node {anchor}', anchor)
	frame = frames.vectors[0]

	b1 = 1 + float(np.nanmax(gradient_norm(u, metric, grid))) ** 2
	root = np.sqrt(b1)
	dw = gradient(u - problem.phi, grid)[collar] @ frame
	dsigma = geometry.sigma_gradient[collar] @ frame
	eta = np.divide(
		dsigma[:, :-1], dsigma[:, -1:], out=np.full_like(dsigma[:, :-1], np.nan), where=dsigma[:, -1:] != 0
	)
	twist = np.max(np.abs(dw[:, :-1] - eta * dw[:, -1:]), axis=-1)
	sigma = geometry.sigma[collar]
	terms = _BarrierTerms(
		root * (problem.subsolution[collar] - u[collar]),
		root * geometry.rho(anchor)[collar] ** 2,
		root * sigma,
		root * sigma**2,
		np.sum(dw[:, :-1] ** 2, axis=-1) / root + twist,
	)
	return terms, twist, b1


def barrier_probe(
	problem: 'ChartProblem',
	u: 'GridField',
	anchor: 'NodeIndex',
	delta: float,
	params: BarrierParams | None = None,
) -> BarrierProbe:
	"""Evaluates Ψ̃ on Ω_δ around the boundary node anchor. Without params, walks the ladder and keeps the first entry that works."""
	grid = problem.grid
	anchor = int(anchor)
	if anchor not in set(grid.boundary_nodes.tolist()):
		raise InvalidAnchorError(f'Node {anchor} is not a boundary node', anchor)
	geometry = boundary_distance(grid, problem.metric)
	mask = geometry.collar(anchor, delta)
	collar = np.flatnonzero(mask)
	if collar.size < MIN_COLLAR_NODES:
		raise CollarTooSmallError(f'Collar of radius {delta} around node {anchor} holds {collar.size} nodes')

	terms, twist, b1 = _barrier_terms(problem, np.asarray(u, dtype=float), geometry, anchor, collar)
	others = collar != anchor
	on_boundary = np.isin(collar, grid.boundary_nodes)
	residual = float(np.nanmax(twist[on_boundary], initial=0.0))

	candidates = [params] if params is not None else list(barrier_ladder(delta, b1, compute_beta0(problem)))
	best, best_max, tried = candidates[0], np.inf, 0
	for candidate in candidates:
		tried += 1
		worst = float(np.nanmax(terms.value(candidate)[others]))
		if worst < best_max:
			best, best_max = candidate, worst
		if worst <= 0:
			break

	holds = best_max <= 0
	psi = terms.value(best)
	values = np.full(grid.size, np.nan)
	values[collar] = psi
	if holds:
		logger.debug('Barrier at node %d holds with %s', anchor, best)
	else:
		logger.info('No barrier ladder entry keeps Ψ̃ ≤ 0 around node %d, best max %g', anchor, best_max)
	return BarrierProbe(
		anchor,
		delta,
		collar,
		best,
		holds,
		best_max,
		float(psi[~others][0]),
		residual,
		geometry.collar_gradient_ok(mask),
		tried,
		values,
	)

"""Exceptions raised by the lab. Each one knows which exit code family the command line maps it to."""

from collections.abc import Sequence
from enum import IntEnum
from typing import Any


class ExitCode(IntEnum):
	OK = 0
	Config = 2
	Solver = 3
	ConditionFailed = 4
	IO = 5


class LabError(Exception):
	"""Base class for everything the lab raises on purpose"""

	code: str = 'LAB_ERROR'
	exit_code: ExitCode = ExitCode.Solver

	def to_dict(self) -> dict[str, Any]:
		return {'code': self.code, 'message': str(self)}


class ConeViolationError(LabError, ValueError):
	"""λ is not in the closure of the cone (or an iterate stopped being admissible at some node)"""

	code = 'CONE_VIOLATION'

	def __init__(self, message: str, eigenvalues: Sequence[float] | None = None, node: int | None = None):
		super().__init__(message)
		self.eigenvalues = None if eigenvalues is None else [float(x) for x in eigenvalues]
		self.node = node

	def to_dict(self) -> dict[str, Any]:
		return {**super().to_dict(), 'eigenvalues': self.eigenvalues, 'node': self.node}


class MetricNotSPDError(LabError, ValueError):
	code = 'METRIC_NOT_SPD'
	exit_code = ExitCode.Config

	def __init__(self, message: str, node: int | None = None):
		super().__init__(message)
		self.node = node


class NonpositiveEpsilonError(LabError, ValueError):
	code = 'NONPOSITIVE_EPSILON'
	exit_code = ExitCode.Config


class GrowthConditionUnmetError(LabError, ValueError):
	"""Corner entry is below the quadratic growth threshold, so the bordered matrix lemma does not apply"""

	code = 'GROWTH_CONDITION_UNMET'
	exit_code = ExitCode.ConditionFailed

	def __init__(self, message: str, corner: float, threshold: float):
		super().__init__(message)
		self.corner = corner
		self.threshold = threshold


class InvalidFrameError(LabError, ValueError):
	code = 'INVALID_FRAME'
	exit_code = ExitCode.ConditionFailed


class Step1FailureError(LabError, RuntimeError):
	"""No (ε₀, R₀) pair on the search ladder puts the shifted tangential eigenvalues in the cone above ψ"""

	code = 'STEP1_FAILURE'
	exit_code = ExitCode.ConditionFailed


class StencilOutOfDomainError(LabError, ValueError):
	code = 'STENCIL_OUT_OF_DOMAIN'

	def __init__(self, message: str, nodes: Sequence[int] = ()):
		super().__init__(message)
		self.nodes = list(nodes)


class UnsupportedDomainError(LabError, ValueError):
	code = 'UNSUPPORTED_DOMAIN'
	exit_code = ExitCode.Config


class LinearSolveError(LabError, RuntimeError):
	code = 'LINEAR_SOLVE_FAILURE'


class NonellipticNodeError(LabError, RuntimeError):
	code = 'NONELLIPTIC_NODE'

	def __init__(self, message: str, node: int):
		super().__init__(message)
		self.node = node

	def to_dict(self) -> dict[str, Any]:
		return {**super().to_dict(), 'node': self.node}


class StepCollapseError(LabError, RuntimeError):
	"""Backtracking could not find an admissible step that decreases the residual"""

	code = 'STEP_COLLAPSE'

	def __init__(self, message: str, step: float, worst_node: int | None):
		super().__init__(message)
		self.step = step
		self.worst_node = worst_node

	def to_dict(self) -> dict[str, Any]:
		return {**super().to_dict(), 'step': self.step, 'worst_node': self.worst_node}


class MaxIterationsError(LabError, RuntimeError):
	code = 'MAX_ITERATIONS'

	def __init__(self, message: str, residual: float):
		super().__init__(message)
		self.residual = residual

	def to_dict(self) -> dict[str, Any]:
		return {**super().to_dict(), 'residual': self.residual}


class ScheduleTooAggressiveError(LabError, ValueError):
	code = 'SCHEDULE_TOO_AGGRESSIVE'
	exit_code = ExitCode.Config

	def __init__(self, message: str, epsilon: float, margin: float):
		super().__init__(message)
		self.epsilon = epsilon
		self.margin = margin

	def to_dict(self) -> dict[str, Any]:
		return {**super().to_dict(), 'epsilon': self.epsilon, 'margin': self.margin}


class InfiniteBoundarySupremumError(LabError, ValueError):
	"""sup over ∂Γ of f is not finite, so ψ_ε = max(ψ, sup + ε) means nothing"""

	code = 'INFINITE_BOUNDARY_SUPREMUM'
	exit_code = ExitCode.Config


class InsufficientLevelsError(LabError, ValueError):
	code = 'INSUFFICIENT_LEVELS'
	exit_code = ExitCode.ConditionFailed


class CollarTooSmallError(LabError, ValueError):
	code = 'COLLAR_TOO_SMALL'
	exit_code = ExitCode.ConditionFailed


class InvalidAnchorError(LabError, ValueError):
	"""The barrier anchor has to be a boundary node"""

	code = 'INVALID_ANCHOR'
	exit_code = ExitCode.Config

	def __init__(self, message: str, node: int):
		super().__init__(message)
		self.node = node

	def to_dict(self) -> dict[str, Any]:
		return {**super().to_dict(), 'node': self.node}


class FrameDegenerateError(LabError, ValueError):
	code = 'FRAME_DEGENERATE'
	exit_code = ExitCode.ConditionFailed

	def __init__(self, message: str, node: int):
		super().__init__(message)
		self.node = node


class ConfigParseError(LabError, ValueError):
	code = 'PARSE_ERROR'
	exit_code = ExitCode.Config


class ConfigValidationError(LabError, ValueError):
	"""Every validation problem found in a config, not just the first one"""

	code = 'VALIDATION_ERROR'
	exit_code = ExitCode.Config

	def __init__(self, errors: Sequence[tuple[str, str]]):
		self.errors = list(errors)
		super().__init__('\n'.join(f'{path}: {message}' for path, message in self.errors))

	def to_dict(self) -> dict[str, Any]:
		return {
			'code': self.code,
			'errors': [{'field': path, 'message': message} for path, message in self.errors],
		}


class OutputError(LabError, OSError):
	code = 'IO_ERROR'
	exit_code = ExitCode.IO

"""Run configuration: TOML text validated into pydantic models. Unknown keys are errors, and every error is reported at once with its dotted path."""

import logging
import tomllib
from pathlib import Path
from typing import Annotated, Any, Literal

import pydantic

from pydirichlet.errors import ConfigParseError, ConfigValidationError
from pydirichlet.solver import ContinuationSchedule, geometric_schedule

logger = logging.getLogger(__name__)

Command = Literal['solve', 'continuation', 'poisson-h', 'check-cone', 'lemma-border', 'diagnose']

NEEDS_PROBLEM: frozenset[str] = frozenset({'solve', 'continuation', 'poisson-h', 'diagnose'})


class _Strict(pydantic.BaseModel):
	model_config = pydantic.ConfigDict(extra='forbid', frozen=True)


# Domains


class DiskConfig(_Strict):
	name: Literal['disk']
	radius: pydantic.PositiveFloat = 1.0
	resolution: int = pydantic.Field(default=16, ge=2)
	chart: Literal['polar', 'cartesian'] = 'polar'
	n: int = pydantic.Field(default=2, ge=2)


class AnnulusConfig(_Strict):
	name: Literal['annulus']
	inner: pydantic.PositiveFloat = 0.5
	outer: pydantic.PositiveFloat = 1.0
	resolution: int = pydantic.Field(default=16, ge=2)


class RectangleConfig(_Strict):
	name: Literal['rectangle']
	lower: tuple[float, ...] = (0.0, 0.0)
	upper: tuple[float, ...] = (1.0, 1.0)
	shape: tuple[int, ...] = (17, 17)
	periodic: tuple[bool, ...] = (False, False)


class RoundedSquareConfig(_Strict):
	name: Literal['rounded_square']
	half_side: pydantic.PositiveFloat = 1.0
	corner_radius: pydantic.PositiveFloat = 0.25
	resolution: int = pydantic.Field(default=16, ge=2)


DomainConfig = Annotated[
	DiskConfig | AnnulusConfig | RectangleConfig | RoundedSquareConfig, pydantic.Field(discriminator='name')
]

# Metrics and χ


class EuclideanMetricConfig(_Strict):
	name: Literal['euclidean'] = 'euclidean'


class ConformalMetricConfig(_Strict):
	name: Literal['conformal']
	strength: float = 0.1
	"""c in g = e^{2c|x|²}δ"""


MetricConfig = Annotated[EuclideanMetricConfig | ConformalMetricConfig, pydantic.Field(discriminator='name')]


class ChiConfig(_Strict):
	name: Literal['zero', 'metric'] = 'zero'
	scale: float = 1.0
	"""c in χ = c·g, for the metric preset"""


# Operators


class SigmaKConfig(_Strict):
	name: Literal['sigma_k']
	n: int = pydantic.Field(ge=1)
	k: int = pydantic.Field(ge=1)

	@pydantic.model_validator(mode='after')
	def _order(self):
		if self.k > self.n:
			raise ValueError(f'k = {self.k} cannot exceed n = {self.n}')
		return self


class MongeAmpereConfig(_Strict):
	name: Literal['monge_ampere']
	n: int = pydantic.Field(ge=1)


class LogSigmaNConfig(_Strict):
	name: Literal['log_sigma_n']
	n: int = pydantic.Field(ge=1)


class SigmaQuotientConfig(_Strict):
	name: Literal['sigma_quotient']
	n: int = pydantic.Field(ge=1)
	k: int = pydantic.Field(ge=1)
	l: int = pydantic.Field(ge=0)  # noqa: E741

	@pydantic.model_validator(mode='after')
	def _order(self):
		if not self.l < self.k <= self.n:
			raise ValueError(f'Need 0 ≤ l < k ≤ n, got n = {self.n}, k = {self.k}, l = {self.l}')
		return self


class NonMonotoneConfig(_Strict):
	name: Literal['non_monotone']
	n: int = pydantic.Field(default=2, ge=2)


OperatorConfig = Annotated[
	SigmaKConfig | MongeAmpereConfig | LogSigmaNConfig | SigmaQuotientConfig | NonMonotoneConfig,
	pydantic.Field(discriminator='name'),
]

# Expressions for ψ, φ, ū and the exact solution


class ConstantConfig(_Strict):
	name: Literal['constant']
	c: float = 0.0


class AffineConfig(_Strict):
	name: Literal['affine']
	c: float = 0.0
	b: tuple[float, ...] = ()


class QuadraticConfig(_Strict):
	name: Literal['quadratic']
	a: float = 1.0
	c: float = 0.0


class QuadraticFormConfig(_Strict):
	name: Literal['quadratic_form']
	q: tuple[tuple[float, ...], ...] = ((1.0, 0.0), (0.0, 1.0))
	b: tuple[float, ...] = ()
	c: float = 0.0


class RadialPowerConfig(_Strict):
	name: Literal['radial_power']
	a: float = 1.0
	p: float = 2.0
	c: float = 0.0


class RadialExpConfig(_Strict):
	name: Literal['radial_exp']
	c: float = 1.0
	s: float = 1.0
	d: float = 0.0


class CsvConfig(_Strict):
	name: Literal['csv']
	path: Path


ClosedFormConfig = Annotated[
	ConstantConfig
	| AffineConfig
	| QuadraticConfig
	| QuadraticFormConfig
	| RadialPowerConfig
	| RadialExpConfig
	| CsvConfig,
	pydantic.Field(discriminator='name'),
]


class ManufacturedConfig(_Strict):
	"""ψ = f(λ(∇²u + χ)) for the given closed-form u, which then is the exact solution"""

	name: Literal['manufactured']
	solution: ClosedFormConfig


ExpressionConfig = Annotated[
	ConstantConfig
	| AffineConfig
	| QuadraticConfig
	| QuadraticFormConfig
	| RadialPowerConfig
	| RadialExpConfig
	| CsvConfig
	| ManufacturedConfig,
	pydantic.Field(discriminator='name'),
]


class ProblemConfig(_Strict):
	domain: DomainConfig
	metric: MetricConfig = EuclideanMetricConfig()
	chi: ChiConfig = ChiConfig()
	operator: OperatorConfig
	psi: ExpressionConfig
	phi: ClosedFormConfig
	subsolution: ClosedFormConfig | None = None
	"""The ball generator is used when this is left out"""
	exact: ClosedFormConfig | None = None
	"""Compared against in reports. A manufactured ψ supplies its own"""
	strict: bool = True

	def csv_paths(self) -> list[Path]:
		"""Files behind every csv expression, each once"""
		expressions = [self.psi, self.phi, self.subsolution, self.exact]
		if isinstance(self.psi, ManufacturedConfig):
			expressions.append(self.psi.solution)
		return list(dict.fromkeys(e.path for e in expressions if isinstance(e, CsvConfig)))


class SolverConfig(_Strict):
	tolerance: pydantic.PositiveFloat = 1e-8
	max_iterations: int = pydantic.Field(default=50, ge=1)
	damping: float = pydantic.Field(default=1.0, gt=0, le=1)
	linear_solver: Literal['direct', 'gmres'] | None = None
	"""Falls back to the PYDIRICHLET_LINEAR_SOLVER setting"""
	linear_tolerance: pydantic.PositiveFloat = 1e-10


class ScheduleConfig(_Strict):
	"""Either explicit epsilons, or epsilon0 with levels and ratio. Neither means half the subsolution margin, halving"""

	epsilons: tuple[float, ...] | None = None
	epsilon0: pydantic.PositiveFloat | None = None
	levels: int = pydantic.Field(default=8, ge=1)
	ratio: float = pydantic.Field(default=0.5, gt=0, lt=1)
	tolerance: pydantic.PositiveFloat | None = None

	@pydantic.model_validator(mode='after')
	def _check_schedule(self):
		if self.epsilons is not None and self.epsilon0 is not None:
			raise ValueError('Give either epsilons or epsilon0, not both')
		# ContinuationSchedule has the positivity and ordering checks
		self.to_schedule()
		return self

	def to_schedule(self) -> ContinuationSchedule | None:
		if self.epsilons is not None:
			return ContinuationSchedule(self.epsilons, self.tolerance)
		if self.epsilon0 is not None:
			schedule = geometric_schedule(self.epsilon0, self.levels, self.ratio)
			return ContinuationSchedule(schedule.epsilons, self.tolerance)
		return None


class LemmaConfig(_Strict):
	d: tuple[float, ...]
	a: tuple[float, ...]
	epsilon: float
	"""Checked by the bordered matrix itself, so a nonpositive ε comes back as its own error"""
	corner: float | None = None
	"""Defaults to the threshold"""
	fuzz: int = pydantic.Field(default=0, ge=0)
	"""Random instances to check on top, with the order drawn from 2 … max_order"""
	max_order: int = pydantic.Field(default=8, ge=2)

	@pydantic.model_validator(mode='after')
	def _lengths(self):
		if len(self.d) != len(self.a):
			raise ValueError(f'd and a need the same length, got {len(self.d)} and {len(self.a)}')
		return self


class DiagnosticsConfig(_Strict):
	max_nodes: int = pydantic.Field(default=32, ge=1)
	"""Boundary nodes sampled by the normal estimate audit"""
	sandwich_tolerance: pydantic.PositiveFloat | None = None
	"""Defaults to 10 times the solver tolerance"""
	barrier_delta: pydantic.PositiveFloat | None = None
	"""Collar radius for the barrier probe, which is skipped without one"""
	barrier_anchor: int | None = None
	"""Boundary node to probe around, the first one by default"""


class RunConfig(_Strict):
	config_version: Literal[1]
	command: Command
	problem: ProblemConfig | None = None
	operator: OperatorConfig | None = None
	"""For check-cone without a problem"""
	solver: SolverConfig = SolverConfig()
	schedule: ScheduleConfig | None = None
	lemma: LemmaConfig | None = None
	diagnostics: DiagnosticsConfig = DiagnosticsConfig()
	output_dir: Path | None = None
	seed: int | None = None
	samples: int | None = pydantic.Field(default=None, ge=10)
	"""Sample budget for the structural condition checks"""

	@pydantic.model_validator(mode='after')
	def _command_inputs(self):
		if self.command in NEEDS_PROBLEM and self.problem is None:
			raise ValueError(f'{self.command} needs a [problem] block')
		if self.command == 'check-cone' and self.problem is None and self.operator is None:
			raise ValueError('check-cone needs an [operator] or a [problem] block')
		if self.command == 'lemma-border' and self.lemma is None:
			raise ValueError('lemma-border needs a [lemma] block')
		return self

	@property
	def operator_config(self) -> 'OperatorConfig':
		if self.operator is not None:
			return self.operator
		assert self.problem is not None
		return self.problem.operator


def _error_path(location: tuple[int | str, ...]) -> str:
	return '.'.join(str(part) for part in location) or '<root>'


def validate_config(data: dict[str, Any]) -> RunConfig:
	try:
		return RunConfig.model_validate(data)
	except pydantic.ValidationError as ex:
		raise ConfigValidationError([(_error_path(error['loc']), error['msg']) for error in ex.errors()]) from None


def parse_config(text: str) -> RunConfig:
	"""TOML text to a validated RunConfig, or ConfigParseError (with the line) or ConfigValidationError (with every problem found)"""
	try:
		data = tomllib.loads(text)
	except tomllib.TOMLDecodeError as ex:
		raise ConfigParseError(f'Config is not valid TOML: {ex}') from ex
	config = validate_config(data)
	logger.debug('Parsed %s config', config.command)
	return config


def read_config(path: Path) -> RunConfig:
	try:
		text = path.read_text(encoding='utf-8')
	except UnicodeDecodeError as ex:
		raise ConfigParseError(f'{path} is not UTF-8: {ex}') from ex
	return parse_config(text)


def config_to_dict(config: RunConfig) -> dict[str, Any]:
	"""What the manifest echoes; validate_config takes it back"""
	return config.model_dump(mode='json', exclude_none=True)

import logging
from pathlib import Path
from typing import Literal

import pydantic
import pydantic_settings

logger = logging.getLogger(__name__)

type LinearSolverKind = Literal['direct', 'gmres']


class LabSettings(pydantic_settings.BaseSettings):
	"""Process-wide defaults, read from PYDIRICHLET_* environment variables. Anything set in a run config or on the command line wins over these."""

	model_config = pydantic_settings.SettingsConfigDict(env_prefix='PYDIRICHLET_')

	output_dir: Path = Path('out')
	"""Where run artifacts go if neither the config nor --out says otherwise"""
	seed: int = 0
	"""Seed for sampled checks (structural conditions, bordered matrix fuzzing)"""
	threads: int = pydantic.Field(default=1, ge=1)
	"""Worker threads for node-parallel eigen decompositions"""
	log_level: str = 'INFO'
	linear_solver: LinearSolverKind = 'direct'
	"""Default linear solver inside Newton and the Poisson solve"""
	sample_budget: int = pydantic.Field(default=10_000, ge=10)
	"""Number of sampled λ (and λ, μ pairs) per structural condition"""

	@classmethod
	def from_environment(cls, **overrides):
		"""Reads the environment, then applies whatever overrides are not None. Overrides are validated like everything else."""
		instance = cls(**{key: value for key, value in overrides.items() if value is not None})
		logger.debug('Settings: %s', instance)
		return instance

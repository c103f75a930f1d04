"""Batch front end: configs in, manifest.json, report.json and fields.csv out."""

from .config import (
	DiagnosticsConfig,
	LemmaConfig,
	ProblemConfig,
	RunConfig,
	ScheduleConfig,
	SolverConfig,
	config_to_dict,
	parse_config,
	read_config,
	validate_config,
)
from .output import emit_fields, emit_fields_async, load_manifest, write_artifacts, write_artifacts_async
from .runner import (
	CommandOutcome,
	execute,
	load_csv_fields_async,
	problem_from_config,
	resolve_config,
	run,
	run_async,
	solver_options,
)

__all__ = [
	'CommandOutcome',
	'DiagnosticsConfig',
	'LemmaConfig',
	'ProblemConfig',
	'RunConfig',
	'ScheduleConfig',
	'SolverConfig',
	'config_to_dict',
	'emit_fields',
	'emit_fields_async',
	'execute',
	'load_csv_fields_async',
	'load_manifest',
	'parse_config',
	'problem_from_config',
	'read_config',
	'resolve_config',
	'run',
	'run_async',
	'solver_options',
	'validate_config',
	'write_artifacts',
	'write_artifacts_async',
]

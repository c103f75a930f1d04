"""Run artifacts: manifest.json, report.json and fields.csv in the output directory"""

import asyncio
import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from pydirichlet.errors import ConfigParseError, OutputError
from pydirichlet.geometry import fields_to_csv
from pydirichlet.utils import dump_json, write_text_async

from .config import RunConfig, validate_config

if TYPE_CHECKING:
	from collections.abc import Mapping

	from pydirichlet.geometry import ChartGrid
	from pydirichlet.solver import SolutionField

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
REPORT_NAME = 'report.json'
FIELDS_NAME = 'fields.csv'


def solution_fields(solution: 'SolutionField', extra: 'Mapping[str, np.ndarray] | None' = None) -> dict[str, np.ndarray]:
	"""u, the eigenvalues of 𝔤 in ascending order as lambda_1 … lambda_n, then the residual, then whatever else"""
	return {'u': solution.u, 'lambda': solution.eigenvalues, 'residual': solution.residual, **(extra or {})}


def _write(path: Path, text: str):
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(text, encoding='utf-8', newline='')
	except OSError as ex:
		raise OutputError(f'Cannot write {path}: {ex}') from ex


async def _write_async(path: Path, text: str):
	try:
		await write_text_async(path, text)
	except OSError as ex:
		raise OutputError(f'Cannot write {path}: {ex}') from ex


def emit_fields(
	grid: 'ChartGrid',
	solution: 'SolutionField',
	path: Path,
	extra: 'Mapping[str, np.ndarray] | None' = None,
) -> Path:
	"""One CSV row per grid node, interior and boundary alike"""
	_write(path, fields_to_csv(grid, solution_fields(solution, extra)))
	return path


async def emit_fields_async(
	grid: 'ChartGrid',
	solution: 'SolutionField',
	path: Path,
	extra: 'Mapping[str, np.ndarray] | None' = None,
) -> Path:
	text = await asyncio.to_thread(fields_to_csv, grid, solution_fields(solution, extra))
	await _write_async(path, text)
	return path


def write_artifacts(
	out_dir: Path, manifest: dict[str, Any], report: dict[str, Any], fields: str | None = None
) -> list[Path]:
	written = [out_dir / MANIFEST_NAME, out_dir / REPORT_NAME]
	_write(written[0], dump_json(manifest))
	_write(written[1], dump_json(report))
	if fields is not None:
		written.append(out_dir / FIELDS_NAME)
		_write(written[2], fields)
	logger.info('Wrote %s', ', '.join(str(path) for path in written))
	return written


async def write_artifacts_async(
	out_dir: Path, manifest: dict[str, Any], report: dict[str, Any], fields: str | None = None
) -> list[Path]:
	jobs = {out_dir / MANIFEST_NAME: dump_json(manifest), out_dir / REPORT_NAME: dump_json(report)}
	if fields is not None:
		jobs[out_dir / FIELDS_NAME] = fields
	await asyncio.gather(*(_write_async(path, text) for path, text in jobs.items()))
	logger.info('Wrote %s', ', '.join(str(path) for path in jobs))
	return list(jobs)


def load_manifest(path: Path) -> RunConfig:
	"""The config a previous run was made with, ready to run again"""
	if path.is_dir():
		path = path / MANIFEST_NAME
	try:
		manifest = json.loads(path.read_text(encoding='utf-8'))
	except json.JSONDecodeError as ex:
		raise ConfigParseError(f'{path} is not valid JSON: {ex}') from ex
	except OSError as ex:
		raise OutputError(f'Cannot read {path}: {ex}') from ex
	return validate_config(manifest['config'])

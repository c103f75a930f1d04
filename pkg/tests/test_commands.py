import asyncio
import json

import numpy as np
import pydantic
import pytest
from numpy.testing import assert_allclose

from pydirichlet.__main__ import main
from pydirichlet.commands import (
	config_to_dict,
	emit_fields,
	emit_fields_async,
	execute,
	load_csv_fields_async,
	load_manifest,
	parse_config,
	problem_from_config,
	run,
	run_async,
	validate_config,
)
from pydirichlet.errors import ConfigParseError, ConfigValidationError, ExitCode
from pydirichlet.geometry import Disk
from pydirichlet.settings import LabSettings
from pydirichlet.solver import newton_solve, read_csv_field, read_csv_field_async

PROBLEM = """
[problem.domain]
name = "disk"
resolution = 8

[problem.operator]
name = "monge_ampere"
n = 2

[problem.psi]
name = "constant"
c = 1.0

[problem.phi]
name = "constant"
c = 0.5

[problem.exact]
name = "quadratic"
a = 1.0
"""


def _config(command, body=PROBLEM, **top):
	header = '\n'.join(f'{key} = {json.dumps(value)}' for key, value in {'config_version': 1, 'command': command, **top}.items())
	return parse_config(f'{header}\n{body}')


def _run(config, out):
	return run(config.model_copy(update={'output_dir': out}), LabSettings(output_dir=out))


def _report(out):
	return json.loads((out / 'report.json').read_text(encoding='utf-8'))


def test_parse_minimal_config():
	config = _config('solve', seed=3)
	assert config.command == 'solve'
	assert config.seed == 3
	assert config.problem.operator.name == 'monge_ampere'
	assert config.solver.tolerance == 1e-8
	assert validate_config(config_to_dict(config)) == config


def test_misspelled_operator_points_at_its_path():
	with pytest.raises(ConfigValidationError) as info:
		_config('solve', PROBLEM.replace('monge_ampere', 'monge_ampre'))
	assert any(path.startswith('problem.operator') for path, _ in info.value.errors)


def test_unknown_keys_are_rejected():
	with pytest.raises(ConfigValidationError) as info:
		_config('solve', PROBLEM + '\n[solver]\ntolerence = 1e-6\n')
	assert any('tolerence' in path for path, _ in info.value.errors)


def test_schedule_must_decrease():
	with pytest.raises(ConfigValidationError) as info:
		_config('continuation', PROBLEM + '\n[schedule]\nepsilons = [0.1, 0.2]\n')
	assert any('schedule must decrease' in message for _, message in info.value.errors)


def test_commands_check_their_inputs():
	with pytest.raises(ConfigValidationError):
		_config('solve', '')
	with pytest.raises(ConfigValidationError):
		_config('lemma-border', '')
	with pytest.raises(ConfigParseError):
		parse_config('config_version = 1\ncommand = "solve\n')


def test_problem_from_config():
	problem = problem_from_config(_config('solve').problem)
	assert problem.grid.shape == (9, 32)
	assert problem.description['subsolution']['curvature'] == 2.0
	assert problem.exact is not None


def test_solve_writes_artifacts(tmp_path):
	assert _run(_config('solve', seed=3), tmp_path) == ExitCode.OK
	report = _report(tmp_path)
	assert report['command'] == 'solve'
	assert report['status'] == 'ok'
	assert report['exit_code'] == 0
	assert report['seed'] == 3
	assert report['max_error'] < 1e-6
	assert report['solution']['converged']
	lines = (tmp_path / 'fields.csv').read_text(encoding='utf-8').splitlines()
	assert lines[0].startswith('x1,x2,u,lambda_1,lambda_2,residual,exact,error')
	assert len(lines) == 9 * 32 + 1


def test_report_is_reproducible(tmp_path):
	config = _config('solve', seed=7)
	_run(config, tmp_path / 'first')
	_run(config, tmp_path / 'second')
	first = (tmp_path / 'first' / 'report.json').read_bytes()
	assert first == (tmp_path / 'second' / 'report.json').read_bytes()


def test_manifest_round_trip(tmp_path):
	config = _config('poisson-h', seed=1)
	assert _run(config, tmp_path) == ExitCode.OK
	loaded = load_manifest(tmp_path)
	assert loaded.command == 'poisson-h'
	assert loaded.seed == 1
	assert loaded.problem == config.problem
	assert _report(tmp_path)['max'] == pytest.approx(0.5)


def test_lemma_border(tmp_path):
	body = '[lemma]\nd = [0.0]\na = [1.0]\nepsilon = 0.5\nfuzz = 200\n'
	assert _run(_config('lemma-border', body, seed=0), tmp_path) == ExitCode.OK
	report = _report(tmp_path)
	assert report['localization']['threshold'] == pytest.approx(2.0)
	assert report['fuzz']['status'] == 'pass'
	assert not (tmp_path / 'fields.csv').exists()


def test_lemma_border_below_threshold_fails(tmp_path):
	body = '[lemma]\nd = [0.0]\na = [1.0]\nepsilon = 0.5\ncorner = 1.0\n'
	assert _run(_config('lemma-border', body), tmp_path) == ExitCode.ConditionFailed
	assert _report(tmp_path)['status'] == 'fail'


def test_check_cone_flags_a_non_monotone_operator(tmp_path):
	body = '[operator]\nname = "non_monotone"\n'
	assert _run(_config('check-cone', body, samples=1000, seed=0), tmp_path) == ExitCode.ConditionFailed
	report = _report(tmp_path)
	assert report['status'] == 'fail'
	assert report['conditions']['status'] == 'fail'


def test_check_cone_with_a_domain(tmp_path):
	body = PROBLEM.replace('monge_ampere', 'sigma_k').replace('n = 2', 'n = 2\nk = 1')
	assert _run(_config('check-cone', body, samples=1000, seed=0), tmp_path) == ExitCode.OK
	report = _report(tmp_path)
	assert report['boundary_cone_condition']['status'] == 'pass'
	assert (tmp_path / 'fields.csv').exists()


def test_continuation_rejects_an_aggressive_schedule(tmp_path):
	config = _config('continuation', PROBLEM + '\n[schedule]\nepsilons = [3.0]\n')
	assert _run(config, tmp_path) == ExitCode.Config
	report = _report(tmp_path)
	assert report['status'] == 'error'
	assert report['error']['code'] == 'SCHEDULE_TOO_AGGRESSIVE'


def test_diagnose(tmp_path):
	config = _config('diagnose', PROBLEM + '\n[diagnostics]\nmax_nodes = 8\nbarrier_delta = 0.4\n')
	assert _run(config, tmp_path) == ExitCode.OK
	report = _report(tmp_path)
	assert report['sandwich']['status'] == 'pass'
	assert report['normal_audit']['status'] == 'pass'
	assert report['global_laplacian']['trace_positive']
	assert 'barrier' in report
	header = (tmp_path / 'fields.csv').read_text(encoding='utf-8').splitlines()[0].split(',')
	assert {'h', 'mixed_ratio', 'normal_ratio', 'barrier'} <= set(header)


def test_execute_does_not_write(tmp_path):
	outcome = execute(_config('solve').model_copy(update={'output_dir': tmp_path}))
	assert outcome.exit_code == ExitCode.OK
	assert outcome.fields is not None
	assert not any(tmp_path.iterdir())


def test_emit_fields(tmp_path):
	config = _config('solve')
	problem = problem_from_config(config.problem)
	solution = newton_solve(problem)
	path = emit_fields(problem.grid, solution, tmp_path / 'nested' / 'fields.csv', {'marker': np.ones(problem.grid.size)})
	lines = path.read_text(encoding='utf-8').splitlines()
	assert len(lines) == problem.grid.size + 1
	assert lines[0].endswith(',marker')


def test_run_async(tmp_path):
	config = _config('solve').model_copy(update={'output_dir': tmp_path})
	assert asyncio.run(run_async(config, LabSettings(output_dir=tmp_path))) == ExitCode.OK
	assert {path.name for path in tmp_path.iterdir()} == {'manifest.json', 'report.json', 'fields.csv'}


def test_main(tmp_path):
	path = tmp_path / 'run.toml'
	path.write_text(f'config_version = 1\ncommand = "solve"\n{PROBLEM}', encoding='utf-8')
	assert main(['--config', str(path), '--out', str(tmp_path / 'out'), '--seed', '5']) == 0
	assert _report(tmp_path / 'out')['seed'] == 5
	assert main(['--config', str(tmp_path / 'missing.toml')]) == ExitCode.IO


def test_main_rejects_bad_settings(tmp_path):
	path = tmp_path / 'run.toml'
	path.write_text(f'config_version = 1\ncommand = "solve"\n{PROBLEM}', encoding='utf-8')
	assert main(['--config', str(path), '--out', str(tmp_path / 'out'), '--threads', '0']) == ExitCode.Config
	assert not (tmp_path / 'out').exists()


def test_settings_overrides_are_validated():
	with pytest.raises(pydantic.ValidationError):
		LabSettings.from_environment(threads=0)
	assert LabSettings.from_environment(threads=3, log_level=None).threads == 3


def test_diagnose_with_an_interior_anchor(tmp_path):
	config = _config('diagnose')
	anchor = int(problem_from_config(config.problem).interior[0])
	body = f'{PROBLEM}\n[diagnostics]\nmax_nodes = 8\nbarrier_delta = 0.4\nbarrier_anchor = {anchor}\n'
	assert _run(_config('diagnose', body), tmp_path) == ExitCode.Config
	report = _report(tmp_path)
	assert report['status'] == 'error'
	assert report['error']['code'] == 'INVALID_ANCHOR'
	assert report['error']['node'] == anchor


def _write_field(path, rows=None):
	"""psi = 1 at every node of the resolution 8 disk, unless other rows are given"""
	if rows is None:
		rows = [f'{x!r},{y!r},{1.0!r}' for x, y in Disk(resolution=8).build_grid().physical.tolist()]
	path.write_text('\n'.join(['x1,x2,value', *rows]) + '\n', encoding='utf-8')
	return path


def _csv_psi(path):
	return PROBLEM.replace('[problem.psi]\nname = "constant"\nc = 1.0', f'[problem.psi]\nname = "csv"\npath = {json.dumps(str(path))}')


def test_solve_with_a_csv_field(tmp_path):
	path = _write_field(tmp_path / 'psi.csv')
	config = _config('solve', _csv_psi(path))
	assert config.problem.csv_paths() == [path]
	assert _run(config, tmp_path / 'out') == ExitCode.OK
	assert _report(tmp_path / 'out')['max_error'] < 1e-6


def test_run_async_reads_csv_fields_up_front(tmp_path):
	path = _write_field(tmp_path / 'psi.csv')
	out = tmp_path / 'out'
	config = _config('solve', _csv_psi(path)).model_copy(update={'output_dir': out})

	async def scenario():
		exit_code = await run_async(config, LabSettings(output_dir=out))
		return exit_code, await read_csv_field_async(path), await load_csv_fields_async(config)

	exit_code, (points, values), preloaded = asyncio.run(scenario())
	assert exit_code == ExitCode.OK
	assert _report(out)['max_error'] < 1e-6
	expected_points, expected_values = read_csv_field(path)
	assert_allclose(points, expected_points)
	assert_allclose(values, expected_values)
	assert list(preloaded) == [path]
	assert_allclose(preloaded[path][1], 1.0)


@pytest.mark.parametrize(
	('rows', 'message'),
	[
		(['0.0,0.0,abc'], 'could not convert'),
		([''], 'at least one row'),
		(['0.0,1.0'], 'expected 3 columns'),
	],
)
def test_malformed_csv_fields_are_config_errors(tmp_path, rows, message):
	path = _write_field(tmp_path / 'psi.csv', rows)
	assert _run(_config('solve', _csv_psi(path)), tmp_path / 'out') == ExitCode.Config
	error = _report(tmp_path / 'out')['error']
	assert error['code'] == 'VALIDATION_ERROR'
	assert any(message in entry['message'] for entry in error['errors'])


def test_emit_fields_async(tmp_path):
	problem = problem_from_config(_config('solve').problem)
	solution = newton_solve(problem)
	path = asyncio.run(emit_fields_async(problem.grid, solution, tmp_path / 'nested' / 'fields.csv'))
	assert path.read_text(encoding='utf-8') == emit_fields(problem.grid, solution, tmp_path / 'sync.csv').read_text(
		encoding='utf-8'
	)
	assert path.read_text(encoding='utf-8').splitlines()[0].startswith('x1,x2,u,lambda_1,lambda_2,residual')


@pytest.mark.parametrize(
	('old', 'new', 'message'),
	[
		('name = "disk"\nresolution = 8', 'name = "annulus"\ninner = 1.0\nouter = 0.5', 'inner < outer'),
		('name = "monge_ampere"\nn = 2', 'name = "monge_ampere"\nn = 3', '3-dimensional'),
	],
)
def test_problems_the_builders_reject_are_config_errors(tmp_path, old, new, message):
	config = _config('solve', PROBLEM.replace(old, new))
	with pytest.raises(ConfigValidationError, match=message):
		problem_from_config(config.problem)
	assert _run(config, tmp_path) == ExitCode.Config
	assert _report(tmp_path)['error']['errors'][0]['field'] == 'problem'

import argparse
import logging
import sys
from pathlib import Path

import pydantic

from pydirichlet.commands import read_config, resolve_config, run
from pydirichlet.errors import ExitCode, LabError
from pydirichlet.settings import LabSettings
from pydirichlet.utils import set_thread_count

logger = logging.getLogger('pydirichlet')


def main(argv: list[str] | None = None) -> int:
	parser = argparse.ArgumentParser(
		prog='pydirichlet', description='Solve and audit Dirichlet problems for fully nonlinear elliptic equations'
	)
	parser.add_argument('--config', type=Path, required=True, help='TOML run config')
	parser.add_argument('--out', type=Path, help='Output directory, overrides the config')
	parser.add_argument('--seed', type=int, help='Seed for sampled checks, overrides the config')
	parser.add_argument('--threads', type=int, help='Worker threads for per-node eigen decompositions')
	parser.add_argument('--log-level', help='Logging level, such as DEBUG or WARNING')
	args = parser.parse_args(argv)

	try:
		settings = LabSettings.from_environment(threads=args.threads, log_level=args.log_level)
	except pydantic.ValidationError as ex:
		logger.error('Bad settings: %s', ex)
		return ExitCode.Config
	logging.basicConfig(level=settings.log_level.upper(), format='%(levelname)s %(name)s: %(message)s')
	set_thread_count(settings.threads)

	try:
		config = read_config(args.config)
	except OSError as ex:
		logger.error('Cannot read %s: %s', args.config, ex)
		return ExitCode.IO
	except LabError as ex:
		logger.error('%s', ex)
		return ex.exit_code
	return run(resolve_config(config, settings, out_dir=args.out, seed=args.seed), settings)


if __name__ == '__main__':
	sys.exit(main())

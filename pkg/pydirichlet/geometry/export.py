"""Node fields as CSV text, one row per node with its physical coordinates first"""

import csv
import io
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
	from collections.abc import Mapping

	from .grid import ChartGrid


def format_value(value) -> str:
	if isinstance(value, (bool, np.bool_)):
		return '1' if value else '0'
	value = float(value)
	if np.isnan(value):
		return 'nan'
	if np.isinf(value):
		return 'inf' if value > 0 else '-inf'
	return repr(value)


def fields_to_csv(grid: 'ChartGrid', fields: 'Mapping[str, np.ndarray]') -> str:
	"""One row per node: physical coordinates x1…xn, then each field. Vector fields get one column per component, suffixed _1, _2, …"""
	header = [f'x{i + 1}' for i in range(grid.dimension)]
	columns = [grid.physical[:, i] for i in range(grid.dimension)]
	for name, values in fields.items():
		values = np.asarray(values)
		if values.ndim == 1:
			header.append(name)
			columns.append(values)
		else:
			for i in range(values.shape[1]):
				header.append(f'{name}_{i + 1}')
				columns.append(values[:, i])
	buffer = io.StringIO()
	writer = csv.writer(buffer, lineterminator='\r\n')
	writer.writerow(header)
	for row in zip(*columns, strict=True):
		writer.writerow([format_value(v) for v in row])
	return buffer.getvalue()

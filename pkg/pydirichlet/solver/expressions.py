"""The fixed catalogue of closed-form fields that ψ, φ, ū and exact solutions can be built from. Everything takes Cartesian points of shape (nodes, n)."""

import asyncio
import csv
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cache
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from async_lru import alru_cache

from pydirichlet.errors import ConfigValidationError, OutputError

if TYPE_CHECKING:
	from collections.abc import Sequence

	from pydirichlet.cones import OperatorSpec
	from pydirichlet.typedefs import FloatArray

logger = logging.getLogger(__name__)

CSV_MATCH_DECIMALS = 9
"""Coordinates in a CSV field are matched to nodes after rounding to this many decimals"""


class Expression(ABC):
	name: str

	@abstractmethod
	def value(self, x: 'FloatArray') -> 'FloatArray': ...

	def gradient(self, x: 'FloatArray') -> 'FloatArray':
		raise NotImplementedError(f'{self.name} has no closed-form gradient')

	def hessian(self, x: 'FloatArray') -> 'FloatArray':
		raise NotImplementedError(f'{self.name} has no closed-form Hessian')

	@property
	def has_derivatives(self) -> bool:
		return True

	@abstractmethod
	def parameters(self) -> dict[str, Any]: ...


@dataclass(frozen=True)
class Constant(Expression):
	c: float = 0.0
	name: str = field(default='constant', init=False)

	def value(self, x):
		return np.full(np.shape(x)[0], float(self.c))

	def gradient(self, x):
		return np.zeros(np.shape(x))

	def hessian(self, x):
		n = np.shape(x)[1]
		return np.zeros((np.shape(x)[0], n, n))

	def parameters(self):
		return {'name': self.name, 'c': self.c}


@dataclass(frozen=True)
class Affine(Expression):
	"""c + b·x"""

	c: float = 0.0
	b: tuple[float, ...] = ()
	name: str = field(default='affine', init=False)

	def _slope(self, n: int) -> np.ndarray:
		slope = np.zeros(n)
		slope[: len(self.b)] = self.b
		return slope

	def value(self, x):
		x = np.asarray(x, dtype=float)
		return self.c + x @ self._slope(x.shape[1])

	def gradient(self, x):
		x = np.asarray(x, dtype=float)
		return np.broadcast_to(self._slope(x.shape[1]), x.shape).copy()

	def hessian(self, x):
		n = np.shape(x)[1]
		return np.zeros((np.shape(x)[0], n, n))

	def parameters(self):
		return {'name': self.name, 'c': self.c, 'b': list(self.b)}


@dataclass(frozen=True)
class Quadratic(Expression):
	"""c + a|x|²/2"""

	a: float = 1.0
	c: float = 0.0
	name: str = field(default='quadratic', init=False)

	def value(self, x):
		x = np.asarray(x, dtype=float)
		return self.c + 0.5 * self.a * np.sum(x**2, axis=-1)

	def gradient(self, x):
		return self.a * np.asarray(x, dtype=float)

	def hessian(self, x):
		n = np.shape(x)[1]
		return np.broadcast_to(self.a * np.eye(n), (np.shape(x)[0], n, n)).copy()

	def parameters(self):
		return {'name': self.name, 'a': self.a, 'c': self.c}


@dataclass(frozen=True)
class QuadraticForm(Expression):
	"""c + b·x + ½xᵀQx"""

	q: tuple[tuple[float, ...], ...] = ((1.0, 0.0), (0.0, 1.0))
	b: tuple[float, ...] = ()
	c: float = 0.0
	name: str = field(default='quadratic_form', init=False)

	@property
	def matrix(self) -> np.ndarray:
		q = np.asarray(self.q, dtype=float)
		return 0.5 * (q + q.T)

	def _slope(self, n: int) -> np.ndarray:
		slope = np.zeros(n)
		slope[: len(self.b)] = self.b
		return slope

	def value(self, x):
		x = np.asarray(x, dtype=float)
		return self.c + x @ self._slope(x.shape[1]) + 0.5 * np.einsum('ni,ij,nj->n', x, self.matrix, x)

	def gradient(self, x):
		x = np.asarray(x, dtype=float)
		return x @ self.matrix + self._slope(x.shape[1])

	def hessian(self, x):
		return np.broadcast_to(self.matrix, (np.shape(x)[0], *self.matrix.shape)).copy()

	def parameters(self):
		return {'name': self.name, 'q': [list(row) for row in self.q], 'b': list(self.b), 'c': self.c}


@dataclass(frozen=True)
class RadialPower(Expression):
	"""c + a|x|^p"""

	a: float = 1.0
	p: float = 2.0
	c: float = 0.0
	name: str = field(default='radial_power', init=False)

	def value(self, x):
		r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
		return self.c + self.a * r**self.p

	def gradient(self, x):
		x = np.asarray(x, dtype=float)
		r = np.linalg.norm(x, axis=-1)
		with np.errstate(divide='ignore', invalid='ignore'):
			factor = np.where(r > 0, self.a * self.p * r ** (self.p - 2), 0.0 if self.p > 1 else np.nan)
		return factor[:, None] * x

	def hessian(self, x):
		"""a·p·r^{p−2}(I + (p−2)x̂x̂ᵀ), singular at the origin for p < 2"""
		x = np.asarray(x, dtype=float)
		n = x.shape[1]
		r = np.linalg.norm(x, axis=-1)
		safe = np.where(r > 0, r, 1.0)
		unit = x / safe[:, None]
		hessian = (self.a * self.p * safe ** (self.p - 2))[:, None, None] * (
			np.eye(n) + (self.p - 2) * unit[:, :, None] * unit[:, None, :]
		)
		at_origin = r == 0
		if self.p == 2:
			hessian[at_origin] = 2 * self.a * np.eye(n)
		elif self.p > 2:
			hessian[at_origin] = 0.0
		else:
			hessian[at_origin] = np.nan
		return hessian

	def parameters(self):
		return {'name': self.name, 'a': self.a, 'p': self.p, 'c': self.c}


@dataclass(frozen=True)
class RadialExp(Expression):
	"""c·exp(s|x|²/2) + d"""

	c: float = 1.0
	s: float = 1.0
	d: float = 0.0
	name: str = field(default='radial_exp', init=False)

	def _exp(self, x: np.ndarray) -> np.ndarray:
		return self.c * np.exp(0.5 * self.s * np.sum(x**2, axis=-1))

	def value(self, x):
		x = np.asarray(x, dtype=float)
		return self._exp(x) + self.d

	def gradient(self, x):
		x = np.asarray(x, dtype=float)
		return (self.s * self._exp(x))[:, None] * x

	def hessian(self, x):
		x = np.asarray(x, dtype=float)
		n = x.shape[1]
		return self._exp(x)[:, None, None] * (
			self.s * np.eye(n) + self.s**2 * x[:, :, None] * x[:, None, :]
		)

	def parameters(self):
		return {'name': self.name, 'c': self.c, 's': self.s, 'd': self.d}


@dataclass(frozen=True)
class Manufactured(Expression):
	"""f(λ(∇²u + c·I)) for a closed-form u, on flat Cartesian geometry. Used as the ψ that makes u an exact solution."""

	solution: Expression
	operator: 'OperatorSpec'
	chi_scale: float = 0.0
	name: str = field(default='manufactured', init=False)

	def value(self, x):
		x = np.asarray(x, dtype=float)
		tensor = self.solution.hessian(x) + self.chi_scale * np.eye(x.shape[1])
		return self.operator.value(np.linalg.eigvalsh(tensor))

	@property
	def has_derivatives(self) -> bool:
		return False

	def parameters(self):
		return {'name': self.name, 'solution': self.solution.parameters(), 'chi_scale': self.chi_scale}


def _read_csv_field_raw(path: Path) -> tuple['FloatArray', 'FloatArray']:
	"""Reads x1, …, xn, value columns (the last column is the value)"""
	try:
		with path.open('rt', encoding='utf-8', newline='') as f:
			rows = list(csv.reader(f))
	except OSError as ex:
		raise OutputError(f'Cannot read field {path}: {ex}') from ex
	body = [(line, row) for line, row in enumerate(rows[1:], 2) if any(cell.strip() for cell in row)]
	if not body:
		raise ConfigValidationError([(str(path), 'CSV field needs a header and at least one row')])
	width = len(rows[0])
	if width < 2:
		raise ConfigValidationError([(str(path), 'CSV field needs coordinate columns and a value column')])
	errors = []
	values = []
	for line, row in body:
		if len(row) != width:
			errors.append((f'{path}:{line}', f'expected {width} columns, got {len(row)}'))
			continue
		try:
			values.append([float(cell) for cell in row])
		except ValueError as ex:
			errors.append((f'{path}:{line}', str(ex)))
	if errors:
		raise ConfigValidationError(errors)
	data = np.asarray(values, dtype=float)
	return data[:, :-1], data[:, -1]


read_csv_field = cache(_read_csv_field_raw)


@alru_cache
async def read_csv_field_async(path: Path) -> tuple['FloatArray', 'FloatArray']:
	return await asyncio.to_thread(_read_csv_field_raw, path)


def _coordinate_key(point: 'Sequence[float]') -> tuple[float, ...]:
	return tuple(np.round(np.asarray(point, dtype=float), CSV_MATCH_DECIMALS).tolist())


@dataclass(frozen=True)
class CsvField(Expression):
	"""Values given node by node in a file; every node asked for has to appear in it"""

	path: Path
	data: 'tuple[FloatArray, FloatArray] | None' = field(default=None, compare=False, repr=False)
	"""Points and values already read, otherwise the file is read (once) on first use"""
	name: str = field(default='csv', init=False)

	def value(self, x):
		points, values = self.data if self.data is not None else read_csv_field(self.path)
		lookup = {_coordinate_key(point): v for point, v in zip(points, values, strict=True)}
		try:
			return np.asarray([lookup[_coordinate_key(point)] for point in np.asarray(x, dtype=float)])
		except KeyError as ex:
			raise ConfigValidationError([(str(self.path), f'no value for the node at {list(ex.args[0])}')]) from None

	@property
	def has_derivatives(self) -> bool:
		return False

	def parameters(self):
		return {'name': self.name, 'path': str(self.path)}


EXPRESSION_CATALOG: dict[str, type[Expression]] = {
	'constant': Constant,
	'affine': Affine,
	'quadratic': Quadratic,
	'quadratic_form': QuadraticForm,
	'radial_power': RadialPower,
	'radial_exp': RadialExp,
	'csv': CsvField,
}


def make_expression(name: str, **params) -> Expression:
	"""Anything in the catalogue except manufactured, which needs an operator (see make_manufactured)"""
	try:
		cls = EXPRESSION_CATALOG[name]
	except KeyError:
		raise ValueError(f'Unknown expression {name!r}, expected one of {sorted(EXPRESSION_CATALOG)}') from None
	for key in ('b',):
		if key in params:
			params[key] = tuple(params[key])
	if 'q' in params:
		params['q'] = tuple(tuple(row) for row in params['q'])
	if 'path' in params:
		params['path'] = Path(params['path'])
	return cls(**params)


def make_manufactured(solution: Expression, operator: 'OperatorSpec', chi_scale: float = 0.0) -> Manufactured:
	if not solution.has_derivatives:
		raise ValueError(f'Cannot manufacture a right-hand side from {solution.name}, it has no closed-form Hessian')
	return Manufactured(solution, operator, chi_scale)

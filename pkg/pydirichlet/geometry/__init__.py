"""Single-chart geometry: grids, domain presets, metrics, covariant derivatives and the boundary."""

from .boundary import (
	BoundaryConeReport,
	BoundaryGeometry,
	boundary_distance,
	check_boundary_cone_condition,
	gamma_infinity,
	principal_curvatures,
	tangent_basis,
)
from .domains import DOMAIN_PRESETS, Annulus, Disk, Domain, Rectangle, RoundedSquare, make_domain
from .export import fields_to_csv
from .fields import (
	covariant_hessian,
	covariant_hessian_operators,
	eigenvalue_field,
	gradient,
	gradient_norm,
	laplacian,
)
from .grid import Chart, ChartGrid, DifferenceOperators
from .metric import MetricField, christoffel, conformal_metric, euclidean_metric, make_chi, make_metric


def collar(geometry: BoundaryGeometry, anchor: int, delta: float):
	"""Ω_δ around a boundary node"""
	return geometry.collar(anchor, delta)


__all__ = [
	'DOMAIN_PRESETS',
	'Annulus',
	'BoundaryConeReport',
	'BoundaryGeometry',
	'Chart',
	'ChartGrid',
	'DifferenceOperators',
	'Disk',
	'Domain',
	'MetricField',
	'Rectangle',
	'RoundedSquare',
	'boundary_distance',
	'check_boundary_cone_condition',
	'christoffel',
	'collar',
	'conformal_metric',
	'covariant_hessian',
	'covariant_hessian_operators',
	'eigenvalue_field',
	'euclidean_metric',
	'fields_to_csv',
	'gamma_infinity',
	'gradient',
	'gradient_norm',
	'laplacian',
	'make_chi',
	'make_domain',
	'make_metric',
	'principal_curvatures',
	'tangent_basis',
]

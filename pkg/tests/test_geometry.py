import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pydirichlet.cones import GardingCone, WholeSpace
from pydirichlet.errors import MetricNotSPDError, UnsupportedDomainError
from pydirichlet.geometry import (
	Annulus,
	Chart,
	Disk,
	MetricField,
	Rectangle,
	RoundedSquare,
	boundary_distance,
	check_boundary_cone_condition,
	christoffel,
	collar,
	conformal_metric,
	covariant_hessian,
	eigenvalue_field,
	euclidean_metric,
	fields_to_csv,
	gamma_infinity,
	laplacian,
	make_chi,
	make_domain,
	make_metric,
	principal_curvatures,
)


def test_polar_disk_layout(disk_grid):
	assert disk_grid.chart == Chart.Polar
	assert disk_grid.shape == (9, 32)
	radii = np.linalg.norm(disk_grid.physical, axis=-1)
	assert_allclose(radii[disk_grid.boundary_nodes], 1.0)
	assert radii[disk_grid.interior_nodes].max() < 1.0
	assert not disk_grid.operators.missing.any()


def test_cartesian_disk_keeps_nodes_inside():
	grid = Disk(resolution=6, chart=Chart.Cartesian).build_grid()
	assert np.linalg.norm(grid.physical, axis=-1).max() <= 1.0 + 1e-9
	assert grid.boundary_nodes.size > 0


def test_make_domain():
	assert make_domain('disk', resolution=4, chart='cartesian') == Disk(resolution=4, chart=Chart.Cartesian)
	assert make_domain('rectangle', shape=[5, 5]).shape == (5, 5)
	with pytest.raises(UnsupportedDomainError):
		make_domain('triangle')


def test_christoffel_flat_is_zero():
	grid = Rectangle(shape=(7, 7)).build_grid()
	assert_allclose(christoffel(euclidean_metric(grid), grid), 0.0)


def test_christoffel_polar(disk_grid):
	metric = euclidean_metric(disk_grid)
	gamma = christoffel(metric, disk_grid)
	r = disk_grid.coords[:, 0]
	assert_allclose(gamma[:, 0, 1, 1], -r)
	assert_allclose(gamma[:, 1, 0, 1], 1 / r)
	assert_allclose(gamma[:, 1, 1, 0], 1 / r)
	assert_allclose(gamma[:, 0, 0, 0], 0.0)
	interior = disk_grid.interior_nodes
	numeric = christoffel(metric, disk_grid, analytic=False)
	assert_allclose(numeric[interior], gamma[interior], atol=1e-10)


def test_christoffel_conformal_by_differences():
	grid = Rectangle(lower=(-1.0, -1.0), upper=(1.0, 1.0), shape=(41, 41)).build_grid()
	metric = conformal_metric(grid, 0.2)
	interior = grid.interior_nodes
	numeric = christoffel(metric, grid, analytic=False)[interior]
	assert_allclose(numeric, metric.christoffel_analytic[interior], atol=1e-2)


def test_covariant_hessian_flat_quadratic():
	grid = Rectangle(lower=(-1.0, -1.0), upper=(1.0, 1.0), shape=(9, 9)).build_grid()
	metric = euclidean_metric(grid)
	u = 0.5 * np.sum(grid.physical**2, axis=-1)
	hessian = covariant_hessian(u, metric, grid)
	assert_allclose(hessian[grid.interior_nodes], np.broadcast_to(np.eye(2), (grid.interior_nodes.size, 2, 2)), atol=1e-10)
	linear = grid.physical @ np.array([2.0, -3.0])
	assert_allclose(covariant_hessian(linear, metric, grid), 0.0, atol=1e-10)


def test_covariant_hessian_polar_r_squared(disk_grid):
	metric = euclidean_metric(disk_grid)
	r = disk_grid.coords[:, 0]
	u = r**2
	hessian = covariant_hessian(u, metric, disk_grid)
	interior = disk_grid.interior_nodes
	assert_allclose(hessian[interior, 0, 0], 2.0, atol=1e-10)
	assert_allclose(hessian[interior, 1, 1], 2 * r[interior] ** 2, atol=1e-10)
	assert_allclose(eigenvalue_field(u, metric, disk_grid)[interior], 2.0, atol=1e-10)
	assert_allclose(laplacian(u, metric, disk_grid)[interior], 4.0, atol=1e-10)


def test_metric_must_be_positive_definite(disk_grid):
	g = np.broadcast_to(np.eye(2), (disk_grid.size, 2, 2)).copy()
	g[5] = np.diag([1.0, -1.0])
	with pytest.raises(MetricNotSPDError) as info:
		MetricField(g, np.zeros_like(g))
	assert info.value.node == 5


def test_make_metric_and_chi(disk_grid):
	metric = make_chi(make_metric(disk_grid), 'metric', 2.0)
	assert_allclose(metric.trace_chi, 4.0)
	with pytest.raises(UnsupportedDomainError):
		make_metric(disk_grid, 'conformal')
	with pytest.raises(ValueError, match='χ'):
		make_chi(metric, 'random')


def test_boundary_distance_examples():
	assert Disk().distance(np.array([[0.3, 0.0]]))[0] == pytest.approx(0.7)
	assert Annulus(0.5, 1.0).distance(np.array([[0.6, 1.0]]))[0] == pytest.approx(0.1)
	cartesian = Disk(chart=Chart.Cartesian)
	assert cartesian.distance(np.array([[0.3, 0.4]]))[0] == pytest.approx(0.5)


def test_boundary_distance_on_grid(disk_grid):
	geometry = boundary_distance(disk_grid)
	assert_allclose(geometry.sigma[disk_grid.boundary_nodes], 0.0)
	assert_allclose(geometry.gradient_norm, 1.0)
	assert geometry.collar_gradient_ok(np.ones(disk_grid.size, dtype=bool))


def test_collar_and_rho(disk_grid):
	geometry = boundary_distance(disk_grid)
	anchor = int(disk_grid.boundary_nodes[0])
	rho = geometry.rho(anchor)
	assert rho[anchor] == 0.0
	mask = collar(geometry, anchor, 0.3)
	assert mask[anchor]
	assert_allclose(np.count_nonzero(mask), np.count_nonzero(rho < 0.3))
	assert np.all(rho[mask] < 0.3)


def test_principal_curvatures_disk(disk_grid):
	assert_allclose(principal_curvatures(disk_grid), 1.0, atol=1e-10)
	small = Disk(radius=0.5, resolution=8).build_grid()
	assert_allclose(principal_curvatures(small), 2.0, atol=1e-10)


def test_principal_curvatures_annulus():
	grid = Annulus(0.5, 1.0, resolution=8).build_grid()
	kappa = principal_curvatures(grid)[:, 0]
	r = grid.coords[grid.boundary_nodes, 0]
	assert_allclose(kappa[np.isclose(r, 1.0)], 1.0, atol=1e-10)
	assert_allclose(kappa[np.isclose(r, 0.5)], -2.0, atol=1e-10)


def test_principal_curvatures_rounded_square():
	domain = RoundedSquare(half_side=1.0, corner_radius=0.25, resolution=8)
	grid = domain.build_grid()
	kappa = principal_curvatures(grid)[:, 0]
	x = grid.physical[grid.boundary_nodes]
	on_edge = np.abs(x).min(axis=-1) < 0.5
	assert_allclose(kappa[on_edge], 0.0, atol=1e-10)


def test_gamma_infinity():
	assert gamma_infinity(GardingCone(2, 1)) == WholeSpace(1)
	assert gamma_infinity(GardingCone(2, 2)) == GardingCone(1, 1)
	assert gamma_infinity(GardingCone(3, 2)) == GardingCone(2, 1)


def test_boundary_cone_condition(disk_grid):
	kappa = principal_curvatures(disk_grid)
	assert check_boundary_cone_condition(kappa, GardingCone(2, 1)).passed
	report = check_boundary_cone_condition(kappa, GardingCone(2, 2), disk_grid.boundary_nodes)
	assert not report.passed
	assert report.failing_nodes == disk_grid.boundary_nodes.size
	assert report.worst_margin == pytest.approx(-1.0)
	assert report.worst_node in set(disk_grid.boundary_nodes.tolist())


def test_boundary_cone_condition_annulus_inner_circle():
	grid = Annulus(0.5, 1.0, resolution=8).build_grid()
	kappa = principal_curvatures(grid)
	inner = np.isclose(grid.coords[grid.boundary_nodes, 0], 0.5)
	assert check_boundary_cone_condition(kappa[inner], GardingCone(2, 2)).passed
	report = check_boundary_cone_condition(kappa, GardingCone(2, 2))
	assert report.failing_nodes == np.count_nonzero(~inner)


def test_fields_to_csv(disk_grid):
	text = fields_to_csv(disk_grid, {'u': np.zeros(disk_grid.size), 'lambda': np.ones((disk_grid.size, 2))})
	lines = text.splitlines()
	assert lines[0] == 'x1,x2,u,lambda_1,lambda_2'
	assert len(lines) == disk_grid.size + 1
	finer = Disk(resolution=16).build_grid()
	assert fields_to_csv(finer, {'u': np.zeros(finer.size)}).count('\n') == finer.size + 1
	assert math.isclose(float(lines[1].split(',')[0]), disk_grid.physical[0, 0])

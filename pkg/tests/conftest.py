import numpy as np
import pytest

from pydirichlet.cones import MongeAmpere, SigmaKRoot
from pydirichlet.geometry import Disk, euclidean_metric, make_chi
from pydirichlet.solver import Constant, Quadratic, build_problem


@pytest.fixture
def rng():
	return np.random.default_rng(12345)


@pytest.fixture(scope='session')
def disk_grid():
	return Disk(resolution=8).build_grid()


@pytest.fixture(scope='session')
def monge_ampere_problem(disk_grid):
	"""f = (λ₁λ₂)^{1/2}, ψ = 1, φ = ½ on the unit disk, solved by |x|²/2"""
	metric = make_chi(euclidean_metric(disk_grid))
	return build_problem(disk_grid, metric, MongeAmpere(2), Constant(1.0), Constant(0.5), exact=Quadratic(a=1.0))


@pytest.fixture(scope='session')
def poisson_problem(disk_grid):
	"""f = σ₁, ψ = 4, φ = 1 on the unit disk, solved by |x|²"""
	metric = make_chi(euclidean_metric(disk_grid))
	return build_problem(disk_grid, metric, SigmaKRoot(2, 1), Constant(4.0), Constant(1.0), exact=Quadratic(a=2.0))

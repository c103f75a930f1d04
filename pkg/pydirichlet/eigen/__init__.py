"""Eigenvalues with respect to a metric, bordered matrices and the boundary matrices built from them."""

from .bordered import (
	BorderedMatrix,
	BorderLocalization,
	FuzzReport,
	assemble_bordered,
	border_localize,
	border_threshold,
	fuzz_localization,
)
from .boundary_matrices import (
	BoundaryFrameData,
	NormalCertificate,
	full_matrix,
	identity_scaled,
	lower_matrix,
	prepare_frame,
	rc_threshold,
	search_r0,
	search_step1,
	shifted_lower_matrix,
	sigma_matrix,
	verify_normal_estimate,
)
from .generalized import (
	cluster_average,
	dFdA,
	eigenvalues_wrt_metric,
	generalized_eigen,
	generalized_eigen_batched,
	operator_derivative,
)


__all__ = [
	'BorderLocalization',
	'BorderedMatrix',
	'BoundaryFrameData',
	'FuzzReport',
	'NormalCertificate',
	'assemble_bordered',
	'border_localize',
	'border_threshold',
	'cluster_average',
	'dFdA',
	'eigenvalues_wrt_metric',
	'full_matrix',
	'fuzz_localization',
	'generalized_eigen',
	'generalized_eigen_batched',
	'identity_scaled',
	'lower_matrix',
	'operator_derivative',
	'prepare_frame',
	'rc_threshold',
	'search_r0',
	'search_step1',
	'shifted_lower_matrix',
	'sigma_matrix',
	'verify_normal_estimate',
]

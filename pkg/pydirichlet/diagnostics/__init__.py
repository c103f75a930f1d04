"""Numerical audits of the a priori estimates on computed solutions."""

from .barrier import BarrierParams, BarrierProbe, barrier_ladder, barrier_probe
from .estimates import (
	EstimateReport,
	GlobalLaplacianReport,
	NodeCertificate,
	NormalAuditReport,
	RatioRecord,
	boundary_hessian_report,
	compute_beta0,
	global_laplacian_report,
	normal_threshold_audit,
	sample_nodes,
)
from .frames import BoundaryFrames, boundary_frames
from .sandwich import SandwichReport, sandwich_check
from .study import DeltaStudy, EstimateLevel, SyntheticLevel, Verdict, delta_independence_study

__all__ = [
	'BarrierParams',
	'BarrierProbe',
	'BoundaryFrames',
	'DeltaStudy',
	'EstimateLevel',
	'EstimateReport',
	'GlobalLaplacianReport',
	'NodeCertificate',
	'NormalAuditReport',
	'RatioRecord',
	'SandwichReport',
	'SyntheticLevel',
	'Verdict',
	'barrier_ladder',
	'barrier_probe',
	'boundary_frames',
	'boundary_hessian_report',
	'compute_beta0',
	'delta_independence_study',
	'global_laplacian_report',
	'normal_threshold_audit',
	'sample_nodes',
	'sandwich_check',
]

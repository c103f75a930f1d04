"""Cones, the symmetric functions defined on them, and the structural conditions those functions are checked against."""

from .conditions import (
	ConcavityGap,
	ConditionCheck,
	ConditionReport,
	check_structural_conditions,
	concavity_gap,
	estimate_concavity_epsilon,
)
from .cone import (
	ConeSpec,
	GardingCone,
	Membership,
	MembershipResult,
	ProjectedCone,
	WholeSpace,
	cone_contains,
	elementary_symmetric,
	sample_cone,
	sample_cone_boundary,
)
from .operators import (
	OPERATOR_ZOO,
	BoundarySupremum,
	LogSigmaN,
	MongeAmpere,
	NonMonotone,
	OperatorSpec,
	SigmaKRoot,
	SigmaQuotient,
	estimate_boundary_supremum,
	f_eval,
	f_grad,
	make_operator,
	sup_boundary_f,
	unit_normal,
)


__all__ = [
	'OPERATOR_ZOO',
	'BoundarySupremum',
	'ConcavityGap',
	'ConditionCheck',
	'ConditionReport',
	'ConeSpec',
	'GardingCone',
	'LogSigmaN',
	'Membership',
	'MembershipResult',
	'MongeAmpere',
	'NonMonotone',
	'OperatorSpec',
	'ProjectedCone',
	'SigmaKRoot',
	'SigmaQuotient',
	'WholeSpace',
	'check_structural_conditions',
	'concavity_gap',
	'cone_contains',
	'elementary_symmetric',
	'estimate_boundary_supremum',
	'estimate_concavity_epsilon',
	'f_eval',
	'f_grad',
	'make_operator',
	'sample_cone',
	'sample_cone_boundary',
	'sup_boundary_f',
	'unit_normal',
]

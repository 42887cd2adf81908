"""Noncontextuality inequalities from Kochen-Specker inequalities on finite ray sets."""
from .classical import (
    BoundEnvelope,
    BoundsReport,
    KSStatus,
    Restriction,
    bound_envelope,
    check_ks_rules,
    compute_bounds,
    is_ks_set,
    max_over_assignments,
)
from .conversion import (
    Inequality,
    Kind,
    LambdaInterval,
    assemble_inequality,
    build_F_tilde,
    build_ks_set_F_tilde,
    derive,
    select_lambda,
    specialize,
)
from .expression import Coefficient, Expression, evaluate, parse_expression, to_A_form, from_A_form
from .quantum import QuantumReport, eigen_bounds, expression_operator, projector, verify_violation
from .rayset import BasisList, OrthogonalityGraph, Ray, RaySet, build_orthogonality_graph, enumerate_bases, load_rayset

__version__ = "0.1.0"

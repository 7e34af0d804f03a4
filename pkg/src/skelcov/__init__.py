"""Decorated covers of finite metric graphs.

The package models finite morphisms of curves through their skeleta: a pair
of finite metric graphs, a map between them, and the ramification and degree
decorations that make genus bookkeeping, Galois fiber counting, and skeleton
growth exact.  A companion oracle builds such covers from scratch out of
pairwise valuations of points on a line.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .cover import AXIOMS, DecoratedCover, Violation
from .divisor import Divisor, canonical_graph_divisor, pushforward
from .errors import (
    AmbiguousTieError,
    DomainError,
    InconsistencyError,
    SkelcovError,
    SpecParseError,
    StructuralError,
    TamenessError,
)
from .export import render_figure, to_dot
from .galois import (
    Automorphism,
    GaloisCoverModel,
    galois_audit,
    germ_lift_audit,
    n_p_check,
    retraction_class_size,
    validate_galois,
    verify_equivariance,
)
from .generators import (
    cyclic_voltage_model,
    dihedral_necklace,
    ramified_cyclic_star,
    random_cover,
    random_factored_polynomial,
    random_flow,
    random_galois_model,
    random_metric_graph,
    random_ultrametric_set,
    tn_oracle_input,
)
from .genus_audit import (
    AuditLine,
    AuditReport,
    combined_formula_report,
    global_rh_audit,
    local_rh_audit,
    local_rh_report,
    ram_divisor_degree,
    tame_local_ram_order,
    total_genus,
)
from .metric_graph import (
    Edge,
    Germ,
    GraphPoint,
    InteriorPoint,
    MetricGraph,
    Vertex,
    VertexKind,
    VertexPoint,
)
from .pone_oracle import (
    BallPoint,
    BallTree,
    FactoredPolynomial,
    Fiber,
    UltrametricPointSet,
    ball_tree,
    ball_valuation,
    difference_valuation,
    induced_cover,
    zeros_in_ball,
)
from .rationals import INF, Scalar, format_scalar, is_inf, parse_scalar
from .retraction import (
    CompatibleSkeletonResult,
    RetractionFlow,
    bounded_core_flow,
    compatible_skeleton,
    forward_branching_points,
    preimage_flow,
    skeleton_vertex_conditions,
)
from .specdoc import CoverDocument, emit_document, parse_document

__all__ = [
    "AXIOMS",
    "AmbiguousTieError",
    "AuditLine",
    "AuditReport",
    "Automorphism",
    "BallPoint",
    "BallTree",
    "CompatibleSkeletonResult",
    "CoverDocument",
    "DecoratedCover",
    "Divisor",
    "DomainError",
    "Edge",
    "FactoredPolynomial",
    "Fiber",
    "GaloisCoverModel",
    "Germ",
    "GraphPoint",
    "INF",
    "InconsistencyError",
    "InteriorPoint",
    "MetricGraph",
    "RetractionFlow",
    "Scalar",
    "SkelcovError",
    "SpecParseError",
    "StructuralError",
    "TamenessError",
    "UltrametricPointSet",
    "Vertex",
    "VertexKind",
    "VertexPoint",
    "Violation",
    "__version__",
    "ball_tree",
    "ball_valuation",
    "bounded_core_flow",
    "canonical_graph_divisor",
    "combined_formula_report",
    "compatible_skeleton",
    "cyclic_voltage_model",
    "difference_valuation",
    "dihedral_necklace",
    "emit_document",
    "format_scalar",
    "forward_branching_points",
    "galois_audit",
    "germ_lift_audit",
    "global_rh_audit",
    "induced_cover",
    "is_inf",
    "local_rh_audit",
    "local_rh_report",
    "n_p_check",
    "parse_document",
    "parse_scalar",
    "preimage_flow",
    "pushforward",
    "ram_divisor_degree",
    "ramified_cyclic_star",
    "random_cover",
    "random_factored_polynomial",
    "random_flow",
    "random_galois_model",
    "random_metric_graph",
    "random_ultrametric_set",
    "render_figure",
    "retraction_class_size",
    "skeleton_vertex_conditions",
    "tame_local_ram_order",
    "tn_oracle_input",
    "to_dot",
    "total_genus",
    "validate_galois",
    "verify_equivariance",
    "zeros_in_ball",
]

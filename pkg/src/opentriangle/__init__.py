"""Percolation two-point structure on finite vertex-transitive graphs.

The package computes connection probabilities exactly (edge-subset
enumeration) or by Monte Carlo, decomposes them by cluster size, checks the
positive-semidefinite / spectral structure of the triangle diagram, and runs
the localization argument that turns a small triangle diagram into a small
open triangle uniformly far from the root.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    EigenConvergenceError,
    NotPositiveSemidefiniteError,
    ResourceCapError,
)
from .graphs import (
    Automorphism,
    TransitiveGraph,
    apply_isometry,
    ball,
    build_complete,
    build_cycle,
    build_hypercube,
    build_torus,
    graph_distance,
    indicator,
    shift_class_matrix,
    translation_to,
)
from .exact import (
    PercolationModel,
    SizeResolvedFamily,
    cluster_functional,
    cluster_functional_profile,
    cycle_closed_form,
    cycle_size_resolved_family,
    cycle_two_point_matrix,
    enumerate_size_resolved,
    enumerate_two_point,
)
from .montecarlo import (
    MCEstimate,
    MCSizeResolved,
    mc_size_resolved,
    mc_two_point,
)
from .operators import (
    family_roots,
    is_psd,
    open_triangle_profile,
    sqrt_psd,
    symmetric_eigen,
    tail_bound_check,
    triangle_diagram,
    triangle_finiteness_series,
    triangle_value,
    verify_decomposition,
    verify_spectral_identity,
)
from .lemma import (
    localization_radius,
    overlap,
    proof_pipeline,
    verify_lemma,
)
from .kernels import (
    box_triangle_sum,
    classify_convergence,
    l2_membership_diagnostic,
    radial_partial_sums,
    triangle_condition_diagnostic,
)

__all__ = [
    "Automorphism",
    "EigenConvergenceError",
    "MCEstimate",
    "MCSizeResolved",
    "NotPositiveSemidefiniteError",
    "PercolationModel",
    "ResourceCapError",
    "SizeResolvedFamily",
    "TransitiveGraph",
    "apply_isometry",
    "ball",
    "box_triangle_sum",
    "build_complete",
    "build_cycle",
    "build_hypercube",
    "build_torus",
    "classify_convergence",
    "cluster_functional",
    "cluster_functional_profile",
    "cycle_closed_form",
    "cycle_size_resolved_family",
    "cycle_two_point_matrix",
    "enumerate_size_resolved",
    "enumerate_two_point",
    "family_roots",
    "graph_distance",
    "indicator",
    "is_psd",
    "l2_membership_diagnostic",
    "localization_radius",
    "mc_size_resolved",
    "mc_two_point",
    "open_triangle_profile",
    "overlap",
    "proof_pipeline",
    "radial_partial_sums",
    "shift_class_matrix",
    "sqrt_psd",
    "symmetric_eigen",
    "tail_bound_check",
    "translation_to",
    "triangle_condition_diagnostic",
    "triangle_diagram",
    "triangle_finiteness_series",
    "triangle_value",
    "verify_decomposition",
    "verify_lemma",
    "verify_spectral_identity",
    "__version__",
]

"""Desk-scale construction of inductive systems of Razak building blocks.

The package builds the tower A(n_1, (a+1)n_1) -> A(n_2, ...) -> ... with its
diagonal connecting maps, and numerically verifies the finite-stage algebraic
and tracial properties of the construction: boundary validity, homomorphism
defects, dyadic oscillation and covering of the branch maps, eigenvalue
density, tracial oscillation decay, approximate units, pushforward duality,
projectionlessness certificates, and central embeddings at finite tensor
truncations.
"""

from .blocks import (BlockElement, BuildingBlock, canonical_h, certify_no_projection,
                     evaluate, psi_embed, random_element, validate_element)
from .central import TensorTruncation, mu_embed, sigma_stage, simple_tensor
from .errors import RazakError
from .homs import (BranchMap, ConnectingMap, SlotLayout, apply_map, build_successor,
                   compose_maps, map_metrics, match_permutation, simplicity_witness,
                   unitary_path)
from .kernel import GridFunction, herm_spectrum, scalar_calculus, sup_norm
from .tower import (Tower, build_tower, eig_density, load_tower, save_tower,
                    stage_map, trace_unique_rate)
from .traces import (Trace, affine_image, eval_trace, oscillation_gap, point_trace,
                     pushforward_trace, trace_norm)

__version__ = "0.1.0"

__all__ = [
    "BlockElement", "BranchMap", "BuildingBlock", "ConnectingMap", "GridFunction",
    "RazakError", "SlotLayout", "TensorTruncation", "Tower", "Trace",
    "affine_image", "apply_map", "build_successor", "build_tower", "canonical_h",
    "certify_no_projection", "compose_maps", "eig_density", "eval_trace",
    "evaluate", "herm_spectrum", "load_tower", "map_metrics", "match_permutation",
    "mu_embed", "oscillation_gap", "point_trace", "psi_embed", "pushforward_trace",
    "random_element", "save_tower", "scalar_calculus", "sigma_stage",
    "simple_tensor", "simplicity_witness", "stage_map", "sup_norm",
    "trace_norm", "trace_unique_rate", "unitary_path", "validate_element",
]

from .convex import ConvexBodyDiffeo, body_diffeo, convex_body_diffeo
from .fixedpoint import FixedPointProblem, FixedPointResult, solve_fixed_point, solve_fixed_point_full
from .flatten import (FlattenMaps, PicardTrace, ProductWindow, Staircase, TwinPhi, TwinSchedule,
                      flatten_forward, flatten_inverse, staircase_F, twin_phi)
from .graph import FlatWindow, GraphExtraction, GraphSpec, TubeWindow, graph_extraction, tube_window
from .patch import Ball, CoverPatch, PatchedExtraction, PatchPiece, patch_covers
from .scheme import DenseScheme, ExtractionScheme, extraction_record, scheme_forward, scheme_inverse
from .shepard import (CertifiedApproximants, ShepardBlend, SoftDistance, extend_function,
                      probe_corpus, shepard_approximants)

__all__ = [
    "Ball", "CertifiedApproximants", "ConvexBodyDiffeo", "CoverPatch", "DenseScheme",
    "ExtractionScheme", "FixedPointProblem", "FixedPointResult", "FlatWindow", "FlattenMaps",
    "GraphExtraction", "GraphSpec", "PatchPiece", "PatchedExtraction", "PicardTrace",
    "ProductWindow", "ShepardBlend", "SoftDistance", "Staircase", "TubeWindow", "TwinPhi",
    "TwinSchedule", "body_diffeo", "convex_body_diffeo", "extend_function", "extraction_record",
    "flatten_forward", "flatten_inverse", "graph_extraction", "patch_covers", "probe_corpus",
    "scheme_forward", "scheme_inverse", "shepard_approximants", "solve_fixed_point",
    "solve_fixed_point_full", "staircase_F", "tube_window", "twin_phi",
]

from .approximant import (TAU_RANK, Approximant, Verdict, approximant_eval, critical_certificate,
                          guard_predicate, sigma_min)
from .cover import BallCover, build_ball_cover, oscillation
from .operators import BlockSurjections, block_operators
from .partition import PartitionOfUnity, PartitionState, partition_eval
from .pipeline import (CriticalExtraction, Pipeline, PipelineConfig, PipelineReport, SampleRecord,
                       compose_pipeline, negative_demo, upgrade_smoothness)
from .section import graph_section, l2_norm_pair, suppression_check, weighted_l4

__all__ = [
    "TAU_RANK", "Approximant", "BallCover", "BlockSurjections", "CriticalExtraction", "Pipeline",
    "PipelineConfig", "PipelineReport", "PartitionOfUnity", "PartitionState", "SampleRecord",
    "Verdict", "approximant_eval", "block_operators", "build_ball_cover", "compose_pipeline",
    "critical_certificate", "graph_section", "negative_demo", "guard_predicate", "l2_norm_pair", "oscillation",
    "partition_eval", "sigma_min", "suppression_check", "upgrade_smoothness", "weighted_l4",
]

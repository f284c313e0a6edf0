"""Optimal-transport rank statistics and sliding-window change point detection."""

__version__ = "0.1.0"

from .datagen import (  # noqa: E402
    GroundTruth,
    LabeledSeries,
    SegmentSpec,
    fig1_preset,
    generate_segments,
    load_csv,
    load_labels,
)
from .detector import (  # noqa: E402
    DetectorConfig,
    Detections,
    StatisticTrace,
    calibrate_threshold,
    detect_peaks,
    scan,
    zero_pad,
)
from .halton import HaltonGrid, generate_halton  # noqa: E402
from .metrics import EvalReport, cp_auc, f1_score, match_detections  # noqa: E402
from .ot import TransportPlan, cost_matrix, row_normalize, solve_exact, solve_sinkhorn  # noqa: E402
from .ranks import (  # noqa: E402
    RankSet,
    StatisticValue,
    TwoSample,
    energy_statistic,
    hard_ranks,
    rank_energy,
    soft_rank_energy,
    soft_ranks,
)

__all__ = [
    "DetectorConfig",
    "Detections",
    "EvalReport",
    "GroundTruth",
    "HaltonGrid",
    "LabeledSeries",
    "RankSet",
    "SegmentSpec",
    "StatisticTrace",
    "StatisticValue",
    "TransportPlan",
    "TwoSample",
    "calibrate_threshold",
    "cost_matrix",
    "cp_auc",
    "detect_peaks",
    "energy_statistic",
    "f1_score",
    "fig1_preset",
    "generate_halton",
    "generate_segments",
    "hard_ranks",
    "load_csv",
    "load_labels",
    "match_detections",
    "rank_energy",
    "row_normalize",
    "scan",
    "soft_rank_energy",
    "soft_ranks",
    "solve_exact",
    "solve_sinkhorn",
    "zero_pad",
]

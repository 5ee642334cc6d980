"""lumibal: brightness-balanced comparison of face-recognition cohorts.

Measures how face-skin brightness differs between two cohorts of mated
image pairs, balances the cohorts on brightness factors (median value
difference, distribution modality, distribution similarity), and reports
how the balanced genuine-score distributions shift against the
unbalanced baseline.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("lumibal")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .balancing import (
    BalancedSubset,
    BdmGrouping,
    HAS_BI,
    HAS_MULTI,
    MatchedPairList,
    NON_UNI,
    Strategy,
    bdiou_assign,
    bdiou_top,
    bdm_filter,
    bdm_sample,
    bvd_match,
    take_top,
)
from .brightness import (
    MaskedCrop,
    brightness_value,
    bvd,
    grayscale_luma,
    histogram_from_masked,
    overexposure_fraction,
)
from .datamodel import (
    BrightnessDistribution,
    Cohort,
    CohortDataset,
    ImageRecord,
    MatedPair,
    Modality,
    PairType,
    dataset_summary,
    load_cohort,
    load_images,
    load_pairs,
    save_images,
    save_pairs,
)
from .distsim import Assignment, SetScore, all_set_scores, bdiou_set, iou
from .errors import (
    DegenerateDistributionError,
    DegenerateVarianceError,
    IngestError,
    InsufficientPairsError,
    IntegrityError,
    LumibalError,
)
from .experiment import (
    ExperimentConfig,
    annotate_images,
    annotate_pairs,
    load_experiment_config,
    run_experiment,
)
from .modality import ModalityConfig, PeakSet, classify, detect_peaks, pair_type, smooth
from .stats import (
    BaselineStats,
    CohortScoreStats,
    ReportRow,
    compute_baseline,
    dprime,
    evaluate_subset,
    score_stats,
    shift_pct,
)
from .synthgen import SynthSpec, gen_dataset, gen_distribution, load_synth_spec

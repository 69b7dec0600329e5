"""graspdec: EMG-label-driven EEG data augmentation and grasp decoding.

The pipeline: zero-phase filtering and sliding-window segmentation, EMG
RMS labels, a labeled segment bank, MSE-matched segment-switching
augmentation, CSP/FBCSP spatial features, one-vs-all linear SVM, and a
cross-validation harness with strict pre-augmentation test isolation.
"""

from .augment import (
    AugmentedTrial,
    BankEntry,
    SegmentBank,
    augment_dataset,
    augment_trial,
    audit_provenance,
    build_bank,
    select_switch_positions,
)
from .csp import (
    FeatureVector,
    SpatialFilterSet,
    csp_features,
    csp_fit,
    fbcsp_feature_matrix,
    fbcsp_fit,
    select_features,
    spatial_patterns,
    trial_covariance,
)
from .evaluate import (
    ComparisonReport,
    ConfusionMatrix,
    CvConfig,
    MethodResult,
    paired_test,
    run_comparison,
    run_fold,
    stratified_folds,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .labels import (
    EmgLabel,
    LabelTemplate,
    assign_mi_labels,
    build_label,
    build_templates,
    mse,
    nearest_label,
    rms,
)
from .signals import (
    Modality,
    Recording,
    Segment,
    Trial,
    TrialEvent,
    bandpass,
    extract_trials,
    median_smooth,
    notch,
    segment_trial,
)
from .svm import LinearModel, predict, predict_batch, train
from .synth import SynthConfig, SynthTruth, generate_session, plant_check

__version__ = "0.1.0"

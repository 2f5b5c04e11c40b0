"""
Frame synchronization for linear periodic channels with correlated
cyclostationary Gaussian noise: likelihood-ratio detectors, blind
channel acquisition, and a Monte-Carlo ROC/AUC evaluation harness.
"""

from .channel import (
    FrameGeometry,
    LptvChannel,
    apply_channel,
    build_A_matrix,
    build_B_matrix,
    calibrate_noise_power,
    compute_snr,
)
from .config import ConfigError, ScenarioConfig, parse_config, serialize_config
from .cyclostat import (
    DcdFrame,
    NoiseModel,
    analytic_autocorrelation,
    dcd_decompose,
    dcd_reconstruct,
    generate_acgn,
    noise_cov_matrix,
)
from .detectors import (
    CandidateIndexing,
    DetectorStatistic,
    GridSets,
    build_D_matrices,
    build_grid_sets,
    correlator_statistic,
    decide,
    hard_decision,
    lrt_log_statistic,
    alrt_statistic,
    ralrt_statistic,
    salrt_statistic,
)
from .estimation import (
    EqualizerConfig,
    EqualizerState,
    assemble_B_hat,
    cma_train,
    equalize_and_slice,
    estimate_channel_matrix,
    lsse_cir,
)
from .frame import (
    Constellation,
    ObservationWindow,
    SyncWord,
    assemble_sync_sequence,
    draw_window,
    post_process,
    zadoff_chu,
)
from .harness import (
    AucResult,
    RocCurve,
    auc,
    complexity_report,
    empirical_roc,
    sample_statistics,
    sw_search,
    validate_scenario,
)

__version__ = "0.1.0"

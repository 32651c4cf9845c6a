"""FDR-controlled detection of signal occurrences in noisy 1-D measurements.

Smooth the measurement, test its local maxima against the height law of
maxima of the smoothed noise (optionally jointly with neighboring samples),
and control the false discovery rate with the Benjamini-Hochberg step-up
procedure. Includes a Monte Carlo harness for power/FDR studies.
"""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED
from .experiment import MetricsSummary, TrialConfig, classify_detections, run_grid, run_trial
from .filtering import Candidate, KernelSpec, collect_neighbors, find_local_maxima, smooth
from .ksample import (
    JointNullModel,
    NeighborConfig,
    joint_null_model,
    k_sample_pvalue_mc,
    neighbor_correlation,
    select_neighbor,
    two_sample_pvalue,
)
from .multitest import BHResult, PValueSeries, bh_reject
from .numerics import (
    QuadratureSpec,
    integrate,
    sample_std_normals,
    std_normal_cdf,
    std_normal_pdf,
    truncated_normal_upper_tail,
)
from .palm import (
    NoiseMoments,
    effective_bandwidth,
    noise_moments,
    one_sample_pvalue,
    palm_density,
    palm_upper_tail,
)
from .pipeline import DetectionResult, k_sample_test, one_sample_test
from .signal_model import (
    Measurement,
    NoiseSpec,
    SignalSpec,
    generate_noise,
    place_occurrences,
    signal_train,
    synthesize,
)

__all__ = [
    "__version__",
    "NUMBA_ENABLED",
    "BHResult",
    "Candidate",
    "DetectionResult",
    "JointNullModel",
    "KernelSpec",
    "Measurement",
    "MetricsSummary",
    "NeighborConfig",
    "NoiseMoments",
    "NoiseSpec",
    "PValueSeries",
    "QuadratureSpec",
    "SignalSpec",
    "TrialConfig",
    "bh_reject",
    "classify_detections",
    "collect_neighbors",
    "effective_bandwidth",
    "find_local_maxima",
    "generate_noise",
    "integrate",
    "joint_null_model",
    "k_sample_pvalue_mc",
    "k_sample_test",
    "neighbor_correlation",
    "noise_moments",
    "one_sample_pvalue",
    "one_sample_test",
    "palm_density",
    "palm_upper_tail",
    "place_occurrences",
    "run_grid",
    "run_trial",
    "sample_std_normals",
    "select_neighbor",
    "signal_train",
    "smooth",
    "std_normal_cdf",
    "std_normal_pdf",
    "synthesize",
    "truncated_normal_upper_tail",
    "two_sample_pvalue",
]

"""Downlink spectral-efficiency comparison of co-located, semi-distributed and
fully-distributed multi-user MIMO topologies."""

from .channel import (
    ChannelMatrix,
    FadingParams,
    LargeScaleFading,
    draw_large_scale_fading,
    free_space_path_loss,
    generate_synthetic_channel,
)
from .errors import ConfigurationError, SingularMatrixError, TensorFormatError
from .evaluator import (
    MeasuredSource,
    PowerConfig,
    Scenario,
    SEReport,
    SyntheticSource,
    best_semi_distributed_L,
    run_monte_carlo,
    sinr,
    sinr_all,
    spectral_efficiency,
)
from .measured import (
    MeasuredTensor,
    SubsamplePlan,
    emit_fixture_tensor,
    load_measured_tensor,
    make_subsample_plan,
    subsample_measured,
)
from .precoder import (
    MRT,
    ZF,
    NormalizedChannelMatrix,
    PrecodingMatrix,
    mrt_precoder,
    normalize_columns,
    solve_small_complex,
    zf_precoder,
)
from .stats import empirical_cdf, likely_95
from .topology import Placement, RoomGeometry, Topology, build_ap_ring, make_topology, sample_placement

__version__ = "0.1.0"

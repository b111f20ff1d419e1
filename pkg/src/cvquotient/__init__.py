"""Gaussian-state key-rate toolkit for multipartite continuous-variable resources.

Covariance matrices are in shot-noise units with quadrature order
``(x1, p1, x2, p2, ...)``.
"""
from ._kernels import HAS_NUMBA, USE_NUMBA
from .finite_size import (
    EC_AFTER_PE,
    EC_BEFORE_PE,
    EstimationError,
    EstimatorStats,
    FiniteSizeParams,
    conservative_channel,
    delta_n,
    estimator_variances,
    finite_key_rate,
    finite_size_params,
    simulate_estimation,
    var_xdxu,
)
from .gaussian import (
    ChannelParams,
    NumericalRankError,
    PhysicalityError,
    apply_lossy_channel,
    condition_on_homodyne,
    homodyne_mutual_information,
    purify,
    symplectic_spectrum,
    von_neumann_entropy,
    williamson,
)
from .keyrates import (
    CKA,
    DR,
    INDEPENDENT,
    MID,
    POST_CKA,
    RR,
    KeyRateResult,
    ScenarioSpec,
    bipartite_post_cka_rate,
    conference_key_rate,
    independent_bipartite_sum,
    key_rate,
)
from .quotient import (
    build_dual_rail,
    finite_quotient_closed_form,
    neighbourhood_preservation_check,
    quotient_covariance,
)
from .scan import ConfigError, ScanConfig, parse_config, run_grid, run_threshold_scan
from .states import (
    SqueezerSpec,
    build_dan,
    build_ghz_like,
    build_six_mode,
    build_state,
    extend_with_trusted_ancillas,
)

__version__ = "0.1.0"

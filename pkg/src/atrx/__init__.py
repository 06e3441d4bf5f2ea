"""Adaptive-threshold one-bit ADC receivers and their achievable rates over MIMO channels."""

from .errors import ConfigurationError, ConvergenceError, InvalidInputError
from .infotheory import (
    DmcMatrix,
    MiResult,
    blahut_arimoto,
    gaussian_tail,
    mi_dmc,
    mi_pam_continuous,
    mi_pam_quantized,
)
from .linalg import Point2D, SvdFactors, convex_hull_2d, hull_contains, orthogonality_error, svd
from .ratecalc import (
    Allocation,
    PtpRateResult,
    bc_user_rate,
    RateRegion,
    enumerate_bit_allocations,
    one_shot_rate_example1,
    one_shot_sumrate_example2,
    optimize_power,
    theorem1_rate,
    theorem2_region,
)
from .receiver import (
    AtRxConfig,
    QuantizerSpec,
    at_rx_run,
    build_uniform_quantizer,
    one_shot_channel,
    sar_bc_run,
    sar_ptp_run,
    sign,
)
from .signal_model import (
    Constellation,
    NoiseStream,
    apply_channel,
    make_constellation_bc,
    make_constellation_ptp,
    power_to_snr_db,
    snr_db_to_power,
)
from .sim import SimConfig, SimReport, run_bc_sim, run_ptp_sim

__version__ = "0.1.0"

"""Simulation of OAM radio links between parallel, non-coaxial circular arrays."""

__version__ = "0.1.0"

from .errors import (
    CaseMismatch,
    DegenerateGeometry,
    LengthMismatch,
    ModeUnobservable,
    OrderOutOfRange,
    ParseError,
    ValidationError,
    VortexUcaError,
)
from .geometry import (
    FarFieldWarning,
    LinkGeometry,
    ModeIndexSet,
    approx_distance,
    element_positions,
    exact_distance,
    mode_index_set,
    projected_distance,
    zeta,
)
from .specfun import bessel_j, bessel_j_quadrature
from .channel import (
    ChannelMatrix,
    ModeChannelMatrix,
    ModeGainFactors,
    approximation_error,
    channel_matrix,
    coplanar_factors,
    exact_channel_gain,
    farfield_channel_gain,
    mode_channel_matrix,
    mode_gain_aligned,
    mode_gain_closed,
    mode_gain_direct,
    mode_gain_factors,
)
from .transceiver import (
    DemuxOutput,
    ElementSignalVector,
    ModeSymbolVector,
    NoiseModel,
    crosstalk_matrix,
    demultiplex,
    propagate,
    propagate_mode_model,
    synthesize_transmit,
)
from .metrics import (
    LinkBudget,
    SweepPoint,
    aggregate_noise_variance,
    se_sweep,
    spectrum_efficiency,
)

__all__ = [
    "__version__",
    "VortexUcaError",
    "ValidationError",
    "ParseError",
    "DegenerateGeometry",
    "OrderOutOfRange",
    "CaseMismatch",
    "LengthMismatch",
    "ModeUnobservable",
    "FarFieldWarning",
    "LinkGeometry",
    "ModeIndexSet",
    "mode_index_set",
    "element_positions",
    "projected_distance",
    "exact_distance",
    "approx_distance",
    "zeta",
    "bessel_j",
    "bessel_j_quadrature",
    "ChannelMatrix",
    "ModeChannelMatrix",
    "ModeGainFactors",
    "mode_gain_factors",
    "exact_channel_gain",
    "farfield_channel_gain",
    "mode_gain_direct",
    "mode_gain_closed",
    "mode_gain_aligned",
    "coplanar_factors",
    "approximation_error",
    "channel_matrix",
    "mode_channel_matrix",
    "ModeSymbolVector",
    "ElementSignalVector",
    "NoiseModel",
    "DemuxOutput",
    "synthesize_transmit",
    "propagate",
    "propagate_mode_model",
    "demultiplex",
    "crosstalk_matrix",
    "LinkBudget",
    "SweepPoint",
    "aggregate_noise_variance",
    "spectrum_efficiency",
    "se_sweep",
]

"""Wideband array manifolds and linear-operator design for grating-lobe suppression."""

from .correlation import (
    CorrMap,
    ScfMap,
    apply_operator,
    correlation_function,
    correlation_function_with_operator,
    default_angle_grid,
    effective_scf,
    peak_sidelobe_level,
    scf,
)
from .design import (
    AdamState,
    DesignConfig,
    ManifoldGridPair,
    OperatorTensor,
    TrainingLog,
    adam_step,
    design_operator,
    error_matrix,
    objective,
    wirtinger_gradient,
)
from .errors import (
    ConfigError,
    DimensionError,
    DimsOverflowError,
    DomainError,
    FormatError,
    MagicError,
    TruncatedError,
    VersionError,
    WbArrayError,
)
from .manifold import (
    SPEED_OF_LIGHT,
    ElementPattern,
    ExplicitGeometry,
    FrequencyGrid,
    PathParams,
    RingArrayGeometry,
    SteeringGrid,
    WidebandManifold,
    delay_steering,
    element_gain,
    steering,
    steering_grid,
    synthesize_channel,
    uniform_angle_grid,
    uniform_linear_array,
)
from .multiway import conj, contract, frobenius_norm, random_complex_normal

__version__ = "0.1.0"

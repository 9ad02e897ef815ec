"""Frequency-domain simulator of optical side-band separation with an unbalanced Mach-Zehnder interferometer."""

from .core import (
    AnalysisSetup,
    CoherentSidebands,
    Probe,
    SidebandState,
    from_db,
    make_modulated_coherent,
    make_squeezed_state,
    probe_variance,
    quadrature_variance,
    single_sideband_power,
    tensor,
    to_db,
    vacuum_state,
)
from .detection import (
    DetectorConfig,
    MeasurementResult,
    bell_measurement,
    direct_detection,
    entanglement_verdict,
    homodyne,
    joint_variances,
)
from .network import OpticalNetwork, compose, propagate, scattering_matrix
from .umzi import (
    LOCK_MINUS,
    LOCK_PLUS,
    UmziConfig,
    build_umzi_network,
    correlation_variances,
    mode_mismatch_output,
    separate,
    symmetric_output_variance,
)

__version__ = "0.1.0"

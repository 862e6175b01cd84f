"""Fault location on meshed transmission networks from sparse phasor data.

The package parses a small structured-text case format, builds per-sequence
bus impedance matrices, simulates shunt faults analytically, and estimates
fault positions from synchronized voltage and/or current phasor pairs.
"""
from .netmodel import (
    CaseError,
    LineRecord,
    Network,
    SourceRecord,
    bundled_case,
    load_case,
    parse_case,
    serialize_case,
    validate,
    with_tap,
)
from .seqmatrix import (
    BranchCoefficients,
    FaultPointCoefficients,
    IllConditionedNetworkError,
    SequenceZbus,
    TransferCoefficients,
    UngroundedNetworkError,
    branch_coefficients,
    build_ybus,
    build_zbus,
    fault_point_coefficients,
    transfer_coefficients,
    zbus_to_csv,
)
from .faultsim import (
    Distortion,
    FaultScenario,
    FaultStudy,
    FaultType,
    MeasurementTaps,
    PhasorMeasurementSet,
    SequenceFaultCurrents,
    apply_distortion,
    fault_sequence_currents,
    inverse_sequence_transform,
    measurements_from_csv,
    measurements_to_csv,
    prefault_solve,
    sequence_transform,
    simulate_measurements,
)
from .locator import (
    Channel,
    CurrentPair,
    CurrentPlacement,
    DegenerateChannelError,
    HybridPair,
    HybridPlacement,
    LinearDependenceError,
    LocationEstimate,
    Method,
    VoltagePair,
    VoltagePlacement,
    current_channel,
    estimate_for_placement,
    feasibility_check,
    locate_hybrid_direct,
    locate_hybrid_quadratic,
    locate_sscm,
    locate_ssvm,
    percent_error,
    rank_line_hypotheses,
    voltage_channel,
)

__version__ = "0.1.0"

"""Covert QKD over bosonic channels: states, bounds, codebooks, and oracles."""

from covertqkd.fockcore import (
    CutoffError,
    DensityOperator,
    DimensionMismatchError,
    Ket,
    LossyThermalChannel,
    apply_lossy_thermal,
    coherent_ket,
    displaced_thermal,
    fidelity,
    partial_trace,
    tensor,
    thermal_state,
    trace_distance,
    vacuum_ket,
)
from covertqkd.infotheory import (
    DivergenceValue,
    aleph,
    binary_entropy,
    c_distance,
    chi2_divergence,
    displaced_thermal_chi2,
    finite_size_term,
    relative_entropy,
    von_neumann_entropy,
)
from covertqkd.finitefield import (
    FieldSpec,
    HashCodebook,
    HashFunction,
    find_irreducible,
    hash_eval,
    preimage,
    verify_two_universal,
)
from covertqkd.protocol import (
    CovertnessBudget,
    EtaResult,
    NoGoInputs,
    PPMConfig,
    RateReport,
    SecurityInputs,
    average_ppm_state,
    covertness_lambda1,
    covertness_log_h,
    eta_solver,
    honest_subblock_fidelity,
    min_entropy_bound,
    nogo_max_key,
    ppm_position,
    ppm_subblock_ket,
    protocol_state,
    rate_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]

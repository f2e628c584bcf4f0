"""Quantum-noise strain sensitivity of a tuned GW interferometer read out
through continuous-variable teleportation, with EPR-squeezing and
frequency-dependent-squeezing reference curves."""

__version__ = "0.1.0"

from .field_algebra import (
    FrequencyGrid,
    QuadPair,
    SpectralMatrix,
    TransferMatrix,
    compose,
    ponderomotive,
    propagate,
    rotation,
    vacuum,
)
from .plant import (
    PlantParams,
    SignalChannel,
    alice_output,
    bob_output,
    h_sql,
    h_sql_sq,
    kimble_factor,
    kimble_from_theta,
    theta,
    victor_output,
    victor_output_from_kimble,
)
from .teleportation import (
    EntanglementParams,
    SpectralCatalog,
    WienerPair,
    bell_combine_catalog,
    filtered_spectrum,
    qtvr_closed_form,
    qtvr_ideal_point,
    strain_sensitivity,
    variational_filters,
    variational_strain,
    victor_input_spectrum,
    wiener_filters,
)
from .imperfections import (
    ImperfectionBudget,
    apply_dephasing,
    apply_loss,
    db_to_r,
    length_to_phase_rms,
)
from .schemes import (
    ComparisonReport,
    NoiseCurve,
    Scheme,
    SchemeResult,
    compare,
    conventional_curve,
    eprs_reference_curve,
    fds_baseline_curve,
    qtvr_budget_point,
    qtvr_curve,
)
from .cli_io import RunConfig, load_config, run, emit

__all__ = [name for name in dir() if not name.startswith("_")]

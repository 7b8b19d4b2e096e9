"""Photon-counting parity measurement on a pair of coupled quantum dots."""

from __future__ import annotations

from .analysis import (HypersphericalCoords, QuadratureConfig, amplitudes_from_hypersphere, average_even_fidelity, monte_carlo_average,
                       sweep_efficiency)
from .dynamics import (
    IntegratorConfig,
    LindbladChannel,
    TrajectoryRecord,
    evolve_cme_unnormalized,
    evolve_lindblad,
    evolve_unitary,
    sample_ensemble,
    sample_trajectory,
)
from .errmodels import (
    CoherencePosterior,
    SpatialParams,
    build_spatial_jump_superops,
    detection_phase,
    detuned_detection_evolve,
    detuned_excitation_phase,
    detuned_excitation_transfer,
    holemix_pulse_scan,
    spatial_coherence_factor,
    spatial_mode_overlap,
    z_correction,
)
from .exceptions import ConfigError, DimensionError, DotParityError, ImpossibleBranchError, IndeterminateOutcome, NumericalError
from .models import (CqdParams, DetuningParams, HamiltonianModel, HoleMixingParams, build_ideal_blocks, full_hamiltonian,
                     pauli_blocking_margin)
from .parity import (
    DetectorModel,
    ParityExperiment,
    ParityOutcome,
    ProtocolConfig,
    StateAmplitudes,
    apply_parity_channel,
    excitation_pulse,
    fidelity_even,
    fidelity_even_repeated,
    p_even_analytic,
    parity_projectors,
    run_protocol,
)
from .qcore import COMPUTATIONAL, FULL, BasisRegistry, DensityMatrix, Operator, PureState, expectation
from .verify import (BellId, CoherenceFactor, bell_discriminate, dephased_parity_apply, global_hadamard, measure_bell,
                     verification_pipeline, verification_probability)

__version__ = "0.1.0"

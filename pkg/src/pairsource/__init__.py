"""Simulator for a cavity-mediated photon-pair source.

Two cross-validated formalisms: a driven Lindblad master equation with
regression-theorem correlators, and a scattering engine built on
charge-restricted non-Hermitian Hamiltonian blocks; plus closed-form
oracles, a pair-source criterion, and a two-transmon circuit mapping.
"""

from .analytic import (
    EffectiveModel,
    Timescales,
    effective_populations,
    first_revival_argmax,
    gamma_s_purcell,
    intra_pair_delay,
    lorentzian_reflection,
    omega_2ph,
    psi_2ph_approx,
    purcell_rates,
    reloading_rate,
    timescales,
)
from .circuit import (
    CircuitParams,
    circuit_report,
    effective_parameters,
    rwa_validation,
    two_qubit_spectrum,
)
from .criterion import PairSourceVerdict, classify_regime, evaluate_criterion
from .errors import (
    ConfigError,
    DegenerateSteadyStateError,
    GridTooShortError,
    NumericError,
    PairSourceError,
    RegimeError,
    TruncationError,
    VerificationError,
)
from .fock import (
    BasisState,
    FockBasis,
    SystemParams,
    annihilator,
    box_basis,
    build_hamiltonian,
    build_mode_operators,
    charge_basis,
    charge_operator,
)
from .lindblad import (
    CorrelationSeries,
    DensityMatrix,
    Superoperator,
    build_liouvillian,
    check_truncation,
    correlation_tau_grid,
    correlator_G2,
    correlator_G2_pairs,
    geometric_tau_grid,
    steady_observables,
    steady_state,
)
from .scattering import (
    ScatterEngine,
    down_conversion_probability,
    fit_reloading_rate,
    flux_total,
    psi_2ph_grid,
    psi_4ph_pair,
    psi_4ph_pair_grid,
    reflection_amplitude,
    reflection_coefficient,
    two_photon_amplitude,
)

__version__ = "1.0.0"

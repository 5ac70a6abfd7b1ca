//! Split spectroscopy of spin chains: exact diagonalization of small 1D
//! chains, the spectrum obtained by splitting the middle site into a
//! decoupled auxiliary level, and its comparison with entanglement measures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensolve;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod models;
pub mod numerics;
pub mod splitspec;
pub mod timedomain;

pub use eigensolve::{eigh, eigh_with, ground_state, select_excited, EigenSystem, ExcitedPolicy};
pub use entanglement::{squashed, triseparable_oracle, von_neumann, EntanglementReport};
pub use error::{Error, Result};
pub use experiments::{
    run as run_experiment, run_coefficients, run_disorder_sweep, run_field_sweep, run_rf_check, run_scaling,
    state_spectrum, DisorderEnsembleStats, ExperimentConfig, ExperimentOutput, ModelSpec, OutputFormat, ResultRow,
    Scenario, StateLabel,
};
pub use hilbert::{
    expectation, kron, lift_local, lift_span, partial_trace, partial_trace_pure, projector, spin, ChainBasis,
    OperatorMatrix, StateVector, AUX, DOWN, UP,
};
pub use models::{
    build_random_field, build_xy, partition_hamiltonian, ChainHamiltonian, Model, Partition, PartitionedHamiltonian,
    RandomFieldParams, XYParams,
};
pub use numerics::Numerics;
pub use splitspec::{
    apply_split, build_spectrum, compute_gamma, is_single_peak, spectral_entropy, Broadening, EntropyBasis, Peak,
    SpectralEntropyResult, Spectrum, SplitChain, SplitCoefficients, SplitOperatorSpec,
};
pub use timedomain::{
    greens_function, rf_response, spectrum_from_greens, GreensSeries, RFSimConfig, RfCurve, TimeDomainSpectrum,
};

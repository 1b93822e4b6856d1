//! Truncated two-mode Fock-space simulation of the rotating-frame
//! Hamiltonian: exact propagation, revivals, observables, wavepacket tracks,
//! stability against timing errors and the Fock-space form of the
//! symplectic transformation.

pub mod conjugation;
pub mod convergence;
pub mod fock;
pub mod hermite;
pub mod propagate;
pub mod revival;
pub mod spectrum;
pub mod stability;
pub mod state;
pub mod track;

pub use conjugation::{conjugation_check, conjugation_check_for, ConjugationReport};
pub use convergence::{converge_revival, initial_nmax, ConvergedRevival, Tolerances, TruncationStep, TOLERANCE_ENV};
pub use fock::{build_fock_hamiltonian, quadratic_operator, quadrature_operators, CsrMatrix, FockBasis, FockHamiltonian};
pub use hermite::{hermite_functions, hermite_table};
pub use propagate::{evolve, PropagationMethod, Propagator};
pub use revival::{revival_phase, RevivalPhase};
pub use spectrum::{spectrum_check, LevelMatch};
pub use stability::{
    evolution_series, fit_quadratic, stability_report, stability_sweep, symmetric_offsets, EvolutionSeries,
    ObservableSeries, QuadraticFit, StabilityReport,
};
pub use state::{coherent_state, mean_excitation, survival_probability, QuantumState, StateSpec};
pub use track::{wavepacket_track, GridSpec, TrackGrid, GROUND_STATE_WIDTH};

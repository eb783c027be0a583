//! Leggett-Garg tests of macrorealism for excitation transfer in the
//! Fenna-Matthews-Olson complex.
//!
//! The crate builds the nine-level FMO model (seven chromophore sites plus
//! absorbing ground and sink states), propagates it coherently or under a
//! Lindblad master equation, and evaluates the Leggett-Garg quantity
//!
//! ```text
//! K = s₁₂·C₁₂ + s₂₃·C₂₃ + s₁₃·C₁₃ + 1
//! ```
//!
//! for dichotomic observables `Q = 2|ψ⟩⟨ψ| − I`. Macrorealism requires
//! `K ≥ 0`. The `experiments` module drives the coherent scans, the
//! strongest-violation table and the dephasing sweeps.

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod expm;
pub mod fmo;
pub mod leggett_garg;
pub mod linalg;
pub mod observable;
pub mod state;
pub mod units;

pub use basis::{StateLabel, FULL_DIM, NUM_SITES};
pub use dynamics::{
    apply_dephasing, apply_dissipator, apply_sink, build_liouvillian, propagate, CoherentPropagator, Evolution,
    LindbladPropagator, Liouvillian,
};
pub use error::{Error, Result};
pub use experiments::{DtTable, SweepRecord};
pub use fmo::{
    build_default_hamiltonian, build_default_model, perturb_hamiltonian, Hamiltonian7, InitialState, LindbladModel,
};
pub use leggett_garg::{
    coherent_survival_k, coherent_table1_k, correlator, find_strongest_violation, lg_protocol, DtGrid, LgResult,
    PatternChoice, SignPattern, TableIRow,
};
pub use linalg::{hermitian_eigendecomposition, ComplexMatrix, ComplexVector, HermitianEigen, C64};
pub use observable::{make_site_observable, make_state_observable, DichotomicObservable, ObservableLabel};
pub use state::DensityOperator;
pub use units::{wavenumber_to_angular_ps, Clock, RatePerPs, Wavenumber};

//! Many-body distance between two N-particle states, counted in applications
//! of single-particle operators, together with a charge-basis model of the
//! three-junction flux qubit to which it is applied.
//!
//! The pipeline is:
//!
//! 1. [`basis`] enumerates a finite occupation-number basis and holds states
//!    over it.
//! 2. [`operators`] builds sparse second-quantized operators, including the
//!    flux-qubit Hamiltonian and current operator.
//! 3. [`spectra`] diagonalizes and extracts the two counter-circulating
//!    current states.
//! 4. [`measure`] grows the nested spaces `H_0, H_1, ...` from one state and
//!    decomposes the other over them, giving `P(D = d)`.
//! 5. [`oracles`] holds closed-form and hand-built reference cases.

pub mod basis;
pub mod error;
mod linalg;
pub mod measure;
pub mod operators;
pub mod oracles;
pub mod spectra;

pub use basis::{Config, Flavor, OccupationBasis, StateVector};
pub use error::{Error, Result};
pub use measure::{
    average_distance, decompose, distance, flux_cat, generate_chain, DistanceDistribution,
    DistanceOptions, FluxCat, OperatorSet, OperatorSetKind, SubspaceChain,
};
pub use operators::{FluxQubitParams, LinearOperator};
pub use spectra::{CurrentStatePair, EigenDecomposition, Extraction, FluxQubit};

pub use num_complex::Complex64 as C64;

//! Classification of real linear operators `x ↦ Ax` as contractive,
//! nonexpansive, averaged or strictly pseudocontractive, and the fixed-point
//! iterations whose convergence these classes decide.
//!
//! ```
//! use fixpoint_core::{classify, mann, Matrix, StepSchedule};
//!
//! // Consensus operator I − L of a 3-agent digraph.
//! let a = Matrix::from_rows(&[[0.0, 0.5, 0.5], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
//! assert!(classify(&a).unwrap().is_spc());
//!
//! let schedule = StepSchedule::harmonic(2.0).unwrap();
//! let t = mann(&a, &[1.0, 0.0, 0.0], &schedule, 100_000).unwrap();
//! assert!(t.verdict.is_converged());
//! ```

pub mod applications;
pub mod classify;
pub mod error;
pub mod io;
pub mod iteration;
pub mod linalg;
pub mod matrix;
pub mod spectrum;

pub use applications::{
    consensus_operator, game_iteration_operator, is_consensus, laplacian, pseudogradient_matrix, DirectedWeightedGraph,
    ZeroSumGame,
};
pub use classify::{
    classify, classify_with, construct_certificate, min_eta, min_kappa, verify_avg_lmi, verify_lipschitz_lmi,
    verify_spc_lmi, BorderlineFlag, ClassificationReport, ClassifyOptions, OperatorClass, Verdict,
};
pub use error::{Error, Result};
pub use iteration::{
    krasnoselskij, krasnoselskij_with, mann, mann_with, oracle_jordan_growth, oracle_jordan_growth_scheduled,
    oracle_rotation, oracle_scalar_product, picard, picard_with, ConvergenceStatus, ConvergenceVerdict,
    DetectionConfig, StepSchedule, Trajectory,
};
pub use linalg::{eigenvalues, is_positive_definite, rank, solve_linear, Tolerances};
pub use matrix::{ComplexScalar, Matrix};
pub use spectrum::{analyze_spectrum, disk_membership, is_semisimple, DiskRegion, EigenCluster, Membership, Spectrum};

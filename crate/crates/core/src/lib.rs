//! Parameter redundancy and MLE existence for Poisson log-linear models on
//! sparse contingency tables.
//!
//! All identifiability decisions (ranks, nullspaces, facial sets) use exact
//! rational arithmetic; floating point is used only to fit the reduced
//! full-rank models.

pub mod emle;
pub mod error;
pub mod esoteric;
pub mod fitting;
pub mod io;
pub mod linalg;
pub mod model;
pub mod redundancy;
pub mod report;
pub mod saturated;
pub mod scalar;
mod serde_rational;
pub mod table;

pub use emle::{facial_set, haberman_delta_check, mle_exists, reduce_design_facial, EmleReport};
pub use error::{Error, Result};
pub use esoteric::{
    augmented_identifiability, derive_constraint, score_form, DerivedConstraint, DirectionKind,
    DirectionVerdict, EsotericConstraint,
};
pub use fitting::{fit, fit_exact, standard_errors, sufficient_marginals, FitResult, StandardErrors};
pub use model::{build_design_matrix, parse_model_formula, DesignMatrix, ModelSpec, ModelTerm};
pub use redundancy::{
    analyze_redundancy, directly_estimable, estimable_cells, estimable_combinations, reduce_model,
    DerivativeStructure, LinearCombination, ReducedModel,
};
pub use report::{analyze, emit_report, AnalysisReport, Classification, ReportFormat};
pub use saturated::{verify_theorem1, Theorem1Report};
pub use scalar::Scalar;
pub use table::{Table, VariableSpec};

/// Exact scalar used for every identifiability decision.
pub type Rational = num_rational::BigRational;
pub type RationalMatrix = linalg::Matrix<Rational>;
/// Fixed-width rational for small problems where overflow is ruled out.
pub type SmallRational = num_rational::Rational64;
pub type FitResult64 = FitResult<f64>;
pub type FitResult32 = FitResult<f32>;

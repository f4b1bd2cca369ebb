pub mod catalog;
pub mod error;
pub mod harness;
pub mod identity;
pub mod kind;
pub mod matrix;
pub mod parallel;
pub mod pochhammer;
pub mod series;

pub use catalog::{catalog, IdentityEntry};
pub use error::{Error, Result};
pub use harness::{generate_family, run_suite, sample_point, FamilyDraw, SpectrumSpec, SuiteConfig, ValidationReport};
pub use identity::{check_hypotheses, eval_lhs, eval_rhs, evaluate_identity, residual, IdentityEvaluation};
pub use kind::{Group, LauricellaKind, Slot};
pub use matrix::{ComplexMatrix, ToleranceConfig};
pub use parallel::Execution;
pub use series::{evaluate, evaluate_many, evaluate_shifted, ParameterSet, Point, SeriesConfig, SeriesResult};

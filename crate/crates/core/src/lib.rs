//! Erasing k-block substitutions on binary words and the interval maps
//! f_σ they induce, with exact arithmetic on rational points.

pub mod catalog;
pub mod classifier;
pub mod dynamics;
pub mod entropy;
pub mod exec;
pub mod oracle;
pub mod substitution;
pub mod words;

pub use classifier::{classify, Budget, ClassificationReport, Verdict};
pub use exec::Exec;
pub use substitution::{ApplyMode, Substitution};
pub use words::{FiniteWord, PeriodicWord, UnitReal};

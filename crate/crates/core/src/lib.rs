//! Explanatory causal effects for black-box binary classifiers.
//!
//! Given binarized features and a column of model predictions, the engine
//! finds the prediction's direct causes from data, extends them with combined
//! causes and interactions mined as closed frequent patterns, and ranks every
//! member by its average (global) or instance-specific (local) explanatory
//! causal effect.
//!
//! ```no_run
//! use ece_explain::report::{run_global, OutputFormat, RunConfig};
//!
//! let config = RunConfig::new("adult.csv", "Class");
//! let report = run_global(&config)?;
//! std::io::Write::write_all(&mut std::io::stdout(), &report.render(OutputFormat::Md))?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bits;
pub mod contingency;
pub mod dataset;
pub mod ece;
pub mod error;
pub mod independence;
pub mod patterns;
pub mod report;
pub mod structure;
pub mod testkit;

pub use bits::Bits;
pub use dataset::{AttributeKind, AttributeSchema, AttributeSpec, BinaryDataset, Column, Literal};
pub use ece::{EceEstimate, EceParams, ExtendedParentSet, Member, MemberKind};
pub use error::{Error, Result};
pub use independence::CiTestResult;
pub use patterns::{CombinedVariable, MiningParams};
pub use report::{EngineParams, ExplanationReport, Explainer, OutputFormat, RunConfig};
pub use structure::ParentSet;

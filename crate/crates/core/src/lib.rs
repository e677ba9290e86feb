//! Bayesian estimation of two-, three- and four-parameter factor-analytic
//! models for binary items, with their exact IRT counterparts.

pub mod commands;
pub mod data;
pub mod diagnostics;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod model;
pub mod probability;
pub mod scores;
pub mod sampler;
pub mod simulate;

pub use data::ResponseMatrix;
pub use diagnostics::DiagnosticsReport;
pub use error::{Error, Result};
pub use model::{FaItem, IrtItem, Link, ModelSpec, Rescale, Variant};
pub use probability::{QuadratureRule, ResponsePattern};
pub use sampler::{fit, FitResult, SamplerConfig};

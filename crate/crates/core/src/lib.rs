pub mod allowable;
pub mod bordism;
pub mod error;
pub mod evaluator;
pub mod frobenius;
pub mod json;
pub mod linalg;
pub mod lorentzian;
pub mod oracle;
pub mod report;
pub mod spectral;
pub mod suites;
pub mod yang_mills;

pub use error::{Error, Result};
pub use frobenius::FrobeniusAlgebra;
pub use report::ValidationReport;

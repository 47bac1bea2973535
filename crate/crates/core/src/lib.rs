pub mod compare;
pub mod completeness;
pub mod error;
pub mod graph;
pub mod heat;
pub mod linalg;
pub mod operators;
pub mod options;
pub mod output;
pub mod quotient;
pub mod spectrum;

pub use error::{Error, Result};
pub use options::{Backend, ComputeOptions};

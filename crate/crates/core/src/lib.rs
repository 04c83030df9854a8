//! Path-space machinery for cadlag paths on general closed time domains.

pub mod cli;
pub mod crossing;
pub mod diagnostics;
pub mod error;
pub mod metrics;
pub mod order;
pub mod path;
pub mod squeezed;
pub mod stats;
pub mod weave;

pub use error::{Error, Result};
pub use path::{CadlagPath, PathEnsemble};

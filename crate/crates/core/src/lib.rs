//! Word calculus and finite model builder for the free N-dimensional
//! pseudospace.

pub mod alphabet;
pub mod error;
pub mod exec;
pub mod flags;
pub mod oracle;
pub mod ordinals;
pub mod space;
pub mod words;

pub use alphabet::{centralizer, IndexSet, Letter, MAX_DIM};
pub use error::{Error, Result};
pub use exec::Exec;
pub use flags::{Flag, FlagClass, FlagPath, PathStrategy};
pub use oracle::{run_suite, run_suite_with, SuiteConfig, SuiteReport, SUITES};
pub use ordinals::CnfOrdinal;
pub use space::{Anchor, BuildScript, ColoredSpace, VertexId, VertexSet};
pub use words::{FineDecomposition, StrongExploration, Word};

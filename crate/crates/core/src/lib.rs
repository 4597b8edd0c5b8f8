//! Context-aware code wiring: find identifiers in a pasted code region that
//! fail to resolve, gather facts about the surrounding context with a static
//! analysis toolkit, and map each unresolved element onto an existing context
//! element, either through a tool-driven model loop or a deterministic
//! scoring fallback, then apply the substitutions and score the results.

pub mod agent;
pub mod collect;
pub mod complete;
pub mod edit;
pub mod error;
pub mod eval;
pub mod levenshtein;
pub mod llm;
pub mod locate;
pub mod syntax;
pub mod wire;

pub use error::{Error, Result};

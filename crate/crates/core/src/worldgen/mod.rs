//! Latent-type catalogs, seeded world sampling and the search environment.
//!
//! A [`Catalog`] lists household types. Each type places every object class
//! over the location symbols with its own probabilities and emits
//! co-occurrence hints at its own rate. [`sample_world`] draws a type from the
//! catalog prior, instance counts per symbol, a target class and a hidden
//! target instance. [`SearchEnv`] then answers `Check` actions on a frozen
//! world with `Found`, `Empty` or `EmptyWithHint`.

mod catalog;
mod env;
mod world;

pub use catalog::{generate_catalog, Catalog, CatalogSpec, LatentType};
pub use env::{Hint, Observation, ObservationKind, SearchEnv, StepResult};
pub use world::{
    sample_world, GenerationConfig, InstanceRef, Location, SearchTask, World, WorldStructure,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("cannot generate world: {0}")]
    Generation(String),

    #[error("unknown instance `{0}`")]
    Grounding(String),

    #[error("episode already finished after {steps} steps")]
    Finished { steps: usize },

    #[error("malformed observation `{0}`")]
    Parse(String),
}

/// Location-symbol and object-class names: lowercase ASCII words joined by
/// `_` or `-`, starting and ending with a letter.
pub(crate) fn valid_name(name: &str) -> bool {
    let bytes = name.as_bytes();
    !bytes.is_empty()
        && bytes[0].is_ascii_lowercase()
        && bytes[bytes.len() - 1].is_ascii_lowercase()
        && bytes
            .iter()
            .all(|b| b.is_ascii_lowercase() || *b == b'_' || *b == b'-')
}

#[cfg(test)]
mod tests {
    use super::valid_name;

    #[test]
    fn names() {
        assert!(valid_name("kitchen_cabinet"));
        assert!(valid_name("mug"));
        assert!(!valid_name("cabinet1"));
        assert!(!valid_name("_x"));
        assert!(!valid_name("a b"));
        assert!(!valid_name(""));
    }
}

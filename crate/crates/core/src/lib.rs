//! Exact algebra with involution over fields of characteristic two.

pub mod algebra;
pub mod classify;
pub mod conic;
pub mod corpus;
pub mod csa;
pub mod decompose;
pub mod fields;
pub mod forms;

use serde::{Deserialize, Serialize};

/// How thoroughly identities on basis triples are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    /// Every basis triple.
    #[default]
    Full,
    /// A seeded sample of triples plus random combinations.
    Fast,
}

use serde::{Deserialize, Serialize};

use crate::graph::DEFAULT_CAPACITY;

/// Largest reduced matrix handled by the dense eigensolver and factorizations.
pub const DEFAULT_DENSE_LIMIT: usize = 3000;

/// How root-centered quantities are computed on growing balls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Radial quotient when the graph admits one and the query involves the
    /// root, dense balls otherwise.
    #[default]
    Auto,
    Dense,
    /// Exact reduction to sphere cells; model trees with rays at the root only.
    Radial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputeOptions {
    /// Vertex cap for materialized balls.
    pub capacity: usize,
    /// Largest interior handled densely.
    pub dense_limit: usize,
    pub backend: Backend,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        Self {
            capacity: DEFAULT_CAPACITY,
            dense_limit: DEFAULT_DENSE_LIMIT,
            backend: Backend::Auto,
        }
    }
}

impl ComputeOptions {
    /// Whether to use the radial quotient for a root-centered query on `g`.
    pub fn use_radial(&self, g: &crate::graph::LazyGraph, involves_root: bool) -> crate::Result<bool> {
        let available = involves_root && g.radial_arms().is_some();
        match self.backend {
            Backend::Dense => Ok(false),
            Backend::Auto => Ok(available),
            Backend::Radial if available => Ok(true),
            Backend::Radial => Err(crate::Error::Precondition(
                "the radial backend needs a model tree (rays at the root allowed) and a query at the root"
                    .into(),
            )),
        }
    }
}

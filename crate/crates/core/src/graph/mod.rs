//! Rooted, locally finite graphs and their finite balls.

mod ball;
mod law;
mod lazy;
mod profile;
mod spec;
mod vertex;

pub use ball::{materialize_ball, materialize_ball_at, Ball, BallVertex, VertexClass, DEFAULT_CAPACITY};
pub use law::{BranchingLaw, LawKind, SumClass};
pub use lazy::{build_model_tree, graft_ray, Family, LazyGraph, NeighborOracle};
pub use profile::{directional_min, valence_profile, ValenceProfile};
pub use spec::{ExtraChildren, GraphSpec, LawSpec};
pub use vertex::VertexId;

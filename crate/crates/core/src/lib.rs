//! Maximum-weight matching (MWM) cavity machinery on sparse graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`], [`generate`], [`weights`], [`io`]: graph representation,
//!   deletion views, balls and boundaries, generators and seeded weights.
//! * [`mwm`]: exact matching solvers and the augmenting-path certifier.
//! * [`bonus`]: vertex bonuses, the bonus recursion, depth-`r` local bounds
//!   and the edge-membership criterion.
//! * [`message`]: the `p`/`q` recursions on rooted trees for exponential
//!   weights, with exact Poisson-binomial expectations.
//! * [`decay`]: estimators of the correlation-decay functional `rho_r(G, e)`.

pub mod bonus;
pub mod decay;
pub mod error;
pub mod ext;
pub mod generate;
pub mod graph;
pub mod io;
pub mod message;
pub mod mwm;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use graph::{EdgeId, Graph, SubgraphView, VertexId};
pub use weights::{SeedPlan, WeightAssignment, WeightDistribution};

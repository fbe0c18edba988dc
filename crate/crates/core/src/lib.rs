//! Adversarial online learning with feedback graphs.
//!
//! * [`graph`]: feedback graphs, dominating sets, independence numbers.
//! * [`lp`]: the small dense LP solver behind the complexity programs.
//! * [`complexity`]: the problem complexities `Q*`, `R*` and proxy splits.
//! * [`policies`]: Exp3-EX and the baselines.
//! * [`environments`]: oblivious loss sources and regret accounting.
//! * [`harness`]: experiment configs, runs, and regret curves.

pub mod complexity;
pub mod distribution;
pub mod environments;
pub mod error;
pub mod graph;
pub mod harness;
pub mod lp;
pub mod policies;
pub mod rng;

pub use distribution::ActionDistribution;
pub use error::{Error, Result};
pub use graph::{FeedbackGraph, VertexSet};

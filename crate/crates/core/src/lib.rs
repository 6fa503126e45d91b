//! Numerical toolkit for the random cluster model on the complete graph.
//!
//! * [`rate`]: closed-form large-deviation rates, the mean-field phase
//!   diagram and the free energy.
//! * [`tree`]: tree polynomials, the saddle point behind the acyclic rate
//!   and the restricted-partition sums `Q_{n,k,r}`.
//! * [`exact`]: brute-force enumeration of every configuration for `n <= 7`.
//! * [`sampler`]: heat-bath Markov chain for large `n`.
//! * [`validation`]: the acceptance checks tying the above together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod graph;
pub mod numeric;
pub mod rate;
pub mod sampler;
pub mod tree;
pub mod validation;

pub use error::{Error, Result};
pub use exact::{ExactOptions, ExactReport};
pub use graph::{ComponentSummary, EdgeConfiguration, ModelParams};
pub use rate::{PhasePoint, RateCurve, RatePoint};
pub use sampler::{ChainConfig, Estimate, Init, SampleRecord};
pub use tree::{SaddlePoint, TreePolynomial};

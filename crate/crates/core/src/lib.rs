//! Lifetimes of series and parallel systems built from independent Gumbel
//! components with a shared scale, and grid-based verification of the
//! stochastic orders between two such systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`gumbel`]: closed-form primitives for a single `Gum(μ, σ)` variable.
//! * [`systems`]: the min (series) and max (parallel) of `n` components.
//! * [`majorization`]: the majorization preorder and Schur-convexity probes.
//! * [`entropy`]: Shannon and residual-lifetime entropy by adaptive quadrature.
//! * [`orders`]: the verdict engine for the lr, hr, rh, st, disp and LU orders.
//! * [`simulate`]: Monte Carlo counterparts of the analytic quantities.
//!
//! A `Holds` verdict means no violation was found on the audit grid at the
//! stated tolerance. It is evidence, not a proof of a statement for all `x`.

pub mod entropy;
pub mod error;
pub mod gumbel;
pub mod majorization;
pub mod numeric;
pub mod orders;
pub mod rng;
pub mod simulate;
pub mod systems;

pub use error::{Error, Result};
pub use gumbel::GumbelParams;
pub use orders::{Direction, OrderVerdict, Outcome, Relation};

pub use systems::{EvalGrid, Lifetime, SystemModel, Topology};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

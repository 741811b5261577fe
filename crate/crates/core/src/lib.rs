//! Capacity regions of two-way (full-duplex) channels.
//!
//! * [`infocore`]: entropy and conditional mutual information in nats.
//! * [`channel`]: finite two-way channels and the named examples.
//! * [`bounds`]: Shannon's inner and outer bounds as convex rate regions.
//! * [`isd`]: injective semi-deterministic structures and their rectangular capacity.
//! * [`closedform`]: exponential, Cauchy and input-dependent Gaussian channels.
//! * [`poisson`]: the discretized Poisson two-way channel and its corner-gap asymptotics.
//! * [`io`]: channel/structure file parsing, CSV tables and SVG plots.

pub mod bounds;
pub mod channel;
pub mod closedform;
pub mod error;
pub mod infocore;
pub mod io;
pub mod isd;
pub mod optim;
pub mod poisson;
pub mod quad;

pub use bounds::{OptimizerConfig, RatePair, RateRegion};
pub use channel::{InputConstraint, TwcChannel};
pub use error::{Error, Result};
pub use infocore::{Direction, JointPmf, Pmf};

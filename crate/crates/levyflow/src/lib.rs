//! Deterministic fast-slow dynamics with heavy-tailed limits.
//!
//! This crate simulates skew-product systems in which a slow variable is
//! driven by Birkhoff sums of an observable over an intermittent interval
//! map. For tail exponents `alpha` in (1, 2) those sums converge to
//! alpha-stable Levy motion, and the slow variable converges to the Marcus
//! (geometric) solution of a stochastic differential equation driven by that
//! Levy motion. The library provides each layer of that picture:
//!
//! * [`maps`]: intermittent interval maps with a neutral fixed point,
//!   first-return (induced) dynamics and invariant-density estimation;
//! * [`paths`]: cadlag sample paths, exact p-variation, jump statistics;
//! * [`embed`]: continuous reparametrisations that open fictitious-time
//!   windows at jumps and fill them with a prescribed bridge;
//! * [`metrics`]: computable upper bounds for Skorokhod-type path distances;
//! * [`stable`]: multivariate alpha-stable laws given by discrete spectral
//!   measures, exact characteristic functions and samplers;
//! * [`rde`]: forward (Ito-type) and Marcus solvers for differential
//!   equations driven by cadlag rough drivers, with gap diagnostics;
//! * [`fastslow`]: the coupled fast-slow iteration itself plus induced
//!   excursion functionals;
//! * [`stats`]: tail-index, characteristic-function and energy-distance
//!   validation statistics.
//!
//! Everything is deterministic given a seed: all randomness flows through
//! [`rng`], which derives independent replica streams from a single root
//! seed.

pub mod embed;
pub mod fastslow;
pub mod maps;
pub mod metrics;
pub mod paths;
pub mod rde;
pub mod rng;
pub mod special;
pub mod stable;
pub mod stats;

pub(crate) mod util;

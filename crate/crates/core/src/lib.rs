//! Local-contextual hidden-variable model of the EPR-Bohm experiment, a
//! common-cause checker, seeded Monte Carlo engines for the spin model and
//! for a classical colored-ball analogue.

#![allow(clippy::needless_range_loop)]

pub mod ball;
pub mod common_cause;
pub mod engine;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod sign;

pub use engine::{Execution, RngStream};
pub use error::{Error, Result};
pub use model::{Description, Direction, HiddenVariable, Particle, SpinValue};
pub use sign::Sign;

//! Numerically verified evaluation of the second-order exchange self-energy
//! integrals of the dense electron gas.
//!
//! The crate is organised bottom-up:
//!
//! * [`constants`] – high-precision constants and closed-form targets,
//! * [`quad1d`] – adaptive Gauss–Kronrod and tanh-sinh quadrature,
//! * [`cubature`] – iterated, Genz–Malik adaptive and Monte Carlo cubature,
//! * [`catalog`] – every integrand of the reduction chain,
//! * [`chain`] – the verification steps, factor probe and report format.

pub mod catalog;
pub mod chain;
pub mod compute;
pub mod constants;
pub mod cubature;
mod dd;
pub mod error;
pub mod probe;
pub mod quad1d;
pub mod summation;

pub use error::{Error, Result};

//! Secret-key agreement from correlated Gaussian sources with one-way public
//! communication: the rate region, a seeded source, an executable protocol and
//! an exact finite-alphabet check of its security terms.

pub mod cli;
pub mod config;
pub mod covariance;
pub mod protocol;
pub mod region;
pub mod rng;
pub mod source;
pub mod surrogate;

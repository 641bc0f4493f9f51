//! Executable one-way key-agreement protocol: quantize, bin, decode and
//! privacy-amplify, with the information-density sets used to size it.

pub mod bounds;
pub mod codebook;
pub mod coding;
pub mod density;
pub mod hash;
pub mod plan;
pub mod scalar;
pub mod trial;

use thiserror::Error;

use crate::covariance::ModelError;

pub use codebook::{quantize, Codebook};
pub use coding::{bin_encode, decode, privacy_amplify, ProtocolHashes};
pub use density::{info_density_ux, info_density_x_uz, info_density_yu, DensityModel};
pub use hash::UniversalHash;
pub use plan::{plan, ProtocolPlan};
pub use trial::{run_trial, BatchSummary, ProtocolInstance, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ProtocolError {
    #[error("KeyRateNonpositive: I(U;Y) - I(U;Z) = {margin} does not exceed 6*gamma (gamma = {gamma})")]
    KeyRateNonpositive { margin: f64, gamma: f64 },
    #[error("CodebookTooLarge: |Q| = {size} exceeds the cap {cap}")]
    CodebookTooLarge { size: f64, cap: u64 },
    #[error("EmptyBin: no codeword falls in bin {0}")]
    EmptyBin(u64),
    #[error("InvalidBlockLength: n must be at least 1")]
    InvalidBlockLength,
    #[error("InvalidGamma: gamma = {0} must be positive")]
    InvalidGamma(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ProtocolError {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolError::KeyRateNonpositive { .. } => "KeyRateNonpositive",
            ProtocolError::CodebookTooLarge { .. } => "CodebookTooLarge",
            ProtocolError::EmptyBin(_) => "EmptyBin",
            ProtocolError::InvalidBlockLength => "InvalidBlockLength",
            ProtocolError::InvalidGamma(_) => "InvalidGamma",
            ProtocolError::Model(e) => e.name(),
        }
    }
}

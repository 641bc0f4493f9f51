//! Bin coding of the quantizer index and privacy amplification of the
//! reconciled index.

use crate::rng::WordStream;

use super::codebook::Codebook;
use super::density::DensityModel;
use super::hash::UniversalHash;
use super::plan::ProtocolPlan;
use super::ProtocolError;

/// The two hash functions a protocol instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolHashes {
    /// `Q_n → C_n`.
    pub bin: UniversalHash,
    /// `Q_n → S_n`.
    pub key: UniversalHash,
}

impl ProtocolHashes {
    pub fn draw(plan: &ProtocolPlan, bin_seed: u64, hash_seed: u64) -> Self {
        ProtocolHashes {
            bin: UniversalHash::draw(plan.size_q, plan.size_c, &mut WordStream::new(bin_seed, 0)),
            key: UniversalHash::draw(plan.size_q, plan.size_s, &mut WordStream::new(hash_seed, 0)),
        }
    }
}

/// Public message for quantizer index `index`.
pub fn bin_encode(plan: &ProtocolPlan, bin: &UniversalHash, index: u64) -> u64 {
    debug_assert!(index < plan.size_q);
    bin.apply(index)
}

/// Bob's estimate of the quantizer index: among codewords in bin `message`,
/// the one maximizing `(1/n)·ln p(yⁿ|uⁿ)/p(yⁿ)`, ties to the lowest index.
pub fn decode(
    codebook: &Codebook,
    bin: &UniversalHash,
    message: u64,
    y: &[f64],
    model: &DensityModel,
) -> Result<u64, ProtocolError> {
    assert_eq!(y.len(), codebook.block_len());
    // −(y − g·u)²/2v summed over the block, dropping codeword-free terms.
    let g = model.gain_yu;
    let v = model.var_y_given_u;
    let quad = -0.5 * g * g / v;
    let lin = g / v;
    if let UniversalHash::Identity = bin {
        return if (message as usize) < codebook.len() {
            Ok(message)
        } else {
            Err(ProtocolError::EmptyBin(message))
        };
    }
    let mut best: Option<(u64, f64)> = None;
    for j in 0..codebook.len() {
        if bin.apply(j as u64) != message {
            continue;
        }
        let u = codebook.entry(j);
        let score = quad * codebook.norm(j) + lin * u.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((j as u64, score));
        }
    }
    best.map(|(j, _)| j).ok_or(ProtocolError::EmptyBin(message))
}

/// Secret key from a (reconciled) quantizer index.
pub fn privacy_amplify(plan: &ProtocolPlan, key: &UniversalHash, index: u64) -> u64 {
    debug_assert!(index < plan.size_q);
    key.apply(index)
}

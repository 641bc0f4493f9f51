//! Heuristic per-symbol quantizer for long blocks.
//!
//! Alice quantizes `x + d` on a uniform grid (dither `d` shared through the
//! seed), announces each grid index modulo `cosets`, and Bob picks the index
//! in that coset nearest his linear estimate of `x + d` from `y`. The key is
//! an affine hash of the whole index vector over the Mersenne prime `2⁶¹ − 1`.
//! Nothing here is claimed to reach the optimal trade-off.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::fmt12;
use crate::covariance::CovarianceTriple;
use crate::rng::{Seeds, WordStream};
use crate::source::SourceSampler;

/// Default block length for the scalar quantizer.
pub const DEFAULT_SCALAR_N: usize = 10_000;

const MERSENNE_61: u64 = (1 << 61) - 1;
const BITS_PER_WORD: usize = 61;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarQuantizer {
    pub n: usize,
    /// Grid spacing, in source units.
    pub step: f64,
    /// Number of cosets announced per symbol; the public rate is `ln(cosets)`.
    pub cosets: u64,
    pub key_bits: usize,
}

impl ScalarQuantizer {
    pub fn public_rate(&self) -> f64 {
        (self.cosets as f64).ln()
    }

    pub fn key_rate(&self) -> f64 {
        self.key_bits as f64 * std::f64::consts::LN_2 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarTrial {
    pub trial: u64,
    pub symbol_errors: usize,
    pub agree: bool,
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(MERSENNE_61)) as u64
}

/// `key_bits` bits from an affine hash of `indices`, one 61-bit word per row of coefficients.
fn vector_key(indices: &[i64], coeffs: &[u64], offsets: &[u64], key_bits: usize) -> Vec<u64> {
    let n = indices.len();
    offsets
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let row = &coeffs[j * n..(j + 1) * n];
            let mut acc = b;
            for (a, &q) in row.iter().zip(indices) {
                let v = q.rem_euclid(MERSENNE_61 as i64) as u64;
                acc = (acc + mulmod(*a, v)) % MERSENNE_61;
            }
            let used = (key_bits - j * BITS_PER_WORD).min(BITS_PER_WORD);
            if used == 64 {
                acc
            } else {
                acc & ((1u64 << used) - 1)
            }
        })
        .collect()
}

/// One run of the scalar scheme on trial stream `trial`.
pub fn run_scalar_trial(
    sampler: &SourceSampler,
    sigma: &CovarianceTriple,
    cfg: &ScalarQuantizer,
    seeds: &Seeds,
    trial: u64,
) -> ScalarTrial {
    let block = sampler.sample(cfg.n, seeds.source, trial).expect("block length within cap");
    let mut dither = WordStream::new(seeds.codebook, trial);
    let gain = sigma.sigma_xy / sigma.sigma_y;
    let m = cfg.cosets as i64;
    let mut alice = Vec::with_capacity(cfg.n);
    let mut bob = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let d = (dither.unit() - 0.5) * cfg.step;
        let q = ((block.x[i] + d) / cfg.step).round() as i64;
        let msg = q.rem_euclid(m);
        let target = (gain * block.y[i] + d) / cfg.step;
        let q_hat = msg + m * ((target - msg as f64) / m as f64).round() as i64;
        alice.push(q);
        bob.push(q_hat);
    }
    let words = cfg.key_bits.div_ceil(BITS_PER_WORD);
    let mut h = WordStream::new(seeds.hash, trial);
    let coeffs: Vec<u64> = (0..words * cfg.n).map(|_| h.below(MERSENNE_61)).collect();
    let offsets: Vec<u64> = (0..words).map(|_| h.below(MERSENNE_61)).collect();
    let ka = vector_key(&alice, &coeffs, &offsets, cfg.key_bits);
    let kb = vector_key(&bob, &coeffs, &offsets, cfg.key_bits);
    ScalarTrial {
        trial,
        symbol_errors: alice.iter().zip(&bob).filter(|(a, b)| a != b).count(),
        agree: ka == kb,
    }
}

pub fn run_scalar_batch(
    sigma: &CovarianceTriple,
    cfg: &ScalarQuantizer,
    seeds: &Seeds,
    trials: u64,
) -> Vec<ScalarTrial> {
    let sampler = SourceSampler::new(sigma);
    (0..trials).into_par_iter().map(|t| run_scalar_trial(&sampler, sigma, cfg, seeds, t)).collect()
}

pub const SCALAR_CSV_HEADER: &str = "trial,agree,symbol_errors";

pub fn scalar_csv(ts: &[ScalarTrial]) -> String {
    let mut s = String::from(SCALAR_CSV_HEADER);
    s.push('\n');
    for t in ts {
        let _ = writeln!(s, "{},{},{}", t.trial, u8::from(t.agree), t.symbol_errors);
    }
    s
}

pub fn scalar_summary(
    cfg: &ScalarQuantizer,
    ts: &[ScalarTrial],
    target_key_rate: f64,
    rate_scale: f64,
) -> String {
    let trials = ts.len() as f64;
    let agree = ts.iter().filter(|t| t.agree).count() as f64;
    let errs: usize = ts.iter().map(|t| t.symbol_errors).sum();
    let mut s = String::new();
    let _ = writeln!(s, "quantizer = scalar");
    let _ = writeln!(s, "heuristic = true");
    let _ = writeln!(s, "trials = {}", ts.len());
    let _ = writeln!(s, "agreement_rate = {}", fmt12(agree / trials));
    let _ = writeln!(s, "symbol_error_rate = {}", fmt12(errs as f64 / (trials * cfg.n as f64)));
    let _ = writeln!(s, "public_rate = {}", fmt12(cfg.public_rate() * rate_scale));
    let _ = writeln!(s, "key_rate = {}", fmt12(cfg.key_rate() * rate_scale));
    let _ = writeln!(s, "target_key_rate = {}", fmt12(target_key_rate * rate_scale));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cosets: u64) -> ScalarQuantizer {
        ScalarQuantizer { n: 2_000, step: 0.3, cosets, key_bits: 128 }
    }

    #[test]
    fn many_cosets_decode_reliably() {
        let sigma = CovarianceTriple::unit(0.95, 0.3, 0.4);
        let seeds = Seeds::from_master(1);
        let ts = run_scalar_batch(&sigma, &cfg(64), &seeds, 20);
        assert!(ts.iter().all(|t| t.agree && t.symbol_errors == 0));
    }

    #[test]
    fn one_coset_fails() {
        let sigma = CovarianceTriple::unit(0.95, 0.3, 0.4);
        let ts = run_scalar_batch(&sigma, &cfg(1), &Seeds::from_master(1), 5);
        assert!(ts.iter().all(|t| !t.agree && t.symbol_errors > 0));
    }

    #[test]
    fn deterministic() {
        let sigma = CovarianceTriple::unit(0.9, 0.3, 0.4);
        let s = Seeds::from_master(5);
        assert_eq!(run_scalar_batch(&sigma, &cfg(8), &s, 8), run_scalar_batch(&sigma, &cfg(8), &s, 8));
    }

    #[test]
    fn key_masks_bits() {
        let k = vector_key(&[1, 2, 3], &[5, 6, 7, 8, 9, 10], &[11, 12], 70);
        assert_eq!(k.len(), 2);
        assert!(k[1] < 1 << 9);
    }
}

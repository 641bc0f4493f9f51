//! Seeded i.i.d. blocks `(X^n, Y^n, Z^n)` and empirical-moment diagnostics.

use std::io::{self, Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::covariance::CovarianceTriple;
use crate::rng::NormalStream;

/// Default cap on block length (three f64 vectors of this length).
pub const DEFAULT_MAX_BLOCK_LEN: usize = 50_000_000;

/// Magic prefix of the binary block dump.
pub const BLOCK_MAGIC: &[u8; 8] = b"GKSBLK01";

const CHUNK: usize = 1 << 14;

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("BlockTooLarge: n = {n} exceeds the cap {cap}")]
    BlockTooLarge { n: usize, cap: usize },
    #[error("EmptyBlock: block length must be at least 1")]
    EmptyBlock,
    #[error("BadDump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceBlock {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub seed: u64,
}

impl SourceBlock {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Little-endian f64 dump: magic, then all of x, then y, then z.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(BLOCK_MAGIC)?;
        for v in self.x.iter().chain(&self.y).chain(&self.z) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`SourceBlock::write_dump`]. The seed is not stored and reads back as 0.
    pub fn read_dump<R: Read>(mut r: R) -> Result<Self, SourceError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 8 || &bytes[..8] != BLOCK_MAGIC {
            return Err(SourceError::BadDump("missing GKSBLK01 header".into()));
        }
        let body = &bytes[8..];
        if body.len() % 24 != 0 {
            return Err(SourceError::BadDump(format!("body length {} not a multiple of 24", body.len())));
        }
        let n = body.len() / 24;
        let vals: Vec<f64> =
            body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        Ok(SourceBlock {
            x: vals[..n].to_vec(),
            y: vals[n..2 * n].to_vec(),
            z: vals[2 * n..].to_vec(),
            seed: 0,
        })
    }
}

/// Sampler bound to one covariance; the Cholesky factor is computed once.
#[derive(Debug, Clone)]
pub struct SourceSampler {
    chol: [[f64; 3]; 3],
    max_len: usize,
}

impl SourceSampler {
    pub fn new(sigma: &CovarianceTriple) -> Self {
        SourceSampler { chol: sigma.cholesky(), max_len: DEFAULT_MAX_BLOCK_LEN }
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    /// One `(x, y, z)` triple from three standard normals.
    #[inline]
    pub fn transform(&self, g: [f64; 3]) -> [f64; 3] {
        let l = &self.chol;
        [l[0][0] * g[0], l[1][0] * g[0] + l[1][1] * g[1], l[2][0] * g[0] + l[2][1] * g[1] + l[2][2] * g[2]]
    }

    /// Block of length `n` from stream `stream` of `seed`.
    ///
    /// Index `i` always uses the same normals, so the result does not depend
    /// on how the work is split across threads.
    pub fn sample(&self, n: usize, seed: u64, stream: u64) -> Result<SourceBlock, SourceError> {
        if n == 0 {
            return Err(SourceError::EmptyBlock);
        }
        if n > self.max_len {
            return Err(SourceError::BlockTooLarge { n, cap: self.max_len });
        }
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        x.par_chunks_mut(CHUNK)
            .zip(y.par_chunks_mut(CHUNK))
            .zip(z.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(c, ((xs, ys), zs))| {
                let mut g = NormalStream::new(seed, stream);
                g.seek((c * CHUNK) as u64);
                for i in 0..xs.len() {
                    let q = g.next_quad();
                    let [a, b, d] = self.transform([q[0], q[1], q[2]]);
                    xs[i] = a;
                    ys[i] = b;
                    zs[i] = d;
                }
            });
        Ok(SourceBlock { x, y, z, seed })
    }

    /// Like [`SourceSampler::sample`], also returning the fourth normal of each
    /// index: a standard normal independent of the block, for test-channel noise.
    pub fn sample_with_noise(
        &self,
        n: usize,
        seed: u64,
        stream: u64,
    ) -> Result<(SourceBlock, Vec<f64>), SourceError> {
        if n == 0 {
            return Err(SourceError::EmptyBlock);
        }
        if n > self.max_len {
            return Err(SourceError::BlockTooLarge { n, cap: self.max_len });
        }
        let mut g = NormalStream::new(seed, stream);
        g.seek(0);
        let (mut x, mut y, mut z, mut w) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let q = g.next_quad();
            let [a, b, c] = self.transform([q[0], q[1], q[2]]);
            x.push(a);
            y.push(b);
            z.push(c);
            w.push(q[3]);
        }
        Ok((SourceBlock { x, y, z, seed }, w))
    }
}

/// Draws `n` i.i.d. copies of `(X, Y, Z)`, stream 0 of `seed`.
pub fn sample_block(sigma: &CovarianceTriple, n: usize, seed: u64) -> Result<SourceBlock, SourceError> {
    SourceSampler::new(sigma).sample(n, seed, 0)
}

/// Empirical second moments (the sources are zero-mean, so no centering).
pub fn empirical_covariance(block: &SourceBlock) -> CovarianceTriple {
    let n = block.len() as f64;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() / n;
    CovarianceTriple::new(
        dot(&block.x, &block.x),
        dot(&block.y, &block.y),
        dot(&block.z, &block.z),
        dot(&block.x, &block.y),
        dot(&block.x, &block.z),
        dot(&block.y, &block.z),
    )
}

/// Standard error of the second-moment estimator of entry `(i, j)`:
/// `√((Σ_ii·Σ_jj + Σ_ij²)/n)`.
pub fn moment_standard_error(var_i: f64, var_j: f64, cov_ij: f64, n: usize) -> f64 {
    ((var_i * var_j + cov_ij * cov_ij) / n as f64).sqrt()
}

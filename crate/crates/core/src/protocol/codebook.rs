//! Random i.i.d. quantizer codebook drawn from the `U` marginal, and the
//! maximum-information-density quantizer over it.

use rayon::prelude::*;

use crate::rng::NormalStream;

use super::density::{info_density_ux, DensityModel};
use super::plan::ProtocolPlan;

const CHUNK_QUADS: usize = 1 << 12;

/// `size_q` codewords of length `n`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    entries: Vec<f64>,
    norms: Vec<f64>,
    n: usize,
    pub seed: u64,
}

impl Codebook {
    /// Entries i.i.d. `N(0, Var(U))`, deterministic in `seed`.
    pub fn generate(plan: &ProtocolPlan, model: &DensityModel, seed: u64) -> Self {
        let total = plan.size_q as usize * plan.n;
        let scale = model.var_u.sqrt();
        let mut entries = vec![0.0; total];
        entries.par_chunks_mut(4 * CHUNK_QUADS).enumerate().for_each(|(c, chunk)| {
            let mut g = NormalStream::new(seed, 0);
            g.seek((c * CHUNK_QUADS) as u64);
            for quad in chunk.chunks_mut(4) {
                let q = g.next_quad();
                for (slot, v) in quad.iter_mut().zip(q) {
                    *slot = scale * v;
                }
            }
        });
        Codebook::from_entries(entries, plan.n, seed)
    }

    /// Codebook from explicit rows (each of length `n`).
    pub fn from_entries(entries: Vec<f64>, n: usize, seed: u64) -> Self {
        assert!(n > 0 && !entries.is_empty() && entries.len() % n == 0);
        let norms = entries.chunks_exact(n).map(|r| r.iter().map(|v| v * v).sum()).collect();
        Codebook { entries, norms, n, seed }
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn entry(&self, index: usize) -> &[f64] {
        &self.entries[index * self.n..(index + 1) * self.n]
    }

    pub(crate) fn norm(&self, index: usize) -> f64 {
        self.norms[index]
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Index of the codeword with the largest `(1/n)·ln p(uⁿ|xⁿ)/p(uⁿ)`; ties go
/// to the lowest index.
///
/// Up to terms that do not depend on the codeword, the density is
/// `‖u‖²·(1/Var(U) − 1/N)/2 + ⟨u,x⟩/N`, which is what gets compared.
pub fn quantize(codebook: &Codebook, x: &[f64], model: &DensityModel) -> usize {
    assert_eq!(x.len(), codebook.block_len());
    let quad = 0.5 * (1.0 / model.var_u - 1.0 / model.noise_var);
    let lin = 1.0 / model.noise_var;
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for j in 0..codebook.len() {
        let score = quad * codebook.norm(j) + lin * dot(codebook.entry(j), x);
        if score > best_score {
            best_score = score;
            best = j;
        }
    }
    best
}

/// Reference quantizer evaluating the full density for every codeword.
pub fn quantize_exhaustive(codebook: &Codebook, x: &[f64], model: &DensityModel) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for j in 0..codebook.len() {
        let s = info_density_ux(codebook.entry(j), x, model);
        if s > best_score {
            best_score = s;
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{decompose, CovarianceTriple};
    use crate::protocol::plan::plan;
    use crate::region::{design_auxiliary_noise, AuxiliaryChannel};
    use crate::rng::NormalStream;

    fn model(noise: f64) -> DensityModel {
        let dec = decompose(&CovarianceTriple::unit(0.8, 0.4, 0.5));
        DensityModel::new(&dec, &AuxiliaryChannel { noise_var: noise })
    }

    #[test]
    fn generation_is_deterministic_and_sized() {
        let dec = decompose(&CovarianceTriple::unit(0.8, 0.4, 0.5));
        let aux = design_auxiliary_noise(&dec, 0.5).unwrap();
        let p = plan(&dec, &aux, 6, 0.05).unwrap();
        let m = DensityModel::new(&dec, &aux);
        let a = Codebook::generate(&p, &m, 3);
        assert_eq!(a.len() as u64, p.size_q);
        assert_eq!(a, Codebook::generate(&p, &m, 3));
        assert_ne!(a, Codebook::generate(&p, &m, 4));
    }

    #[test]
    fn selects_the_generating_codeword() {
        let x = vec![0.3, -1.2, 0.7, 2.0];
        let mut rows = vec![5.0, 5.0, 5.0, 5.0];
        rows.extend(&x);
        rows.extend([-4.0, 3.0, -4.0, 3.0]);
        let cb = Codebook::from_entries(rows, 4, 0);
        assert_eq!(quantize(&cb, &x, &model(0.01)), 1);
    }

    #[test]
    fn single_entry_codebook() {
        let cb = Codebook::from_entries(vec![1.0, 2.0], 2, 0);
        assert_eq!(quantize(&cb, &[0.0, 0.0], &model(0.3)), 0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let cb = Codebook::from_entries(vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0], 2, 0);
        assert_eq!(quantize(&cb, &[1.0, 1.0], &model(0.3)), 0);
    }

    #[test]
    fn fast_path_matches_exhaustive() {
        let m = model(0.2);
        let mut g = NormalStream::new(17, 0);
        let rows: Vec<f64> = (0..200 * 8 / 4).flat_map(|_| g.next_quad()).collect();
        let cb = Codebook::from_entries(rows, 8, 0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).flat_map(|_| g.next_quad()).collect();
            assert_eq!(quantize(&cb, &x, &m), quantize_exhaustive(&cb, &x, &m));
        }
    }
}

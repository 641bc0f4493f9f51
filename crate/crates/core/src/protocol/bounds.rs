//! Monte Carlo evaluation of the right-hand sides of the quantization and
//! bin-coding error bounds at finite block length.
//!
//! These terms are only known through sampling of the i.i.d. test channel
//! `(Uⁿ, Xⁿ, Yⁿ, Zⁿ)`; nothing here is computed in closed form except the
//! `exp{−|Q|·e^{−tn}}` and `|Q|/|C|·e^{−αn}` terms.

use rayon::prelude::*;

use crate::covariance::CovarianceTriple;
use crate::source::SourceSampler;

use super::density::DensityModel;
use super::plan::ProtocolPlan;

/// Per-block information densities of one i.i.d. channel draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDraw {
    pub ux: f64,
    pub yu: f64,
    pub x_uz: f64,
}

/// Draws `(Uⁿ, Xⁿ, Yⁿ, Zⁿ)` with `U = X + W` and returns the three densities,
/// plus their per-symbol sample variances.
pub fn channel_densities(
    sampler: &SourceSampler,
    model: &DensityModel,
    n: usize,
    seed: u64,
    stream: u64,
) -> (DensityDraw, DensityDraw) {
    let (block, w) = sampler.sample_with_noise(n, seed, stream).expect("block length within cap");
    let sd = model.noise_var.sqrt();
    let mut acc = [[0.0f64; 2]; 3];
    for i in 0..n {
        let u = block.x[i] + sd * w[i];
        let vals = [
            model.log_ratio_ux(u, block.x[i]),
            model.log_ratio_yu(u, block.y[i]),
            model.log_ratio_x_uz(u, block.x[i], block.z[i]),
        ];
        for (a, v) in acc.iter_mut().zip(vals) {
            a[0] += v;
            a[1] += v * v;
        }
    }
    let nf = n as f64;
    let mean = |a: [f64; 2]| a[0] / nf;
    let var = |a: [f64; 2]| if n > 1 { (a[1] - a[0] * a[0] / nf) / (nf - 1.0) } else { 0.0 };
    (
        DensityDraw { ux: mean(acc[0]), yu: mean(acc[1]), x_uz: mean(acc[2]) },
        DensityDraw { ux: var(acc[0]), yu: var(acc[1]), x_uz: var(acc[2]) },
    )
}

/// Estimated terms of the two finite-length error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaEstimates {
    pub samples: u64,
    /// `Pr{(Uⁿ,Yⁿ) ∉ A_n or (Uⁿ,Xⁿ,Zⁿ) ∉ B_n}`.
    pub delta_n: f64,
    /// `Pr{(Uⁿ,Xⁿ) ∉ T_n}`.
    pub p_not_t: f64,
    /// `exp{−|Q_n|·e^{−tn}}`.
    pub covering_term: f64,
    /// `|Q_n|/|C_n|·e^{−αn}`.
    pub binning_term: f64,
}

impl LemmaEstimates {
    /// `2√δ_n + Pr{(Uⁿ,Xⁿ) ∉ T_n} + exp{−|Q_n|e^{−tn}}`.
    pub fn quantizer_bound(&self) -> f64 {
        2.0 * self.delta_n.sqrt() + self.p_not_t + self.covering_term
    }

    /// `|Q_n|/|C_n|·e^{−αn} + Pr{(g(Xⁿ),Yⁿ) ∉ A_n}`, the second term measured on
    /// the protocol's own trials.
    pub fn binning_bound(&self, p_selected_not_a: f64) -> f64 {
        self.binning_term + p_selected_not_a
    }

    /// `1 − (quantizer bound + binning bound) − 3·se`.
    pub fn agreement_floor(&self, p_selected_not_a: f64, agreement_se: f64) -> f64 {
        1.0 - (self.quantizer_bound() + self.binning_bound(p_selected_not_a)) - 3.0 * agreement_se
    }
}

/// Stream offset that keeps bound sampling disjoint from trial streams.
pub const BOUND_STREAM_OFFSET: u64 = 1 << 40;

pub fn estimate_lemma_bounds(
    sigma: &CovarianceTriple,
    plan: &ProtocolPlan,
    model: &DensityModel,
    samples: u64,
    seed: u64,
) -> LemmaEstimates {
    let sampler = SourceSampler::new(sigma);
    let (fail_ab, fail_t) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let (d, _) = channel_densities(&sampler, model, plan.n, seed, BOUND_STREAM_OFFSET + i);
            let ab = d.yu < plan.alpha || d.x_uz < plan.beta;
            (u64::from(ab), u64::from(d.ux > plan.t))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = plan.n as f64;
    let q = plan.size_q as f64;
    LemmaEstimates {
        samples,
        delta_n: fail_ab as f64 / samples as f64,
        p_not_t: fail_t as f64 / samples as f64,
        covering_term: (-q * (-plan.t * nf).exp()).exp(),
        binning_term: q / plan.size_c as f64 * (-plan.alpha * nf).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::decompose;
    use crate::protocol::plan::plan;
    use crate::region::{design_auxiliary_noise, gaussian_mutual_informations};

    #[test]
    fn densities_concentrate_on_informations() {
        let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
        let dec = decompose(&sigma);
        let aux = design_auxiliary_noise(&dec, 0.5).unwrap();
        let model = DensityModel::new(&dec, &aux);
        let info = gaussian_mutual_informations(&dec, &aux);
        let (m, _) = channel_densities(&SourceSampler::new(&sigma), &model, 100_000, 1, 0);
        assert!((m.ux - info.i_ux).abs() < 0.01);
        assert!((m.yu - info.i_uy).abs() < 0.01);
        assert!((m.x_uz - info.i_ux_given_z).abs() < 0.01);
    }

    #[test]
    fn closed_form_terms() {
        let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
        let dec = decompose(&sigma);
        let aux = design_auxiliary_noise(&dec, 0.5).unwrap();
        let p = plan(&dec, &aux, 12, 0.05).unwrap();
        let model = DensityModel::new(&dec, &aux);
        let est = estimate_lemma_bounds(&sigma, &p, &model, 200, 3);
        let q = p.size_q as f64;
        assert!((est.covering_term - (-q * (-12.0 * p.t).exp()).exp()).abs() < 1e-15);
        assert!((est.binning_term - q / p.size_c as f64 * (-12.0 * p.alpha).exp()).abs() < 1e-12);
        assert!(est.delta_n >= 0.0 && est.delta_n <= 1.0);
    }
}

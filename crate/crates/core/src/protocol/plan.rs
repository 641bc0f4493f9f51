use std::fmt::Write as _;

use crate::config::{ConfigError, ConfigMap};
use crate::covariance::GaussianDecomposition;
use crate::region::{gaussian_mutual_informations, AuxiliaryChannel, GaussianInformations};

use super::ProtocolError;

/// Default slack, in nats.
pub const DEFAULT_GAMMA: f64 = 0.05;
/// Default block length for the random-codebook quantizer.
pub const DEFAULT_CODEBOOK_N: usize = 12;
/// Largest codebook the planner accepts.
pub const DEFAULT_MAX_CODEBOOK: u64 = 1 << 22;

/// Block length, code sizes and thresholds of one protocol instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolPlan {
    pub n: usize,
    pub gamma: f64,
    pub size_q: u64,
    pub size_c: u64,
    pub size_s: u64,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub aux: AuxiliaryChannel,
}

/// `⌈v⌉`, except that values within 1e-9 (relative) of an integer round to it.
pub fn ceil_tolerant(v: f64) -> u64 {
    let r = v.round();
    let c = if (v - r).abs() <= 1e-9 * v.abs().max(1.0) { r } else { v.ceil() };
    (c as u64).max(1)
}

/// Code sizes and thresholds for the slack `gamma`:
///
/// ```text
/// |Q| = e^{n(I(U;X)+2γ)}   |C| = e^{n(I(U;X)−I(U;Y)+4γ)}   |S| = e^{n(I(U;Y)−I(U;Z)−6γ)}
/// t = I(U;X)+γ             α = I(U;Y)−γ                     β = I(U;X)−I(U;Z)−γ
/// ```
pub fn plan(
    dec: &GaussianDecomposition,
    aux: &AuxiliaryChannel,
    n: usize,
    gamma: f64,
) -> Result<ProtocolPlan, ProtocolError> {
    plan_with_cap(dec, aux, n, gamma, DEFAULT_MAX_CODEBOOK)
}

pub fn plan_with_cap(
    dec: &GaussianDecomposition,
    aux: &AuxiliaryChannel,
    n: usize,
    gamma: f64,
    max_codebook: u64,
) -> Result<ProtocolPlan, ProtocolError> {
    if n == 0 {
        return Err(ProtocolError::InvalidBlockLength);
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(ProtocolError::InvalidGamma(gamma));
    }
    let info = gaussian_mutual_informations(dec, aux);
    plan_from_informations(&info, *aux, n, gamma, max_codebook)
}

pub(crate) fn plan_from_informations(
    info: &GaussianInformations,
    aux: AuxiliaryChannel,
    n: usize,
    gamma: f64,
    max_codebook: u64,
) -> Result<ProtocolPlan, ProtocolError> {
    let nf = n as f64;
    let key_exponent = info.i_uy - info.i_uz - 6.0 * gamma;
    if key_exponent <= 0.0 {
        return Err(ProtocolError::KeyRateNonpositive { margin: info.i_uy - info.i_uz, gamma });
    }
    let q = (nf * (info.i_ux + 2.0 * gamma)).exp();
    if !q.is_finite() || q > max_codebook as f64 {
        return Err(ProtocolError::CodebookTooLarge { size: q, cap: max_codebook });
    }
    let size_q = ceil_tolerant(q);
    let size_c = ceil_tolerant((nf * (info.i_ux - info.i_uy + 4.0 * gamma)).exp());
    let size_s = ceil_tolerant((nf * key_exponent).exp());
    Ok(ProtocolPlan {
        n,
        gamma,
        size_q,
        size_c,
        size_s,
        t: info.i_ux + gamma,
        alpha: info.i_uy - gamma,
        beta: (info.i_ux - info.i_uz) - gamma,
        aux,
    })
}

impl ProtocolPlan {
    /// `(1/n)·ln|C|`, the public rate this plan spends.
    pub fn public_rate(&self) -> f64 {
        (self.size_c as f64).ln() / self.n as f64
    }

    /// `(1/n)·ln|S|`.
    pub fn key_rate(&self) -> f64 {
        (self.size_s as f64).ln() / self.n as f64
    }

    pub const KEYS: [&'static str; 9] =
        ["n", "gamma", "size_q", "size_c", "size_s", "t", "alpha", "beta", "noise_var"];

    /// Config-format rendering; floats use shortest round-trip notation.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "gamma = {:?}", self.gamma);
        let _ = writeln!(s, "size_q = {}", self.size_q);
        let _ = writeln!(s, "size_c = {}", self.size_c);
        let _ = writeln!(s, "size_s = {}", self.size_s);
        let _ = writeln!(s, "t = {:?}", self.t);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "noise_var = {:?}", self.aux.noise_var);
        s
    }

    pub fn from_config(map: &ConfigMap) -> Result<Self, ConfigError> {
        map.ensure_only(&Self::KEYS)?;
        Ok(ProtocolPlan {
            n: map.u64("n")? as usize,
            gamma: map.f64("gamma")?,
            size_q: map.u64("size_q")?,
            size_c: map.u64("size_c")?,
            size_s: map.u64("size_s")?,
            t: map.f64("t")?,
            alpha: map.f64("alpha")?,
            beta: map.f64("beta")?,
            aux: AuxiliaryChannel { noise_var: map.f64("noise_var")? },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{decompose, CovarianceTriple};
    use crate::region::design_auxiliary_noise;

    fn worked() -> (GaussianDecomposition, AuxiliaryChannel) {
        let dec = decompose(&CovarianceTriple::unit(0.8, 0.4, 0.5));
        let aux = design_auxiliary_noise(&dec, 0.5).unwrap();
        (dec, aux)
    }

    #[test]
    fn tolerant_ceiling() {
        assert_eq!(ceil_tolerant(0.2), 1);
        assert_eq!(ceil_tolerant(1.0 + 1e-12), 1);
        assert_eq!(ceil_tolerant(1.07), 2);
        assert_eq!(ceil_tolerant(4447.01), 4448);
    }

    #[test]
    fn worked_plan_sizes() {
        // Independent route: U = X + W with Σ_x|y = 0.36 gives N = 0.36/(e − 1);
        // the three informations follow from squared correlations with U.
        let nv = 0.36 / (std::f64::consts::E - 1.0);
        let vu = 1.0 + nv;
        let i_ux = 0.5 * (vu / nv).ln();
        let i_uy = -0.5 * (1.0 - 0.64 / vu).ln();
        let i_uz = -0.5 * (1.0 - 0.16 / vu).ln();
        let g = 0.05;
        let n = 12.0;
        let (dec, aux) = worked();
        let p = plan(&dec, &aux, 12, g).unwrap();
        assert_eq!(p.size_q, (n * (i_ux + 2.0 * g)).exp().ceil() as u64);
        assert_eq!(p.size_c, (n * (i_ux - i_uy + 4.0 * g)).exp().ceil() as u64);
        assert_eq!(p.size_s, (n * (i_uy - i_uz - 6.0 * g)).exp().ceil() as u64);
        assert!((p.t - (i_ux + g)).abs() < 1e-12);
        assert!((p.alpha - (i_uy - g)).abs() < 1e-12);
        assert!((p.beta - (i_ux - i_uz - g)).abs() < 1e-12);
    }

    #[test]
    fn gamma_at_the_edge_gives_singleton_key_space() {
        let (dec, aux) = worked();
        let info = gaussian_mutual_informations(&dec, &aux);
        let edge = (info.i_uy - info.i_uz) / 6.0;
        let p = plan(&dec, &aux, 12, edge * (1.0 - 1e-12)).unwrap();
        assert_eq!(p.size_s, 1);
        assert!(matches!(plan(&dec, &aux, 12, edge), Err(ProtocolError::KeyRateNonpositive { .. })));
    }

    #[test]
    fn log_sizes_scale_with_n() {
        let (dec, aux) = worked();
        let a = plan(&dec, &aux, 6, 0.01).unwrap();
        let b = plan(&dec, &aux, 12, 0.01).unwrap();
        let ratio = (b.size_q as f64).ln() / (a.size_q as f64).ln();
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn codebook_cap() {
        let (dec, aux) = worked();
        assert!(matches!(plan(&dec, &aux, 40, 0.05), Err(ProtocolError::CodebookTooLarge { .. })));
    }

    #[test]
    fn public_rate_accounting() {
        let (dec, aux) = worked();
        let info = gaussian_mutual_informations(&dec, &aux);
        for n in [4, 8, 12, 14] {
            let p = plan(&dec, &aux, n, 0.05).unwrap();
            assert!(p.public_rate() <= info.i_ux - info.i_uy + 4.0 * 0.05 + 1.0 / n as f64);
        }
    }

    #[test]
    fn config_round_trip() {
        let (dec, aux) = worked();
        let p = plan(&dec, &aux, 12, 0.05).unwrap();
        let back = ProtocolPlan::from_config(&ConfigMap::parse(&p.to_config_text()).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}

//! Closed-form key-rate / public-rate analytics for Gaussian sources.
//!
//! All rates are in nats per source symbol.

use rayon::prelude::*;
use thiserror::Error;

use crate::covariance::{
    classify_and_reduce, decompose, validate, CovarianceTriple, DegradednessClass, GaussianDecomposition,
    ModelError,
};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RateError {
    #[error("NegativePublicRate: public rate {0} is negative")]
    NegativePublicRate(f64),
    #[error("KeyRateAtOrAboveBound: key rate {rate} is not below the bound {bound}")]
    KeyRateAtOrAboveBound { rate: f64, bound: f64 },
    #[error("NoSolution: no auxiliary channel realizes public rate {0}")]
    NoSolution(f64),
    #[error("InvalidGrid: rate grid must be non-negative and ascending")]
    InvalidGrid,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl RateError {
    pub fn name(&self) -> &'static str {
        match self {
            RateError::NegativePublicRate(_) => "NegativePublicRate",
            RateError::KeyRateAtOrAboveBound { .. } => "KeyRateAtOrAboveBound",
            RateError::NoSolution(_) => "NoSolution",
            RateError::InvalidGrid => "InvalidGrid",
            RateError::Model(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub r_p: f64,
    pub r_k: f64,
}

/// Test channel `U = X + W` with `W ~ N(0, noise_var)` independent of everything.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryChannel {
    pub noise_var: f64,
}

/// `I(X;Y|Z) = ½·ln(Σ_y|z / Σ_y|xz)`; no key rate exceeds it.
pub fn key_rate_upper_bound(dec: &GaussianDecomposition) -> f64 {
    let ratio = dec.cond_var_y_given_z / dec.cond_var_y_given_xz;
    if ratio <= 1.0 {
        return 0.0;
    }
    0.5 * ratio.ln()
}

/// Boundary of the degraded region:
/// `R_k = ½·ln[(Σ_y|xz·e^{−2R_p} + Σ_y|z·(1 − e^{−2R_p})) / Σ_y|xz]`.
pub fn optimal_key_rate(dec: &GaussianDecomposition, r_p: f64) -> Result<f64, RateError> {
    if r_p.is_nan() || r_p < 0.0 {
        return Err(RateError::NegativePublicRate(r_p));
    }
    // Written as ½·ln(1 + κ·(1 − e^{−2R_p})), κ = Σ_y|z/Σ_y|xz − 1.
    let kappa = (dec.cond_var_y_given_z - dec.cond_var_y_given_xz) / dec.cond_var_y_given_xz;
    let used = -(-2.0 * r_p).exp_m1();
    Ok(0.5 * (kappa.max(0.0) * used).ln_1p())
}

/// Public rate needed to reach key rate `r_k` on the boundary; inverse of [`optimal_key_rate`].
pub fn required_public_rate(dec: &GaussianDecomposition, r_k: f64) -> Result<f64, RateError> {
    let bound = key_rate_upper_bound(dec);
    if r_k.is_nan() || r_k < 0.0 {
        return Err(RateError::NegativePublicRate(r_k));
    }
    if r_k >= bound {
        return Err(RateError::KeyRateAtOrAboveBound { rate: r_k, bound });
    }
    let num = dec.cond_var_y_given_z - dec.cond_var_y_given_xz;
    let den = dec.cond_var_y_given_z * (-2.0 * r_k).exp() - dec.cond_var_y_given_xz;
    if den <= 0.0 {
        return Err(RateError::KeyRateAtOrAboveBound { rate: r_k, bound });
    }
    Ok((0.5 * (num / den).ln() - r_k).max(0.0))
}

/// Mutual informations of the four-variate Gaussian `(U, X, Y, Z)` with `U = X + W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianInformations {
    pub i_ux: f64,
    pub i_uy: f64,
    pub i_uz: f64,
    pub i_ux_given_y: f64,
    pub i_uy_given_z: f64,
    pub i_ux_given_z: f64,
}

/// Joint covariance of `(U, X, Y, Z)`, row-major.
pub(crate) fn joint_covariance(dec: &GaussianDecomposition, aux: &AuxiliaryChannel) -> [[f64; 4]; 4] {
    let s = dec.reconstruct();
    let su = s.sigma_x + aux.noise_var;
    [
        [su, s.sigma_x, s.sigma_xy, s.sigma_xz],
        [s.sigma_x, s.sigma_x, s.sigma_xy, s.sigma_xz],
        [s.sigma_xy, s.sigma_xy, s.sigma_y, s.sigma_yz],
        [s.sigma_xz, s.sigma_xz, s.sigma_yz, s.sigma_z],
    ]
}

/// Conditional variance of coordinate `target` given the coordinates in `given`.
fn cond_var(m: &[[f64; 4]; 4], target: usize, given: &[usize]) -> f64 {
    match given {
        [] => m[target][target],
        [a] => m[target][target] - m[target][*a] * m[*a][target] / m[*a][*a],
        [a, b] => {
            let (a, b) = (*a, *b);
            let det = m[a][a] * m[b][b] - m[a][b] * m[b][a];
            let ta = m[target][a];
            let tb = m[target][b];
            // tᵀ · M^{-1} · t for the 2×2 block.
            let quad = (ta * ta * m[b][b] - 2.0 * ta * tb * m[a][b] + tb * tb * m[a][a]) / det;
            m[target][target] - quad
        }
        _ => unreachable!("at most two conditioning variables"),
    }
}

/// Conditional covariance of coordinates `a` and `b` given at most one coordinate.
fn cond_cov(m: &[[f64; 4]; 4], a: usize, b: usize, given: &[usize]) -> f64 {
    match given {
        [] => m[a][b],
        [c] => m[a][b] - m[a][*c] * m[*c][b] / m[*c][*c],
        _ => unreachable!("at most one conditioning variable"),
    }
}

const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

pub fn gaussian_mutual_informations(
    dec: &GaussianDecomposition,
    aux: &AuxiliaryChannel,
) -> GaussianInformations {
    let m = joint_covariance(dec, aux);
    let n = aux.noise_var;
    // Var(U | S) = Var(X | S) + N, and the drop Var(X | S) − Var(X | S, V) is
    // Cov(X, V | S)² / Var(V | S), so no difference of nearly equal terms is formed.
    let ux_given = |given: &[usize]| (0.5 * (cond_var(&m, X, given) / n).ln_1p()).max(0.0);
    let uv_given = |given: &[usize], v: usize| {
        let mut with: Vec<usize> = given.to_vec();
        with.push(v);
        let drop = cond_cov(&m, X, v, given).powi(2) / cond_var(&m, v, given);
        (0.5 * (drop / (cond_var(&m, X, &with) + n)).ln_1p()).max(0.0)
    };
    GaussianInformations {
        i_ux: ux_given(&[]),
        i_uy: uv_given(&[], Y),
        i_uz: uv_given(&[], Z),
        i_ux_given_y: ux_given(&[Y]),
        i_uy_given_z: uv_given(&[Z], Y),
        i_ux_given_z: ux_given(&[Z]),
    }
}

/// Noise variance for which the Gaussian test channel sits on the boundary at `r_p`.
///
/// `I(U;X|Y) = ½·ln(1 + Σ_x|y / N)` inverts in closed form to
/// `N = Σ_x|y / (e^{2R_p} − 1)`.
pub fn design_auxiliary_noise(dec: &GaussianDecomposition, r_p: f64) -> Result<AuxiliaryChannel, RateError> {
    if r_p.is_nan() || r_p <= 0.0 || r_p.is_infinite() {
        return Err(RateError::NoSolution(r_p));
    }
    let cond = dec.cond_var_x_given_y();
    let noise_var = cond / (2.0 * r_p).exp_m1();
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(RateError::NoSolution(r_p));
    }
    Ok(AuxiliaryChannel { noise_var })
}

/// Both sides of the conditional entropy-power step of the converse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpiCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Compares `I(U;X|Z) − I(U;Y|Z)` against the minimum public rate the
/// converse allows at key rate `I(U;Y|Z)`. Gaussian auxiliaries meet it with equality.
pub fn epi_converse_check(dec: &GaussianDecomposition, aux: &AuxiliaryChannel) -> EpiCheck {
    let info = gaussian_mutual_informations(dec, aux);
    let a = info.i_uy_given_z;
    let lhs = info.i_ux_given_z - info.i_uy_given_z;
    let num = dec.cond_var_y_given_z - dec.cond_var_y_given_xz;
    // Σ_y|z·e^{−2a} − Σ_y|xz = (Σ_y|z − Σ_y|xz) + Σ_y|z·(e^{−2a} − 1)
    let den = num + dec.cond_var_y_given_z * (-2.0 * a).exp_m1();
    let rhs = if a == 0.0 { 0.0 } else { 0.5 * (num / den).ln() - a };
    EpiCheck { lhs, rhs, gap: lhs - rhs }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub r_p: f64,
    pub r_k: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub class: DegradednessClass,
    pub rows: Vec<CurveRow>,
}

/// Validates, reduces to the degraded case and evaluates the boundary on `grid`.
pub fn tradeoff_curve(sigma: &CovarianceTriple, grid: &[f64]) -> Result<TradeoffCurve, RateError> {
    let sigma = validate(*sigma)?;
    if grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(RateError::InvalidGrid);
    }
    let report = classify_and_reduce(&sigma);
    let rows = match report.reduced {
        None => {
            let bound = key_rate_upper_bound(&decompose(&sigma));
            grid.iter().map(|&r_p| CurveRow { r_p, r_k: 0.0, upper_bound: bound }).collect()
        }
        Some(reduced) => {
            let dec = decompose(&reduced);
            let bound = key_rate_upper_bound(&dec);
            grid.par_iter()
                .map(|&r_p| {
                    let r_k = optimal_key_rate(&dec, r_p)?;
                    Ok(CurveRow { r_p, r_k, upper_bound: bound })
                })
                .collect::<Result<Vec<_>, RateError>>()?
        }
    };
    Ok(TradeoffCurve { class: report.class, rows })
}

//! Per-symbol Gaussian log-density ratios behind the sets `T_n`, `A_n`, `B_n`.

use crate::covariance::GaussianDecomposition;
use crate::region::AuxiliaryChannel;

/// Coefficients of the three log-likelihood ratios for `U = X + W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityModel {
    /// `Var(W)`.
    pub noise_var: f64,
    /// `Var(U) = Σ_x + Var(W)`.
    pub var_u: f64,
    pub var_y: f64,
    /// `E[Y|U] = gain_yu · U`.
    pub gain_yu: f64,
    pub var_y_given_u: f64,
    /// `E[X|Z] = k_xz · Z`.
    pub k_xz: f64,
    pub var_x_given_z: f64,
    /// `E[X|U,Z] = gain_xu · U + gain_xz · Z`.
    pub gain_xu: f64,
    pub gain_xz: f64,
    pub var_x_given_uz: f64,
}

impl DensityModel {
    pub fn new(dec: &GaussianDecomposition, aux: &AuxiliaryChannel) -> Self {
        let s = dec.reconstruct();
        let var_u = s.sigma_x + aux.noise_var;
        let gain_yu = s.sigma_xy / var_u;
        let var_y_given_u = s.sigma_y - s.sigma_xy * gain_yu;
        // Regress X on (U, Z): Cov(U,Z) = Σ_xz, Cov(X,U) = Σ_x, Cov(X,Z) = Σ_xz.
        let det = var_u * s.sigma_z - s.sigma_xz * s.sigma_xz;
        let gain_xu = (s.sigma_x * s.sigma_z - s.sigma_xz * s.sigma_xz) / det;
        let gain_xz = (s.sigma_xz * var_u - s.sigma_x * s.sigma_xz) / det;
        let var_x_given_uz = s.sigma_x - gain_xu * s.sigma_x - gain_xz * s.sigma_xz;
        DensityModel {
            noise_var: aux.noise_var,
            var_u,
            var_y: s.sigma_y,
            gain_yu,
            var_y_given_u,
            k_xz: dec.k_xz,
            var_x_given_z: dec.cond_var_x_given_z,
            gain_xu,
            gain_xz,
            var_x_given_uz,
        }
    }

    /// `ln p(u|x) − ln p(u)` for one symbol.
    #[inline]
    pub fn log_ratio_ux(&self, u: f64, x: f64) -> f64 {
        let d = u - x;
        0.5 * (self.var_u / self.noise_var).ln() - d * d / (2.0 * self.noise_var) + u * u / (2.0 * self.var_u)
    }

    /// `ln p(y|u) − ln p(y)` for one symbol.
    #[inline]
    pub fn log_ratio_yu(&self, u: f64, y: f64) -> f64 {
        let d = y - self.gain_yu * u;
        0.5 * (self.var_y / self.var_y_given_u).ln() - d * d / (2.0 * self.var_y_given_u)
            + y * y / (2.0 * self.var_y)
    }

    /// `ln p(x|u,z) − ln p(x|z)` for one symbol.
    #[inline]
    pub fn log_ratio_x_uz(&self, u: f64, x: f64, z: f64) -> f64 {
        let d1 = x - self.gain_xu * u - self.gain_xz * z;
        let d0 = x - self.k_xz * z;
        0.5 * (self.var_x_given_z / self.var_x_given_uz).ln() - d1 * d1 / (2.0 * self.var_x_given_uz)
            + d0 * d0 / (2.0 * self.var_x_given_z)
    }
}

fn mean_of(len: usize, f: impl Fn(usize) -> f64) -> f64 {
    assert!(len > 0, "information density of an empty block");
    (0..len).map(f).sum::<f64>() / len as f64
}

/// `(1/n)·ln p(uⁿ|xⁿ)/p(uⁿ)`; membership in `T_n` is `≤ t`.
pub fn info_density_ux(u: &[f64], x: &[f64], model: &DensityModel) -> f64 {
    assert_eq!(u.len(), x.len());
    mean_of(u.len(), |i| model.log_ratio_ux(u[i], x[i]))
}

/// `(1/n)·ln p(yⁿ|uⁿ)/p(yⁿ)`; membership in `A_n` is `≥ α`.
pub fn info_density_yu(u: &[f64], y: &[f64], model: &DensityModel) -> f64 {
    assert_eq!(u.len(), y.len());
    mean_of(u.len(), |i| model.log_ratio_yu(u[i], y[i]))
}

/// `(1/n)·ln p(xⁿ|uⁿ,zⁿ)/p(xⁿ|zⁿ)`; membership in `B_n` is `≥ β`.
pub fn info_density_x_uz(u: &[f64], x: &[f64], z: &[f64], model: &DensityModel) -> f64 {
    assert!(u.len() == x.len() && x.len() == z.len());
    mean_of(u.len(), |i| model.log_ratio_x_uz(u[i], x[i], z[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{decompose, CovarianceTriple};
    use std::f64::consts::PI;

    fn normal_pdf(v: f64, mean: f64, var: f64) -> f64 {
        (-(v - mean) * (v - mean) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }

    #[test]
    fn single_symbol_at_origin() {
        let dec = decompose(&CovarianceTriple::unit(0.8, 0.4, 0.5));
        let m = DensityModel::new(&dec, &AuxiliaryChannel { noise_var: 0.5 });
        let expected = (normal_pdf(0.0, 0.0, 0.5) / normal_pdf(0.0, 0.0, 1.5)).ln();
        assert!((info_density_ux(&[0.0], &[0.0], &m) - expected).abs() < 1e-14);
    }

    #[test]
    fn ratios_match_explicit_densities() {
        let dec = decompose(&CovarianceTriple::new(2.0, 1.5, 1.0, 0.9, 0.3, 0.4));
        let m = DensityModel::new(&dec, &AuxiliaryChannel { noise_var: 0.7 });
        let (u, x, y) = (0.3, -0.8, 1.1);
        let yu = normal_pdf(y, m.gain_yu * u, m.var_y_given_u) / normal_pdf(y, 0.0, m.var_y);
        assert!((m.log_ratio_yu(u, y) - yu.ln()).abs() < 1e-13);
        let z = 0.25;
        let xuz = normal_pdf(x, m.gain_xu * u + m.gain_xz * z, m.var_x_given_uz)
            / normal_pdf(x, m.k_xz * z, m.var_x_given_z);
        assert!((m.log_ratio_x_uz(u, x, z) - xuz.ln()).abs() < 1e-13);
    }

    #[test]
    fn regression_of_x_on_u_and_z() {
        // With Z independent of X the Z gain vanishes and Var(X|U) = Σ_x·N/(Σ_x+N).
        let dec = decompose(&CovarianceTriple::new(2.0, 1.0, 1.0, 0.5, 0.0, 0.0));
        let m = DensityModel::new(&dec, &AuxiliaryChannel { noise_var: 1.0 });
        assert!(m.gain_xz.abs() < 1e-15);
        assert!((m.var_x_given_uz - 2.0 / 3.0).abs() < 1e-14);
    }
}

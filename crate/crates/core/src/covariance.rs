//! Joint Gaussian model of the three observations `(X, Y, Z)`.
//!
//! `X` is Alice's source, `Y` Bob's and `Z` Eve's. Everything downstream
//! is a function of the 3×3 covariance held in [`CovarianceTriple`].

use thiserror::Error;

/// Absolute floor applied to the leading principal minors.
pub const MINOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("NotPositiveDefinite: covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("ZeroXYCorrelation: sigma_xy = 0, no key can be agreed")]
    ZeroXYCorrelation,
}

impl ModelError {
    /// Machine-readable error name.
    pub fn name(&self) -> &'static str {
        match self {
            ModelError::NotPositiveDefinite => "NotPositiveDefinite",
            ModelError::ZeroXYCorrelation => "ZeroXYCorrelation",
        }
    }
}

/// Covariance of the zero-mean jointly Gaussian triple `(X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceTriple {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    pub sigma_xy: f64,
    pub sigma_xz: f64,
    pub sigma_yz: f64,
}

impl CovarianceTriple {
    pub const fn new(
        sigma_x: f64,
        sigma_y: f64,
        sigma_z: f64,
        sigma_xy: f64,
        sigma_xz: f64,
        sigma_yz: f64,
    ) -> Self {
        CovarianceTriple { sigma_x, sigma_y, sigma_z, sigma_xy, sigma_xz, sigma_yz }
    }

    /// Unit variances with the given pairwise correlations.
    pub const fn unit(rho_xy: f64, rho_xz: f64, rho_yz: f64) -> Self {
        CovarianceTriple::new(1.0, 1.0, 1.0, rho_xy, rho_xz, rho_yz)
    }

    /// Row-major symmetric matrix in the order `(X, Y, Z)`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.sigma_x, self.sigma_xy, self.sigma_xz],
            [self.sigma_xy, self.sigma_y, self.sigma_yz],
            [self.sigma_xz, self.sigma_yz, self.sigma_z],
        ]
    }

    /// Leading principal minors `(Δ1, Δ2, Δ3)`.
    pub fn leading_minors(&self) -> (f64, f64, f64) {
        let m = self.matrix();
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        (d1, d2, d3)
    }

    pub fn rho2_xy(&self) -> f64 {
        self.sigma_xy * self.sigma_xy / (self.sigma_x * self.sigma_y)
    }

    pub fn rho2_xz(&self) -> f64 {
        self.sigma_xz * self.sigma_xz / (self.sigma_x * self.sigma_z)
    }

    /// `sigma_xz·sigma_y − sigma_xy·sigma_yz`; zero iff `X – Y – Z` is a Markov chain.
    pub fn markov_defect(&self) -> f64 {
        self.sigma_xz * self.sigma_y - self.sigma_xy * self.sigma_yz
    }

    /// Rescale each coordinate independently: `X → a·X`, `Y → b·Y`, `Z → c·Z`.
    pub fn rescaled(&self, a: f64, b: f64, c: f64) -> Self {
        CovarianceTriple::new(
            a * a * self.sigma_x,
            b * b * self.sigma_y,
            c * c * self.sigma_z,
            a * b * self.sigma_xy,
            a * c * self.sigma_xz,
            b * c * self.sigma_yz,
        )
    }

    /// Lower-triangular Cholesky factor. Only meaningful on validated triples.
    pub fn cholesky(&self) -> [[f64; 3]; 3] {
        let m = self.matrix();
        let mut l = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = m[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    l[i][j] = s.max(0.0).sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        l
    }
}

/// Accepts the triple iff its matrix is positive definite and `sigma_xy ≠ 0`.
pub fn validate(candidate: CovarianceTriple) -> Result<CovarianceTriple, ModelError> {
    let c = &candidate;
    let entries = [c.sigma_x, c.sigma_y, c.sigma_z, c.sigma_xy, c.sigma_xz, c.sigma_yz];
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NotPositiveDefinite);
    }
    let (d1, d2, d3) = candidate.leading_minors();
    if d1 <= MINOR_FLOOR || d2 <= MINOR_FLOOR || d3 <= MINOR_FLOOR {
        return Err(ModelError::NotPositiveDefinite);
    }
    if candidate.sigma_xy == 0.0 {
        return Err(ModelError::ZeroXYCorrelation);
    }
    Ok(candidate)
}

/// Linear-Gaussian decomposition
/// `X = k_xz·Z + W1`, `Y = k_yx·X + k_yz·Z + W2`.
///
/// `sigma_z` is carried along so the full covariance can be rebuilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDecomposition {
    pub k_xz: f64,
    pub k_yx: f64,
    pub k_yz: f64,
    pub var_w1: f64,
    pub var_w2: f64,
    pub cond_var_x_given_z: f64,
    pub cond_var_y_given_z: f64,
    pub cond_var_y_given_xz: f64,
    pub sigma_z: f64,
}

impl GaussianDecomposition {
    /// Rebuild the covariance triple the coefficients describe.
    pub fn reconstruct(&self) -> CovarianceTriple {
        let sigma_z = self.sigma_z;
        let sigma_xz = self.k_xz * sigma_z;
        let sigma_x = self.k_xz * self.k_xz * sigma_z + self.var_w1;
        let k_y_total = self.k_yx * self.k_xz + self.k_yz;
        let sigma_yz = k_y_total * sigma_z;
        let sigma_xy = self.k_yx * sigma_x + self.k_yz * sigma_xz;
        let sigma_y = k_y_total * k_y_total * sigma_z + self.k_yx * self.k_yx * self.var_w1 + self.var_w2;
        CovarianceTriple::new(sigma_x, sigma_y, sigma_z, sigma_xy, sigma_xz, sigma_yz)
    }

    /// `Var(X | Y)`, needed when sizing the auxiliary channel.
    pub fn cond_var_x_given_y(&self) -> f64 {
        let s = self.reconstruct();
        s.sigma_x - s.sigma_xy * s.sigma_xy / s.sigma_y
    }
}

pub fn decompose(sigma: &CovarianceTriple) -> GaussianDecomposition {
    let s = sigma;
    let k_xz = s.sigma_xz / s.sigma_z;
    // [k_yz k_yx] = [Σ_yz Σ_yx] · [[Σ_z Σ_zx] [Σ_xz Σ_x]]^{-1}
    let det = s.sigma_z * s.sigma_x - s.sigma_xz * s.sigma_xz;
    let k_yz = (s.sigma_yz * s.sigma_x - s.sigma_xy * s.sigma_xz) / det;
    let k_yx = (s.sigma_xy * s.sigma_z - s.sigma_yz * s.sigma_xz) / det;
    let cond_var_x_given_z = s.sigma_x - k_xz * s.sigma_xz;
    let cond_var_y_given_xz = s.sigma_y - k_yx * s.sigma_xy - k_yz * s.sigma_yz;
    let cond_var_y_given_z = s.sigma_y - s.sigma_yz * s.sigma_yz / s.sigma_z;
    GaussianDecomposition {
        k_xz,
        k_yx,
        k_yz,
        var_w1: cond_var_x_given_z,
        var_w2: cond_var_y_given_xz,
        cond_var_x_given_z,
        cond_var_y_given_z,
        cond_var_y_given_xz,
        sigma_z: s.sigma_z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegradednessClass {
    /// `ρ²_xy > ρ²_xz`: an equivalent degraded chain `X – Y – Z̄` exists.
    DegradableXyz,
    /// `ρ²_xy ≤ ρ²_xz`: no positive key rate.
    Useless,
}

impl DegradednessClass {
    pub fn name(&self) -> &'static str {
        match self {
            DegradednessClass::DegradableXyz => "DEGRADABLE_XYZ",
            DegradednessClass::Useless => "USELESS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradednessReport {
    pub rho2_xy: f64,
    pub rho2_xz: f64,
    pub class: DegradednessClass,
    /// Degraded triple with the same `(X,Y)` and `(X,Z)` marginals.
    pub reduced: Option<CovarianceTriple>,
    /// Variance of the fresh noise in `Z̄ = (Σ_xz/Σ_xy)·Y + N̂`.
    pub reduced_noise_var: Option<f64>,
}

/// Classify by squared correlations and, when possible, build the degraded equivalent.
///
/// The reduced triple keeps every entry except `sigma_yz`, which becomes
/// `(Σ_xz/Σ_xy)·Σ_y`, so both observed marginals are copied bit for bit.
pub fn classify_and_reduce(sigma: &CovarianceTriple) -> DegradednessReport {
    let rho2_xy = sigma.rho2_xy();
    let rho2_xz = sigma.rho2_xz();
    // Compare Σ_xy²·Σ_z against Σ_xz²·Σ_y to avoid dividing twice.
    let lhs = sigma.sigma_xy * sigma.sigma_xy * sigma.sigma_z;
    let rhs = sigma.sigma_xz * sigma.sigma_xz * sigma.sigma_y;
    if lhs <= rhs {
        return DegradednessReport {
            rho2_xy,
            rho2_xz,
            class: DegradednessClass::Useless,
            reduced: None,
            reduced_noise_var: None,
        };
    }
    let reduced = if sigma.markov_defect() == 0.0 {
        *sigma
    } else {
        let ratio = sigma.sigma_xz / sigma.sigma_xy;
        CovarianceTriple { sigma_yz: ratio * sigma.sigma_y, ..*sigma }
    };
    let noise =
        sigma.sigma_z - sigma.sigma_xz * sigma.sigma_xz * sigma.sigma_y / (sigma.sigma_xy * sigma.sigma_xy);
    DegradednessReport {
        rho2_xy,
        rho2_xz,
        class: DegradednessClass::DegradableXyz,
        reduced: Some(reduced),
        reduced_noise_var: Some(noise),
    }
}

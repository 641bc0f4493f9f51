//! Finite stand-in for `(U, X, Y, Z)` on which the security quantities of a
//! protocol can be computed exactly, by enumeration instead of sampling.

mod quadrature;
pub mod security;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::covariance::{validate, CovarianceTriple, ModelError};
use crate::region::AuxiliaryChannel;

use quadrature::{for_each_node, interval_mass, normal_pdf};

pub use security::{
    exact_security, verify_pa_lemma, FiniteMap, FiniteProtocol, PaLemmaReport, SecurityMetrics,
};

/// Largest enumeration `exact_security` will attempt.
pub const MAX_TERMS: f64 = 1e8;
pub const MAX_CELLS: usize = 16;
pub const MAX_BLOCK_LEN: usize = 4;

/// Tolerance on the quadrature mass before renormalization.
pub const MASS_TOLERANCE: f64 = 1e-9;

const TRUNCATE_SDS: f64 = 10.0;
const PANEL_SDS: f64 = 1.5;
const MAX_PANELS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurrogateError {
    #[error("InvalidCells: {0} is outside 2..=16")]
    InvalidCells(usize),
    #[error("InvalidBlockLength: n = {0} is outside 1..=4")]
    InvalidBlockLength(usize),
    #[error("IntegrationFailure: quadrature mass {mass} differs from 1 by more than 1e-9")]
    IntegrationFailure { mass: f64 },
    #[error("StateSpaceTooLarge: {terms} terms exceeds {cap}")]
    StateSpaceTooLarge { terms: f64, cap: f64 },
    #[error("InvalidTable: {0}")]
    InvalidTable(String),
    #[error("InvalidSizes: {0}")]
    InvalidSizes(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SurrogateError {
    pub fn name(&self) -> &'static str {
        match self {
            SurrogateError::InvalidCells(_) => "InvalidCells",
            SurrogateError::InvalidBlockLength(_) => "InvalidBlockLength",
            SurrogateError::IntegrationFailure { .. } => "IntegrationFailure",
            SurrogateError::StateSpaceTooLarge { .. } => "StateSpaceTooLarge",
            SurrogateError::InvalidTable(_) => "InvalidTable",
            SurrogateError::InvalidSizes(_) => "InvalidSizes",
            SurrogateError::Model(e) => e.name(),
        }
    }
}

/// Joint law of `(U-cell, X-cell, Y-cell, Z-cell)`, all on `cells` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSurrogate {
    pub cells: usize,
    /// `p(u, x, y, z)` at `((u·c + x)·c + y)·c + z`.
    pub table: Vec<f64>,
    /// Quadrature mass before renormalization (1 for tables given directly).
    pub raw_mass: f64,
}

impl DiscreteSurrogate {
    /// Wraps a table, which must be non-negative and sum to 1 within 1e-12.
    pub fn from_table(cells: usize, table: Vec<f64>) -> Result<Self, SurrogateError> {
        if !(2..=MAX_CELLS).contains(&cells) {
            return Err(SurrogateError::InvalidCells(cells));
        }
        if table.len() != cells.pow(4) {
            return Err(SurrogateError::InvalidTable(format!(
                "expected {} entries, got {}",
                cells.pow(4),
                table.len()
            )));
        }
        if table.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(SurrogateError::InvalidTable("negative or non-finite entry".into()));
        }
        let mass: f64 = table.iter().sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(SurrogateError::InvalidTable(format!("mass {mass}")));
        }
        Ok(DiscreteSurrogate { cells, table, raw_mass: 1.0 })
    }

    #[inline]
    pub fn p(&self, u: usize, x: usize, y: usize, z: usize) -> f64 {
        let c = self.cells;
        self.table[((u * c + x) * c + y) * c + z]
    }

    /// Marginal over the variables whose flag is set, in `(u, x, y, z)` order,
    /// indexed row-major over the kept variables.
    pub fn marginal(&self, keep: [bool; 4]) -> Vec<f64> {
        let c = self.cells;
        let kept = keep.iter().filter(|k| **k).count();
        let mut out = vec![0.0; c.pow(kept as u32)];
        for (i, p) in self.table.iter().enumerate() {
            let digits = [i / (c * c * c), (i / (c * c)) % c, (i / c) % c, i % c];
            let mut idx = 0;
            for (d, k) in digits.iter().zip(keep) {
                if k {
                    idx = idx * c + d;
                }
            }
            out[idx] += p;
        }
        out
    }

    /// Single-letter mutual informations in nats.
    pub fn informations(&self) -> SurrogateInformations {
        let h = |keep: [bool; 4]| -> f64 {
            self.marginal(keep).iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
        };
        let hu = h([true, false, false, false]);
        let hx = h([false, true, false, false]);
        let hy = h([false, false, true, false]);
        let hz = h([false, false, false, true]);
        let hux = h([true, true, false, false]);
        let huy = h([true, false, true, false]);
        let huz = h([true, false, false, true]);
        let hxz = h([false, true, false, true]);
        let huxz = h([true, true, false, true]);
        SurrogateInformations {
            i_ux: hu + hx - hux,
            i_uy: hu + hy - huy,
            i_uz: hu + hz - huz,
            i_ux_given_z: huz + hxz - huxz - hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateInformations {
    pub i_ux: f64,
    pub i_uy: f64,
    pub i_uz: f64,
    pub i_ux_given_z: f64,
}

/// Equiprobable cell edges of `N(0, var)`, including the infinite ends.
fn cell_edges(var: f64, cells: usize) -> Vec<f64> {
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let sd = var.sqrt();
    (0..=cells)
        .map(|k| match k {
            0 => f64::NEG_INFINITY,
            k if k == cells => f64::INFINITY,
            k => sd * std.inverse_cdf(k as f64 / cells as f64),
        })
        .collect()
}

/// Bins each of `U = X + W`, `X`, `Y`, `Z` into `cells` equiprobable cells and
/// integrates the joint Gaussian density over every cell box.
///
/// The `x` and `y` axes use composite 32-node Gauss–Legendre rules; the `U`
/// and `Z` axes are integrated in closed form, since given `x` (and `y`)
/// they are one-dimensional Gaussians.
pub fn discretize(
    sigma: &CovarianceTriple,
    aux: &AuxiliaryChannel,
    cells: usize,
) -> Result<DiscreteSurrogate, SurrogateError> {
    if !(2..=MAX_CELLS).contains(&cells) {
        return Err(SurrogateError::InvalidCells(cells));
    }
    let s = validate(*sigma)?;
    let noise = aux.noise_var;
    if !(noise.is_finite() && noise > 0.0) {
        return Err(SurrogateError::InvalidTable(format!("auxiliary noise variance {noise}")));
    }
    let ue = cell_edges(s.sigma_x + noise, cells);
    let xe = cell_edges(s.sigma_x, cells);
    let ye = cell_edges(s.sigma_y, cells);
    let ze = cell_edges(s.sigma_z, cells);

    let sx = s.sigma_x.sqrt();
    let sn = noise.sqrt();
    let slope_yx = s.sigma_xy / s.sigma_x;
    let sy_x = (s.sigma_y - s.sigma_xy * slope_yx).sqrt();
    let det = s.sigma_x * s.sigma_y - s.sigma_xy * s.sigma_xy;
    let cz_x = (s.sigma_xz * s.sigma_y - s.sigma_yz * s.sigma_xy) / det;
    let cz_y = (s.sigma_yz * s.sigma_x - s.sigma_xz * s.sigma_xy) / det;
    let sz_xy = (s.sigma_z - cz_x * s.sigma_xz - cz_y * s.sigma_yz).sqrt();

    let scale = |sd: f64, gain: f64| if gain == 0.0 { f64::INFINITY } else { sd / gain.abs() };
    let hx = PANEL_SDS * sx.min(sn).min(scale(sy_x, slope_yx)).min(scale(sz_xy, cz_x));
    let hy = PANEL_SDS * sy_x.min(scale(sz_xy, cz_y));

    let c = cells;
    let slabs: Vec<Vec<f64>> = (0..c)
        .into_par_iter()
        .map(|xi| {
            // slab[(u·c + y)·c + z] for this x-cell
            let mut slab = vec![0.0; c * c * c];
            let a = xe[xi].max(-TRUNCATE_SDS * sx);
            let b = xe[xi + 1].min(TRUNCATE_SDS * sx);
            let mut pu = vec![0.0; c];
            let mut inner = vec![0.0; c * c];
            let mut pz = vec![0.0; c];
            for_each_node(a, b, hx, MAX_PANELS, |x, wx| {
                let wx = wx * normal_pdf(x, sx);
                for (k, p) in pu.iter_mut().enumerate() {
                    *p = interval_mass(ue[k], ue[k + 1], x, sn);
                }
                inner.iter_mut().for_each(|v| *v = 0.0);
                let my = slope_yx * x;
                for yj in 0..c {
                    let ya = ye[yj].max(my - TRUNCATE_SDS * sy_x);
                    let yb = ye[yj + 1].min(my + TRUNCATE_SDS * sy_x);
                    for_each_node(ya, yb, hy, MAX_PANELS, |y, wy| {
                        let wy = wy * normal_pdf(y - my, sy_x);
                        let mz = cz_x * x + cz_y * y;
                        for (l, p) in pz.iter_mut().enumerate() {
                            *p = interval_mass(ze[l], ze[l + 1], mz, sz_xy);
                        }
                        for l in 0..c {
                            inner[yj * c + l] += wy * pz[l];
                        }
                    });
                }
                for k in 0..c {
                    let f = wx * pu[k];
                    for (j, v) in inner.iter().enumerate() {
                        slab[k * c * c + j] += f * v;
                    }
                }
            });
            slab
        })
        .collect();

    let mut table = vec![0.0; c.pow(4)];
    for (xi, slab) in slabs.iter().enumerate() {
        for u in 0..c {
            for yz in 0..c * c {
                table[(u * c + xi) * c * c + yz] = slab[u * c * c + yz];
            }
        }
    }
    let mass: f64 = table.iter().sum();
    if !((mass - 1.0).abs() <= MASS_TOLERANCE) {
        return Err(SurrogateError::IntegrationFailure { mass });
    }
    table.iter_mut().for_each(|p| *p /= mass);
    Ok(DiscreteSurrogate { cells, table, raw_mass: mass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_triple_gives_uniform_table() {
        let sigma = CovarianceTriple::new(1.0, 1.0, 1.0, 1e-300, 0.0, 0.0);
        // U is tied to X, so only (X, Y, Z) can be independent; check the xyz marginal.
        let sur = discretize(&sigma, &AuxiliaryChannel { noise_var: 1.0 }, 2).unwrap();
        for p in sur.marginal([false, true, true, true]) {
            assert!((p - 0.125).abs() < 1e-12, "{p}");
        }
        let ux = sur.marginal([true, true, false, false]);
        for u in 0..2 {
            for x in 0..2 {
                for yz in 0..4 {
                    let p = sur.table[(u * 2 + x) * 4 + yz];
                    assert!((p - ux[u * 2 + x] / 4.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn marginals_are_equiprobable() {
        let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
        let sur = discretize(&sigma, &AuxiliaryChannel { noise_var: 0.2095 }, 4).unwrap();
        assert!((sur.raw_mass - 1.0).abs() < 1e-9);
        for keep in [
            [true, false, false, false],
            [false, true, false, false],
            [false, false, true, false],
            [false, false, false, true],
        ] {
            for p in sur.marginal(keep) {
                assert!((p - 0.25).abs() < 1e-9, "{p}");
            }
        }
    }

    #[test]
    fn bad_cells() {
        let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
        let aux = AuxiliaryChannel { noise_var: 1.0 };
        assert_eq!(discretize(&sigma, &aux, 1), Err(SurrogateError::InvalidCells(1)));
        assert_eq!(discretize(&sigma, &aux, 17), Err(SurrogateError::InvalidCells(17)));
    }

    #[test]
    fn informations_are_ordered() {
        let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
        let sur = discretize(&sigma, &AuxiliaryChannel { noise_var: 0.2095 }, 4).unwrap();
        let i = sur.informations();
        assert!(i.i_ux > i.i_uy && i.i_uy > i.i_uz && i.i_uz > 0.0);
        // Cell quantization breaks the U–X–Z chain, so only a loose relation survives.
        assert!(i.i_ux_given_z > 0.0 && i.i_ux_given_z < i.i_ux + 1e-12);
    }
}

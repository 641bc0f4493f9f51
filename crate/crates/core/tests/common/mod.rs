#![allow(dead_code)]

use gauss_ska::covariance::{validate, CovarianceTriple};
use gauss_ska::rng::WordStream;

pub const WORKED: CovarianceTriple = CovarianceTriple::unit(0.8, 0.4, 0.5);

pub const WORKED_CONFIG: &str =
    "sigma_x = 1\nsigma_y = 1\nsigma_z = 1\nsigma_xy = 0.8\nsigma_xz = 0.4\nsigma_yz = 0.5\n";

pub fn uniform(w: &mut WordStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * w.unit()
}

fn signed(w: &mut WordStream, lo: f64, hi: f64) -> f64 {
    let v = uniform(w, lo, hi);
    if w.below(2) == 0 {
        v
    } else {
        -v
    }
}

fn from_correlations(w: &mut WordStream, rxy: f64, rxz: f64, ryz: f64) -> CovarianceTriple {
    let (a, b, c) = (uniform(w, 0.3, 3.0), uniform(w, 0.3, 3.0), uniform(w, 0.3, 3.0));
    CovarianceTriple::new(a, b, c, rxy * (a * b).sqrt(), rxz * (a * c).sqrt(), ryz * (b * c).sqrt())
}

/// Random X–Y–Z chain: `sigma_yz` is set so that `sigma_xz·sigma_y = sigma_xy·sigma_yz`.
pub fn random_degraded(w: &mut WordStream) -> CovarianceTriple {
    loop {
        let rxy = signed(w, 0.1, 0.95);
        let ryz = signed(w, 0.05, 0.95);
        let mut s = from_correlations(w, rxy, rxy * ryz, ryz);
        s.sigma_yz = s.sigma_xz * s.sigma_y / s.sigma_xy;
        if validate(s).is_ok() {
            return s;
        }
    }
}

/// Any positive-definite triple with `sigma_xy ≠ 0`.
pub fn random_valid(w: &mut WordStream) -> CovarianceTriple {
    loop {
        let (rxy, rxz, ryz) = (signed(w, 0.05, 0.95), signed(w, 0.0, 0.95), signed(w, 0.0, 0.95));
        let s = from_correlations(w, rxy, rxz, ryz);
        if validate(s).is_ok() {
            return s;
        }
    }
}

/// `rho²_xy > rho²_xz` and not already a chain.
pub fn random_degradable_not_degraded(w: &mut WordStream) -> CovarianceTriple {
    loop {
        let s = random_valid(w);
        if s.rho2_xy() > s.rho2_xz() + 1e-6 && s.markov_defect().abs() > 1e-6 {
            return s;
        }
    }
}

pub fn random_useless(w: &mut WordStream) -> CovarianceTriple {
    loop {
        let s = random_valid(w);
        if s.sigma_xy * s.sigma_xy * s.sigma_z <= s.sigma_xz * s.sigma_xz * s.sigma_y {
            return s;
        }
    }
}

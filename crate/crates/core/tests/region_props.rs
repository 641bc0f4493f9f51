mod common;

use gauss_ska::covariance::{classify_and_reduce, decompose, CovarianceTriple, GaussianDecomposition};
use gauss_ska::region::{
    design_auxiliary_noise, gaussian_mutual_informations, key_rate_upper_bound, optimal_key_rate,
    required_public_rate, AuxiliaryChannel,
};
use gauss_ska::rng::WordStream;

use common::*;

const U: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

fn joint(s: &CovarianceTriple, noise: f64) -> [[f64; 4]; 4] {
    [
        [s.sigma_x + noise, s.sigma_x, s.sigma_xy, s.sigma_xz],
        [s.sigma_x, s.sigma_x, s.sigma_xy, s.sigma_xz],
        [s.sigma_xy, s.sigma_xy, s.sigma_y, s.sigma_yz],
        [s.sigma_xz, s.sigma_xz, s.sigma_yz, s.sigma_z],
    ]
}

/// ln det of the principal submatrix on `idx`, by pivoted elimination.
fn log_det(m: &[[f64; 4]; 4], idx: &[usize]) -> f64 {
    let k = idx.len();
    let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect();
    let mut acc = 0.0;
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        acc += a[c][c].abs().ln();
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for j in c..k {
                a[r][j] -= f * a[c][j];
            }
        }
    }
    acc
}

/// `I(A;B|C)` for Gaussian coordinates, straight from determinants.
fn cmi(m: &[[f64; 4]; 4], a: usize, b: usize, c: &[usize]) -> f64 {
    let with = |extra: &[usize]| {
        let mut v: Vec<usize> = extra.to_vec();
        v.extend_from_slice(c);
        v
    };
    let ld_c = if c.is_empty() { 0.0 } else { log_det(m, c) };
    0.5 * (log_det(m, &with(&[a])) + log_det(m, &with(&[b])) - log_det(m, &with(&[a, b])) - ld_c)
}

fn reduced_degraded(w: &mut WordStream) -> (CovarianceTriple, GaussianDecomposition) {
    let s = classify_and_reduce(&random_degraded(w)).reduced.unwrap();
    (s, decompose(&s))
}

#[test]
fn key_rate_matches_determinant_oracle() {
    let mut w = WordStream::new(11, 0);
    for _ in 0..200 {
        let (s, dec) = reduced_degraded(&mut w);
        let r_p = uniform(&mut w, 0.01, 3.0);
        let aux = design_auxiliary_noise(&dec, r_p).unwrap();
        let m = joint(&s, aux.noise_var);
        assert!((cmi(&m, U, X, &[Y]) - r_p).abs() < 1e-9);
        let rk = optimal_key_rate(&dec, r_p).unwrap();
        assert!((cmi(&m, U, Y, &[Z]) - rk).abs() < 1e-9, "{s:?} r_p={r_p}");
        let bound =
            0.5 * (log_det(&m, &[X, Z]) + log_det(&m, &[Y, Z]) - log_det(&m, &[X, Y, Z]) - log_det(&m, &[Z]));
        assert!((key_rate_upper_bound(&dec) - bound).abs() < 1e-9);
    }
}

#[test]
fn informations_match_determinant_oracle_on_any_triple() {
    let mut w = WordStream::new(12, 0);
    for _ in 0..200 {
        let s = random_valid(&mut w);
        let noise = s.sigma_x * uniform(&mut w, 0.01, 10.0);
        let info = gaussian_mutual_informations(&decompose(&s), &AuxiliaryChannel { noise_var: noise });
        let m = joint(&s, noise);
        for (got, want) in [
            (info.i_ux, cmi(&m, U, X, &[])),
            (info.i_uy, cmi(&m, U, Y, &[])),
            (info.i_uz, cmi(&m, U, Z, &[])),
            (info.i_ux_given_y, cmi(&m, U, X, &[Y])),
            (info.i_uy_given_z, cmi(&m, U, Y, &[Z])),
            (info.i_ux_given_z, cmi(&m, U, X, &[Z])),
        ] {
            assert!((got - want).abs() < 1e-9, "{got} vs {want} for {s:?}");
        }
    }
}

/// Bisection for `N` with `I(U;X|Y) = r_p`, on a log scale over `(1e-12, 1e12)`.
fn bisect_noise(s: &CovarianceTriple, r_p: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e12f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // I(U;X|Y) decreases in N.
        if cmi(&joint(s, mid.exp()), U, X, &[Y]) > r_p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

#[test]
fn noise_design_matches_bisection() {
    let mut w = WordStream::new(13, 0);
    for _ in 0..100 {
        let (s, dec) = reduced_degraded(&mut w);
        let r_p = uniform(&mut w, 0.01, 4.0);
        let n = design_auxiliary_noise(&dec, r_p).unwrap().noise_var;
        let oracle = bisect_noise(&s, r_p);
        assert!((n / oracle - 1.0).abs() < 1e-8, "{n} vs {oracle}");
    }
}

#[test]
fn doubling_all_variances_doubles_the_noise() {
    let mut w = WordStream::new(14, 0);
    for _ in 0..50 {
        let (s, dec) = reduced_degraded(&mut w);
        let r = uniform(&mut w, 0.05, 3.0);
        let d2 = decompose(&s.rescaled(2f64.sqrt(), 2f64.sqrt(), 2f64.sqrt()));
        let a = design_auxiliary_noise(&dec, r).unwrap().noise_var;
        let b = design_auxiliary_noise(&d2, r).unwrap().noise_var;
        assert!((b / a - 2.0).abs() < 1e-9);
    }
}

#[test]
fn boundary_is_monotone_and_concave() {
    let mut w = WordStream::new(15, 0);
    let grid: Vec<f64> = (0..1000).map(|i| 10.0 * i as f64 / 999.0).collect();
    for _ in 0..50 {
        let (_, dec) = reduced_degraded(&mut w);
        let rk: Vec<f64> = grid.iter().map(|&r| optimal_key_rate(&dec, r).unwrap()).collect();
        let bound = key_rate_upper_bound(&dec);
        assert!(rk.windows(2).all(|p| p[1] >= p[0]));
        assert!(rk.iter().all(|&v| v < bound || (v - bound).abs() < 1e-12));
        for t in rk.windows(3) {
            assert!(t[1] - 0.5 * (t[0] + t[2]) >= -1e-14, "{t:?}");
        }
    }
}

#[test]
fn inverse_round_trip() {
    let mut w = WordStream::new(16, 0);
    for _ in 0..100 {
        let (_, dec) = reduced_degraded(&mut w);
        let r_p = uniform(&mut w, 0.01, 3.0);
        let rk = optimal_key_rate(&dec, r_p).unwrap();
        let back = required_public_rate(&dec, rk).unwrap();
        assert!((back - r_p).abs() < 1e-9, "{back} vs {r_p}");
        let frac = uniform(&mut w, 0.0, 0.999) * key_rate_upper_bound(&dec);
        let rp = required_public_rate(&dec, frac).unwrap();
        assert!((optimal_key_rate(&dec, rp).unwrap() - frac).abs() < 1e-9);
    }
}

#[test]
fn degraded_key_rate_is_a_difference_of_informations() {
    // With X – Y – Z, I(U;Y) − I(U;Z) = I(U;Y|Z).
    let mut w = WordStream::new(17, 0);
    for _ in 0..200 {
        let (_, dec) = reduced_degraded(&mut w);
        let aux = design_auxiliary_noise(&dec, uniform(&mut w, 0.01, 5.0)).unwrap();
        let i = gaussian_mutual_informations(&dec, &aux);
        assert!(i.i_uy - i.i_uz >= i.i_uy_given_z - 1e-10);
        assert!((i.i_uy - i.i_uz - i.i_uy_given_z).abs() < 1e-9);
    }
}

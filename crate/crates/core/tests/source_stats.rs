mod common;

use gauss_ska::covariance::CovarianceTriple;
use gauss_ska::source::{empirical_covariance, moment_standard_error, sample_block, SourceSampler};

use common::WORKED;

fn entries(s: &CovarianceTriple) -> [(f64, f64, f64); 6] {
    [
        (s.sigma_x, s.sigma_x, s.sigma_x),
        (s.sigma_y, s.sigma_y, s.sigma_y),
        (s.sigma_z, s.sigma_z, s.sigma_z),
        (s.sigma_xy, s.sigma_x, s.sigma_y),
        (s.sigma_xz, s.sigma_x, s.sigma_z),
        (s.sigma_yz, s.sigma_y, s.sigma_z),
    ]
}

fn flat(s: &CovarianceTriple) -> [f64; 6] {
    [s.sigma_x, s.sigma_y, s.sigma_z, s.sigma_xy, s.sigma_xz, s.sigma_yz]
}

#[test]
fn moments_within_five_standard_errors() {
    let sigma = CovarianceTriple::new(2.0, 0.5, 1.5, 0.7, -0.6, -0.2);
    let n = 1_000_000;
    let emp = empirical_covariance(&sample_block(&sigma, n, 2024).unwrap());
    for ((truth, vi, vj), got) in entries(&sigma).into_iter().zip(flat(&emp)) {
        let se = moment_standard_error(vi, vj, truth, n);
        assert!((got - truth).abs() < 5.0 * se, "{got} vs {truth} (se {se})");
    }
}

#[test]
fn independent_eavesdropper_is_uncorrelated() {
    let sigma = CovarianceTriple::unit(0.8, 0.0, 0.0);
    let emp = empirical_covariance(&sample_block(&sigma, 1_000_000, 7).unwrap());
    let corr = |c: f64, a: f64, b: f64| c / (a * b).sqrt();
    assert!(corr(emp.sigma_xz, emp.sigma_x, emp.sigma_z).abs() < 0.005);
    assert!(corr(emp.sigma_yz, emp.sigma_y, emp.sigma_z).abs() < 0.005);
    assert!((corr(emp.sigma_xy, emp.sigma_x, emp.sigma_y) - 0.8).abs() < 0.005);
}

#[test]
fn distinct_streams_are_uncorrelated() {
    let s = SourceSampler::new(&WORKED);
    let a = s.sample(1_000_000, 5, 0).unwrap();
    let b = s.sample(1_000_000, 5, 1).unwrap();
    let c: f64 = a.x.iter().zip(&b.x).map(|(p, q)| p * q).sum::<f64>() / a.len() as f64;
    assert!(c.abs() < 0.005);
}

#[test]
fn error_shrinks_like_inverse_root_n() {
    // RMS moment error over seeds, normalized by the analytic standard error at each size.
    let rms = |n: usize, reps: u64| {
        let mut acc = 0.0;
        for seed in 0..reps {
            let emp = empirical_covariance(&sample_block(&WORKED, n, 100 + seed).unwrap());
            acc += flat(&emp).iter().zip(flat(&WORKED)).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        (acc / reps as f64).sqrt()
    };
    let ratio = rms(10_000, 40) / rms(1_000_000, 8);
    assert!((10.0 / 3.0..=30.0).contains(&ratio), "{ratio}");
}

#[test]
fn replay_is_independent_of_thread_count() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_block(&WORKED, 300_001, 42).unwrap())
    };
    let one = run(1);
    let many = run(4);
    let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one.x), bits(&many.x));
    assert_eq!(bits(&one.y), bits(&many.y));
    assert_eq!(bits(&one.z), bits(&many.z));
    assert_eq!(one, sample_block(&WORKED, 300_001, 42).unwrap());
}

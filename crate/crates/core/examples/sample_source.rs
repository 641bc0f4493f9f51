//! Seeded i.i.d. sampling and the standard-error check on empirical moments.
//!
//!     cargo run --release --example sample_source

use gauss_ska::covariance::CovarianceTriple;
use gauss_ska::source::{empirical_covariance, moment_standard_error, sample_block, SourceBlock};

fn main() {
    let sigma = CovarianceTriple::new(2.0, 1.0, 0.5, 0.9, 0.4, 0.1);
    let n = 1_000_000;
    let block = sample_block(&sigma, n, 7).expect("n within cap");
    let emp = empirical_covariance(&block);

    let rows = [
        ("xx", sigma.sigma_x, emp.sigma_x, sigma.sigma_x, sigma.sigma_x),
        ("yy", sigma.sigma_y, emp.sigma_y, sigma.sigma_y, sigma.sigma_y),
        ("zz", sigma.sigma_z, emp.sigma_z, sigma.sigma_z, sigma.sigma_z),
        ("xy", sigma.sigma_xy, emp.sigma_xy, sigma.sigma_x, sigma.sigma_y),
        ("xz", sigma.sigma_xz, emp.sigma_xz, sigma.sigma_x, sigma.sigma_z),
        ("yz", sigma.sigma_yz, emp.sigma_yz, sigma.sigma_y, sigma.sigma_z),
    ];
    println!("entry     true   empirical   z-score");
    for (name, truth, got, vi, vj) in rows {
        let se = moment_standard_error(vi, vj, truth, n);
        println!("{name:>5} {truth:>8.4} {got:>11.5} {:>9.2}", (got - truth) / se);
    }

    let mut buf = Vec::new();
    block.write_dump(&mut buf).unwrap();
    let back = SourceBlock::read_dump(&buf[..]).unwrap();
    println!("dump: {} bytes, round trip exact: {}", buf.len(), back.x == block.x && back.z == block.z);
}

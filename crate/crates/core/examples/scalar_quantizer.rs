//! Dithered scalar quantizer with modulo binning: a practical stand-in for the random codebook
//! at long block lengths. No security guarantee is claimed.
//!
//!     cargo run --release --example scalar_quantizer

use gauss_ska::covariance::{decompose, CovarianceTriple};
use gauss_ska::protocol::scalar::{run_scalar_batch, ScalarQuantizer};
use gauss_ska::region::optimal_key_rate;
use gauss_ska::rng::Seeds;

fn main() {
    let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
    let dec = decompose(&sigma);
    let cond_x_given_y = dec.cond_var_x_given_y();
    let n = 10_000;

    println!("cosets  public  ideal_key  symbol_err  agree");
    for cosets in [4u64, 8, 16, 32] {
        let step = 0.5 * cond_x_given_y.sqrt();
        let r_p = (cosets as f64).ln();
        let key_bits = (n as f64 * optimal_key_rate(&dec, r_p).unwrap() / std::f64::consts::LN_2) as usize;
        let cfg = ScalarQuantizer { n, step, cosets, key_bits };
        let ts = run_scalar_batch(&sigma, &cfg, &Seeds::from_master(9), 20);
        let errs: usize = ts.iter().map(|t| t.symbol_errors).sum();
        let agree = ts.iter().filter(|t| t.agree).count();
        println!(
            "{cosets:>6} {:>7.3} {:>10.4} {:>11.2e} {:>3}/{}",
            cfg.public_rate(),
            cfg.key_rate(),
            errs as f64 / (n * ts.len()) as f64,
            agree,
            ts.len()
        );
    }
}

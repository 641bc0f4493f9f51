//! Linear-Gaussian decomposition and the reduction of a degradable source to a chain.
//!
//!     cargo run --example classify_reduce

use gauss_ska::covariance::{classify_and_reduce, decompose, validate, CovarianceTriple};
use gauss_ska::region::key_rate_upper_bound;

fn main() {
    let cases = [
        ("chain", CovarianceTriple::unit(0.8, 0.4, 0.5)),
        ("not a chain", CovarianceTriple::new(2.0, 1.0, 1.5, 1.1, 0.3, -0.2)),
        ("eve sees more", CovarianceTriple::unit(0.3, 0.6, 0.2)),
        ("singular", CovarianceTriple::unit(0.9, 0.9, 0.2)),
    ];
    for (label, sigma) in cases {
        println!("== {label}");
        let sigma = match validate(sigma) {
            Ok(s) => s,
            Err(e) => {
                println!("   rejected: {e}");
                continue;
            }
        };
        let d = decompose(&sigma);
        println!("   X = {:.4}·Z + W1,  var(W1) = {:.4}", d.k_xz, d.var_w1);
        println!("   Y = {:.4}·X + {:.4}·Z + W2,  var(W2) = {:.4}", d.k_yx, d.k_yz, d.var_w2);

        let rep = classify_and_reduce(&sigma);
        println!("   rho²_xy = {:.4}, rho²_xz = {:.4} -> {}", rep.rho2_xy, rep.rho2_xz, rep.class.name());
        if let Some(r) = rep.reduced {
            println!(
                "   sigma_yz {:.4} -> {:.4}, fresh noise var {:.4}",
                sigma.sigma_yz,
                r.sigma_yz,
                rep.reduced_noise_var.unwrap()
            );
            println!("   key rate bound {:.6} nats", key_rate_upper_bound(&decompose(&r)));
        }
    }
}

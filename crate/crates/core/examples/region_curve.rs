//! Key rate against public rate for one source, plus the test channel that reaches each point.
//!
//!     cargo run --example region_curve

use gauss_ska::covariance::{classify_and_reduce, decompose, CovarianceTriple};
use gauss_ska::region::{
    design_auxiliary_noise, gaussian_mutual_informations, key_rate_upper_bound, required_public_rate,
    tradeoff_curve,
};

fn main() {
    let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
    let grid: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).collect();
    let curve = tradeoff_curve(&sigma, &grid).expect("valid triple");
    println!("class: {}", curve.class.name());

    let dec = decompose(&classify_and_reduce(&sigma).reduced.expect("degradable"));
    println!("{:>6} {:>10} {:>12} {:>10}", "r_p", "r_k", "noise_var", "I(U;Y|Z)");
    for row in &curve.rows {
        if row.r_p == 0.0 {
            println!("{:>6.2} {:>10.6} {:>12} {:>10}", row.r_p, row.r_k, "inf", "0");
            continue;
        }
        let aux = design_auxiliary_noise(&dec, row.r_p).unwrap();
        let info = gaussian_mutual_informations(&dec, &aux);
        println!("{:>6.2} {:>10.6} {:>12.6} {:>10.6}", row.r_p, row.r_k, aux.noise_var, info.i_uy_given_z);
    }

    let bound = key_rate_upper_bound(&dec);
    println!("no key rate reaches I(X;Y|Z) = {bound:.9} nats");
    for frac in [0.5, 0.9, 0.99] {
        let r_p = required_public_rate(&dec, frac * bound).unwrap();
        println!("{:>3.0}% of it costs {r_p:.4} nats of public discussion", 100.0 * frac);
    }
}

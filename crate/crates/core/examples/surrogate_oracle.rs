//! Exact leakage on a small discretized copy of the source, against the privacy-amplification bound.
//!
//!     cargo run --release --example surrogate_oracle

use gauss_ska::covariance::{decompose, CovarianceTriple};
use gauss_ska::region::design_auxiliary_noise;
use gauss_ska::surrogate::{discretize, exact_security, verify_pa_lemma, FiniteMap, FiniteProtocol};

fn main() {
    let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
    let aux = design_auxiliary_noise(&decompose(&sigma), 0.5).unwrap();
    let sur = discretize(&sigma, &aux, 4).expect("quadrature converges");
    let info = sur.informations();
    println!(
        "4-cell surrogate: I(U;X) = {:.4}, I(U;Y) = {:.4}, I(U;Z) = {:.4}, I(U;X|Z) = {:.4}",
        info.i_ux, info.i_uy, info.i_uz, info.i_ux_given_z
    );

    let proto = FiniteProtocol::build(&sur, 2, 16, 4, 1).unwrap();
    let none = exact_security(&sur, &proto, &FiniteMap::constant(16)).unwrap();
    println!(
        "single-key baseline: mu = {:.3e}, nu = {:.3e}, error = {:.4}",
        none.mu_exact, none.nu_exact, none.epsilon_exact
    );

    for (size_s, offset) in [(2, 0.1), (4, 0.1), (2, 0.6)] {
        let beta = info.i_ux_given_z - offset;
        let rep = verify_pa_lemma(&sur, &proto, size_s, beta, usize::MAX, 0).unwrap();
        println!("--- |S| = {size_s}, beta = {beta:.4}");
        print!("{}", rep.to_text());
    }
}

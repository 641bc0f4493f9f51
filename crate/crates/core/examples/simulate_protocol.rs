//! Random-codebook key agreement at a finite block length, with the sampled error bounds.
//!
//!     cargo run --release --example simulate_protocol

use gauss_ska::covariance::{decompose, CovarianceTriple};
use gauss_ska::protocol::bounds::estimate_lemma_bounds;
use gauss_ska::protocol::trial::summary_text;
use gauss_ska::protocol::{plan, BatchSummary, ProtocolInstance};
use gauss_ska::region::design_auxiliary_noise;
use gauss_ska::rng::Seeds;

fn main() {
    let sigma = CovarianceTriple::unit(0.8, 0.4, 0.5);
    let dec = decompose(&sigma);
    let aux = design_auxiliary_noise(&dec, 0.5).unwrap();

    for n in [6, 9, 12] {
        let p = match plan(&dec, &aux, n, 0.05) {
            Ok(p) => p,
            Err(e) => {
                println!("n = {n}: {e}");
                continue;
            }
        };
        let seeds = Seeds::from_master(2024);
        let inst = ProtocolInstance::new(&sigma, p, seeds).unwrap();
        let ts = inst.run_batch(500);
        let sum = BatchSummary::from_transcripts(&p, &ts);
        println!("--- n = {n}");
        print!("{}", summary_text(&inst, &sum, 1.0));

        let est = estimate_lemma_bounds(&sigma, &p, &inst.model, 2000, seeds.source);
        let not_a = 1.0 - sum.in_a as f64 / sum.trials as f64;
        println!(
            "quantizer bound {:.3}, binning bound {:.3}: {}",
            est.quantizer_bound(),
            est.binning_bound(not_a),
            if est.quantizer_bound() + est.binning_bound(not_a) >= 1.0 {
                "vacuous at this length"
            } else {
                "informative"
            }
        );
    }
}

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::fmt12;
use crate::covariance::{decompose, validate, CovarianceTriple};
use crate::region::gaussian_mutual_informations;
use crate::rng::Seeds;
use crate::source::SourceSampler;

use super::codebook::{quantize, Codebook};
use super::coding::{bin_encode, decode, privacy_amplify, ProtocolHashes};
use super::density::{info_density_ux, info_density_x_uz, info_density_yu, DensityModel};
use super::plan::ProtocolPlan;
use super::ProtocolError;

/// Everything observed in one run of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transcript {
    pub trial: u64,
    pub quantizer_index: u64,
    pub public_message: u64,
    /// `None` when the announced bin held no codeword.
    pub decoded_index: Option<u64>,
    pub key_alice: u64,
    pub key_bob: Option<u64>,
    /// `(g(xⁿ), xⁿ) ∈ T_n`.
    pub in_t: bool,
    /// `(g(xⁿ), yⁿ) ∈ A_n`.
    pub in_a: bool,
    /// `(g(xⁿ), xⁿ, zⁿ) ∈ B_n`.
    pub in_b: bool,
}

impl Transcript {
    pub fn empty_bin(&self) -> bool {
        self.decoded_index.is_none()
    }

    pub fn agree(&self) -> bool {
        self.key_bob == Some(self.key_alice)
    }

    pub fn index_agree(&self) -> bool {
        self.decoded_index == Some(self.quantizer_index)
    }
}

/// A plan together with its realized codebook and hash functions.
///
/// Immutable after construction; trials only read it.
#[derive(Debug, Clone)]
pub struct ProtocolInstance {
    pub plan: ProtocolPlan,
    pub model: DensityModel,
    pub codebook: Codebook,
    pub hashes: ProtocolHashes,
    pub seeds: Seeds,
    pub sigma: CovarianceTriple,
    sampler: SourceSampler,
}

impl ProtocolInstance {
    pub fn new(sigma: &CovarianceTriple, plan: ProtocolPlan, seeds: Seeds) -> Result<Self, ProtocolError> {
        let sigma = validate(*sigma)?;
        let model = DensityModel::new(&decompose(&sigma), &plan.aux);
        let codebook = Codebook::generate(&plan, &model, seeds.codebook);
        let hashes = ProtocolHashes::draw(&plan, seeds.bin, seeds.hash);
        Ok(ProtocolInstance {
            plan,
            model,
            codebook,
            hashes,
            seeds,
            sigma,
            sampler: SourceSampler::new(&sigma),
        })
    }

    /// Same codebook and source draws, different binning. Used for paired comparisons.
    pub fn with_plan_and_hashes(&self, plan: ProtocolPlan, hashes: ProtocolHashes) -> Self {
        assert_eq!(plan.size_q, self.plan.size_q);
        assert_eq!(plan.n, self.plan.n);
        ProtocolInstance { plan, hashes, ..self.clone() }
    }

    /// Sample → quantize → bin → decode → amplify, for trial number `trial`.
    pub fn run_trial(&self, trial: u64) -> Transcript {
        let block = self
            .sampler
            .sample(self.plan.n, self.seeds.source, trial)
            .expect("plan block length is within the sampler cap");
        let q = quantize(&self.codebook, &block.x, &self.model) as u64;
        let u = self.codebook.entry(q as usize);
        let message = bin_encode(&self.plan, &self.hashes.bin, q);
        let decoded = decode(&self.codebook, &self.hashes.bin, message, &block.y, &self.model).ok();
        let key_alice = privacy_amplify(&self.plan, &self.hashes.key, q);
        let key_bob = decoded.map(|d| privacy_amplify(&self.plan, &self.hashes.key, d));
        Transcript {
            trial,
            quantizer_index: q,
            public_message: message,
            decoded_index: decoded,
            key_alice,
            key_bob,
            in_t: info_density_ux(u, &block.x, &self.model) <= self.plan.t,
            in_a: info_density_yu(u, &block.y, &self.model) >= self.plan.alpha,
            in_b: info_density_x_uz(u, &block.x, &block.z, &self.model) >= self.plan.beta,
        }
    }

    /// Trials `0..count`, in order. Results do not depend on the thread count.
    pub fn run_batch(&self, count: u64) -> Vec<Transcript> {
        (0..count).into_par_iter().map(|t| self.run_trial(t)).collect()
    }
}

/// Builds the instance and runs one trial.
pub fn run_trial(
    sigma: &CovarianceTriple,
    plan: &ProtocolPlan,
    seeds: &Seeds,
    trial: u64,
) -> Result<Transcript, ProtocolError> {
    Ok(ProtocolInstance::new(sigma, *plan, *seeds)?.run_trial(trial))
}

/// Counters over a batch of transcripts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    pub trials: u64,
    pub agreements: u64,
    pub index_agreements: u64,
    pub empty_bins: u64,
    pub in_t: u64,
    pub in_a: u64,
    pub in_b: u64,
    /// Empirical entropy of Alice's keys divided by `ln|S|` (1 when `|S| = 1`).
    pub key_entropy_ratio: f64,
}

impl BatchSummary {
    pub fn from_transcripts(plan: &ProtocolPlan, ts: &[Transcript]) -> Self {
        let count = |f: fn(&Transcript) -> bool| ts.iter().filter(|t| f(t)).count() as u64;
        let mut hist = std::collections::BTreeMap::<u64, u64>::new();
        for t in ts {
            *hist.entry(t.key_alice).or_default() += 1;
        }
        let total = ts.len() as f64;
        let entropy: f64 = hist
            .values()
            .map(|&c| {
                let p = c as f64 / total;
                -p * p.ln()
            })
            .sum();
        let key_entropy_ratio = if plan.size_s > 1 { entropy / (plan.size_s as f64).ln() } else { 1.0 };
        BatchSummary {
            trials: ts.len() as u64,
            agreements: count(Transcript::agree),
            index_agreements: count(Transcript::index_agree),
            empty_bins: count(Transcript::empty_bin),
            in_t: count(|t| t.in_t),
            in_a: count(|t| t.in_a),
            in_b: count(|t| t.in_b),
            key_entropy_ratio,
        }
    }

    pub fn agreement_rate(&self) -> f64 {
        self.agreements as f64 / self.trials as f64
    }

    /// Binomial standard error of the agreement rate.
    pub fn agreement_se(&self) -> f64 {
        let p = self.agreement_rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

pub const TRIAL_CSV_HEADER: &str = "trial,agree,empty_bin,in_T,in_A,in_B";

/// `trial,agree,empty_bin,in_T,in_A,in_B` with 0/1 flags, LF endings.
pub fn trials_csv(ts: &[Transcript]) -> String {
    let mut s = String::with_capacity(24 * (ts.len() + 1));
    s.push_str(TRIAL_CSV_HEADER);
    s.push('\n');
    for t in ts {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            t.trial,
            u8::from(t.agree()),
            u8::from(t.empty_bin()),
            u8::from(t.in_t),
            u8::from(t.in_a),
            u8::from(t.in_b)
        );
    }
    s
}

/// Structured-text summary of a batch next to the analytic point it targets.
pub fn summary_text(instance: &ProtocolInstance, summary: &BatchSummary, rate_scale: f64) -> String {
    let plan = &instance.plan;
    let trials = summary.trials as f64;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("quantizer", "codebook".into());
    kv("trials", summary.trials.to_string());
    kv("agreement_rate", fmt12(summary.agreement_rate()));
    kv("index_agreement_rate", fmt12(summary.index_agreements as f64 / trials));
    kv("empty_bin_rate", fmt12(summary.empty_bins as f64 / trials));
    kv("in_T_rate", fmt12(summary.in_t as f64 / trials));
    kv("in_A_rate", fmt12(summary.in_a as f64 / trials));
    kv("in_B_rate", fmt12(summary.in_b as f64 / trials));
    kv("key_entropy_ratio", fmt12(summary.key_entropy_ratio));
    kv("public_rate", fmt12(plan.public_rate() * rate_scale));
    kv("key_rate", fmt12(plan.key_rate() * rate_scale));
    kv("size_q", plan.size_q.to_string());
    kv("size_c", plan.size_c.to_string());
    kv("size_s", plan.size_s.to_string());
    let target = analytic_target(instance);
    kv("target_public_rate", fmt12(target.0 * rate_scale));
    kv("target_key_rate", fmt12(target.1 * rate_scale));
    s
}

/// `(I(U;X|Y), I(U;Y|Z))` of the instance's test channel: the boundary point it aims at.
pub fn analytic_target(instance: &ProtocolInstance) -> (f64, f64) {
    let info = gaussian_mutual_informations(&decompose(&instance.sigma), &instance.plan.aux);
    (info.i_ux_given_y, info.i_uy_given_z)
}
